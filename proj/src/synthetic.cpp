#include "scadanb/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "scadanb/rng.hpp"

namespace scadanb {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Baseline power curve: logistic sigmoid centered between cut-in and the
// rated knee, with a mild air-density (temperature) effect.
constexpr double kSigmoidKnee = 13.0;
constexpr double kSigmoidWidth = 1.4;
constexpr double kTempCoeff = 0.0025;
constexpr double kLoadUnit = 100.0;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Baseline {
  double amb, ws, power_frac, pitch_common;
};

double power_fraction(double ws, double amb, double center) {
  return sigmoid((ws - center) / kSigmoidWidth) * (1.0 + kTempCoeff * (10.0 - amb));
}

double pitch_for_wind(double ws) { return -2.5 + 0.12 * std::min(ws, 20.0); }

}  // namespace

void SyntheticConfig::validate() const {
  const auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (n_years < 1 || interval_minutes < 10 || interval_minutes % 10 != 0)
    throw InvalidConfigError("synthetic: years >= 1, interval a positive multiple of 10");
  if (rated_power <= 0.0 || cut_in <= 0.0 || cut_out <= cut_in)
    throw InvalidConfigError("synthetic: rated_power > 0 and cut_in < cut_out");
  if (!rate_ok(rate_anomaly1) || !rate_ok(rate_anomaly2) || !rate_ok(rate_anomaly3) ||
      !rate_ok(rate_anomaly4))
    throw InvalidConfigError("synthetic: anomaly rates in [0,1]");
  if (rate_anomaly1 + rate_anomaly2 + rate_anomaly3 + rate_anomaly4 > 0.9)
    throw InvalidConfigError("synthetic: combined anomaly rate too high");
  if (degradation_rate < 0.0 || degradation_rate >= 1.0)
    throw InvalidConfigError("synthetic: degradation_rate in [0,1)");
  if (noise_scale < 0.0) throw InvalidConfigError("synthetic: noise_scale >= 0");
}

ScadaFrame generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(cfg.turbine_id)));

  const std::int64_t start =
      epoch_min_from_civil(CivilTime{cfg.start_year, 1, 1, 0, 0, 0});
  const std::int64_t end =
      epoch_min_from_civil(CivilTime{cfg.start_year + cfg.n_years, 1, 1, 0, 0, 0});
  const std::size_t n =
      static_cast<std::size_t>((end - start) / cfg.interval_minutes);
  const double center = 0.5 * (cfg.cut_in + kSigmoidKnee);

  ScadaFrame frame;
  frame.turbine_id = cfg.turbine_id;
  frame.reserve(n);
  frame.labels.reserve(n);

  std::vector<double> power_frac_base(n);  // pre-anomaly curve value, for load coupling
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t t = start + static_cast<std::int64_t>(i) * cfg.interval_minutes;
    const CivilTime c = civil_from_epoch_min(t);
    const double doy =
        static_cast<double>((t - epoch_min_from_civil(CivilTime{c.year, 1, 1, 0, 0, 0})) /
                            1440);
    const double hour = static_cast<double>(c.hour) + c.minute / 60.0;
    const int year_index = c.year - cfg.start_year;
    const double degr = std::pow(1.0 - cfg.degradation_rate, year_index);

    // Wind: Weibull-shaped draw with a seasonal scale factor.
    const double lambda = 10.0 * (1.0 + 0.15 * std::cos(2.0 * kPi * (doy - 15.0) / 365.25));
    double u = rng.uniform();
    if (u >= 1.0) u = 1.0 - 0x1.0p-53;
    double ws = lambda * std::pow(-std::log(1.0 - u), 1.0 / 2.2);
    ws = std::min(ws, 30.0);

    const double amb = 9.0 + 8.0 * std::sin(2.0 * kPi * (doy - 105.0) / 365.25) +
                       1.5 * std::sin(2.0 * kPi * (hour - 14.0) / 24.0) + 2.0 * rng.normal();

    const double pfrac = power_fraction(ws, amb, center);
    power_frac_base[i] = pfrac * degr;
    double power = cfg.rated_power * pfrac * degr +
                   cfg.rated_power * cfg.noise_scale * rng.normal();
    power = std::max(0.0, power);

    const double pitch_common = pitch_for_wind(ws) + 0.05 * rng.normal();
    const double load_common =
        -kLoadUnit * (0.35 + 0.6 * power_frac_base[i]) + 1.5 * rng.normal();

    std::array<double, kNumFields> v{};
    v[static_cast<int>(Field::AmbTemp)] = amb;
    v[static_cast<int>(Field::BladeLoadA)] = load_common + 0.8 * rng.normal();
    v[static_cast<int>(Field::BladeLoadB)] = load_common + 0.8 * rng.normal();
    v[static_cast<int>(Field::BladeLoadC)] = load_common + 0.8 * rng.normal();
    v[static_cast<int>(Field::GridPower)] = power;
    v[static_cast<int>(Field::WindSpeed)] = ws;
    v[static_cast<int>(Field::PitchAngleA)] = pitch_common + 0.05 * rng.normal();
    v[static_cast<int>(Field::PitchAngleB)] = pitch_common + 0.05 * rng.normal();
    v[static_cast<int>(Field::PitchAngleC)] = pitch_common + 0.05 * rng.normal();
    double wd = std::fmod(200.0 + 60.0 * std::sin(2.0 * kPi * doy / 365.25) +
                              25.0 * rng.normal(),
                          360.0);
    if (wd < 0.0) wd += 360.0;
    v[static_cast<int>(Field::WdAbs)] = wd;
    v[static_cast<int>(Field::WindDirRel)] = 4.0 * rng.normal();
    v[static_cast<int>(Field::Wse)] = std::max(0.0, ws + 0.3 * rng.normal());
    frame.push_back(start + static_cast<std::int64_t>(i) * cfg.interval_minutes, v, Label::Normal,
                    true);
  }

  const auto set = [&](std::size_t i, Field f, double value) {
    frame.column(f)[i] = value;
  };
  const auto get = [&](std::size_t i, Field f) { return frame.column(f)[i]; };
  const auto degr_at = [&](std::size_t i) {
    return std::pow(1.0 - cfg.degradation_rate,
                    year_of(frame.time_min[i]) - cfg.start_year);
  };

  // Interval anomalies are injected as runs until the target count is met
  // exactly, so the labeled fraction matches the configured rate.
  const auto inject_runs = [&](double rate, Label label, auto&& apply) {
    const std::size_t target = static_cast<std::size_t>(std::llround(rate * n));
    std::size_t covered = 0;
    std::size_t guard = 0;
    while (covered < target && guard < 100 * (target + 1)) {
      ++guard;
      const std::size_t len =
          std::min<std::size_t>(static_cast<std::size_t>(rng.uniform_int(6, 30)),
                                target - covered);
      const std::size_t begin =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - len)));
      for (std::size_t i = begin; i < begin + len; ++i) {
        if (frame.labels[i] != Label::Normal) continue;
        frame.labels[i] = label;
        apply(i);
        ++covered;
        if (covered == target) break;
      }
    }
  };

  // Type 1: no production above cut-in, blades feathered.
  inject_runs(cfg.rate_anomaly1, Label::Anomaly1, [&](std::size_t i) {
    double ws = get(i, Field::WindSpeed);
    if (ws < cfg.cut_in) {
      ws = cfg.cut_in + 0.3 + 1.2 * std::fabs(rng.normal());
      set(i, Field::WindSpeed, ws);
    }
    set(i, Field::GridPower, 0.0);
    const double pitch = 2.0 + rng.uniform(0.0, 4.0);
    set(i, Field::PitchAngleA, pitch + 0.05 * rng.normal());
    set(i, Field::PitchAngleB, pitch + 0.05 * rng.normal());
    set(i, Field::PitchAngleC, pitch + 0.05 * rng.normal());
    const double load = -kLoadUnit * 0.35 + 1.5 * rng.normal();
    set(i, Field::BladeLoadA, load + 0.8 * rng.normal());
    set(i, Field::BladeLoadB, load + 0.8 * rng.normal());
    set(i, Field::BladeLoadC, load + 0.8 * rng.normal());
  });

  // Type 2: curtailment plateau below rated at healthy winds, pitched out.
  inject_runs(cfg.rate_anomaly2, Label::Anomaly2, [&](std::size_t i) {
    const double level = rng.uniform(0.2, 0.5);
    const double ws = rng.uniform(11.0, 18.0);
    set(i, Field::WindSpeed, ws);
    set(i, Field::GridPower,
        std::max(0.0, cfg.rated_power * level * degr_at(i) +
                          cfg.rated_power * 0.003 * rng.normal()));
    const double pitch = pitch_for_wind(ws) + rng.uniform(0.0, 3.5);
    set(i, Field::PitchAngleA, pitch + 0.05 * rng.normal());
    set(i, Field::PitchAngleB, pitch + 0.05 * rng.normal());
    set(i, Field::PitchAngleC, pitch + 0.05 * rng.normal());
    const double load = -kLoadUnit * (0.35 + 0.6 * level) + 1.5 * rng.normal();
    set(i, Field::BladeLoadA, load + 0.8 * rng.normal());
    set(i, Field::BladeLoadB, load + 0.8 * rng.normal());
    set(i, Field::BladeLoadC, load + 0.8 * rng.normal());
  });

  // Type 4: high-wind derating tail; pitch raised above the normal schedule
  // and power dropping monotonically as the blades pitch out.
  inject_runs(cfg.rate_anomaly4, Label::Anomaly4, [&](std::size_t i) {
    const double ws = rng.uniform(14.0, 23.0);
    set(i, Field::WindSpeed, ws);
    const double lift = rng.uniform(0.5, 1.2);
    const double pitch = pitch_for_wind(ws) + lift;
    set(i, Field::PitchAngleA, pitch + 0.03 * rng.normal());
    set(i, Field::PitchAngleB, pitch + 0.03 * rng.normal());
    set(i, Field::PitchAngleC, pitch + 0.03 * rng.normal());
    const double frac = 0.93 - 0.05 * (ws - 14.0) - 0.05 * lift;
    set(i, Field::GridPower,
        std::max(0.0, cfg.rated_power * frac * degr_at(i) +
                          cfg.rated_power * 0.003 * rng.normal()));
    const double load = -kLoadUnit * (0.35 + 0.6 * frac) + 1.5 * rng.normal();
    set(i, Field::BladeLoadA, load + 0.8 * rng.normal());
    set(i, Field::BladeLoadB, load + 0.8 * rng.normal());
    set(i, Field::BladeLoadC, load + 0.8 * rng.normal());
  });

  // Type 3: isolated scattered points with incoherent sensor values.
  {
    const std::size_t target =
        static_cast<std::size_t>(std::llround(cfg.rate_anomaly3 * n));
    std::size_t placed = 0;
    std::size_t guard = 0;
    while (placed < target && guard < 100 * (target + 1)) {
      ++guard;
      const std::size_t i =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - 1)));
      if (frame.labels[i] != Label::Normal) continue;
      frame.labels[i] = Label::Anomaly3;
      set(i, Field::WindSpeed, rng.uniform(0.0, 28.0));
      set(i, Field::GridPower, rng.uniform(0.0, 1.08 * cfg.rated_power));
      set(i, Field::AmbTemp, rng.uniform(-20.0, 35.0));
      set(i, Field::PitchAngleA, rng.uniform(-12.0, 8.0));
      set(i, Field::PitchAngleB, rng.uniform(-12.0, 8.0));
      set(i, Field::PitchAngleC, rng.uniform(-12.0, 8.0));
      set(i, Field::BladeLoadA, rng.uniform(-140.0, 25.0));
      set(i, Field::BladeLoadB, rng.uniform(-140.0, 25.0));
      set(i, Field::BladeLoadC, rng.uniform(-140.0, 25.0));
      ++placed;
    }
  }

  // Sensor recalibrations: additive offsets from the event time onward.
  for (const auto& ev : cfg.recalibrations) {
    for (std::size_t i = 0; i < n; ++i) {
      if (frame.time_min[i] < ev.time_min) continue;
      frame.column(ev.sensor)[i] += ev.offset;
      if (frame.labels[i] == Label::Normal) frame.labels[i] = Label::Recalibration;
    }
  }

  return frame;
}

std::string synthetic_curve_note() {
  return "power = rated * logistic((ws - (cut_in+13)/2) / 1.4) * (1 + 0.0025*(10 - amb)); "
         "10-minute means";
}

}  // namespace scadanb
