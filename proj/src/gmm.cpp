#include "scadanb/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "scadanb/rng.hpp"
#include "scadanb/stats.hpp"

namespace scadanb::gmm {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kWeightFloor = 1e-8;

struct Component {
  std::vector<double> mean;
  Matrix chol;              // lower Cholesky factor of the covariance
  double log_norm = 0.0;    // -d/2 log(2pi) - sum(log L_ii)

  // log N(x | mean, LL')
  double log_density(std::span<const double> x, std::vector<double>& scratch) const {
    const std::size_t d = mean.size();
    for (std::size_t i = 0; i < d; ++i) scratch[i] = x[i] - mean[i];
    stats::cholesky_forward_solve(chol, scratch);
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) q += scratch[i] * scratch[i];
    return log_norm - 0.5 * q;
  }
};

Component make_component(const std::vector<double>& mean, const Matrix& cov) {
  Component c;
  c.mean = mean;
  if (!stats::cholesky(cov, c.chol))
    throw SingularCovarianceError("gmm component covariance");
  const std::size_t d = mean.size();
  double log_det_half = 0.0;
  for (std::size_t i = 0; i < d; ++i) log_det_half += std::log(c.chol(i, i));
  c.log_norm = -0.5 * static_cast<double>(d) * kLog2Pi - log_det_half;
  return c;
}

std::vector<Component> build_components(const GmmModel& model) {
  std::vector<Component> comps;
  comps.reserve(model.k);
  for (int j = 0; j < model.k; ++j)
    comps.push_back(make_component(model.means[j], model.covariances[j]));
  return comps;
}

// k-means++-style seeding: first mean uniform, later means drawn with
// probability proportional to the squared distance to the closest chosen one.
std::vector<std::vector<double>> seed_means(const Matrix& x, int k, Rng& rng) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<std::vector<double>> means;
  means.reserve(k);
  std::vector<double> dist_sq(n, std::numeric_limits<double>::infinity());

  const std::size_t first = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
  means.emplace_back(x.row(first).begin(), x.row(first).end());
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x(i, c) - means.back()[c];
        s += diff * diff;
      }
      dist_sq[i] = std::min(dist_sq[i], s);
      total += dist_sq[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= dist_sq[i];
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    }
    means.emplace_back(x.row(pick).begin(), x.row(pick).end());
  }
  return means;
}

Matrix global_covariance(const Matrix& x, double cov_reg) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> mu(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) mu[c] += x(i, c);
  for (double& v : mu) v /= static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b <= a; ++b)
        cov(a, b) += (x(i, a) - mu[a]) * (x(i, b) - mu[b]);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      cov(a, b) /= static_cast<double>(n);
      cov(b, a) = cov(a, b);
    }
  for (std::size_t a = 0; a < d; ++a) cov(a, a) += cov_reg;
  return cov;
}

struct RestartResult {
  GmmModel model;
  std::vector<double> loglik_trace;
  bool valid = false;
};

RestartResult run_restart(const Matrix& x, int k, const EmConfig& cfg, std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Rng rng(seed);

  GmmModel model;
  model.k = k;
  model.seed = seed;
  model.weights.assign(k, 1.0 / k);
  model.means = seed_means(x, k, rng);
  const Matrix cov0 = global_covariance(x, cfg.cov_reg);
  model.covariances.assign(k, cov0);

  RestartResult result;
  std::vector<Component> comps;
  Matrix resp(n, k);
  std::vector<double> scratch(d);
  double prev_ll = -std::numeric_limits<double>::infinity();
  bool reset_used = false;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    comps = build_components(model);

    // E-step with log-sum-exp stabilization; accumulates the log-likelihood.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double max_lp = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double lp = std::log(model.weights[j]) + comps[j].log_density(x.row(i), scratch);
        resp(i, j) = lp;
        max_lp = std::max(max_lp, lp);
      }
      double sum = 0.0;
      for (int j = 0; j < k; ++j) sum += std::exp(resp(i, j) - max_lp);
      const double log_sum = max_lp + std::log(sum);
      ll += log_sum;
      for (int j = 0; j < k; ++j) resp(i, j) = std::exp(resp(i, j) - log_sum);
    }
    result.loglik_trace.push_back(ll);

    // M-step: weighted moments with diagonal jitter.
    bool degenerate = false;
    for (int j = 0; j < k; ++j) {
      double nj = 0.0;
      for (std::size_t i = 0; i < n; ++i) nj += resp(i, j);
      if (nj / static_cast<double>(n) < kWeightFloor) {
        // Collapsed component: reseed it once from a random row; a second
        // collapse voids the restart.
        if (reset_used) {
          degenerate = true;
          break;
        }
        reset_used = true;
        const std::size_t pick = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
        model.means[j].assign(x.row(pick).begin(), x.row(pick).end());
        model.covariances[j] = cov0;
        model.weights[j] = 1.0 / n;
        continue;
      }
      model.weights[j] = nj / static_cast<double>(n);
      std::vector<double>& mu = model.means[j];
      std::fill(mu.begin(), mu.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) mu[c] += resp(i, j) * x(i, c);
      for (double& v : mu) v /= nj;
      Matrix& cov = model.covariances[j];
      cov = Matrix(d, d);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resp(i, j);
        for (std::size_t a = 0; a < d; ++a) {
          const double da = x(i, a) - mu[a];
          for (std::size_t b = 0; b <= a; ++b) cov(a, b) += w * da * (x(i, b) - mu[b]);
        }
      }
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
          cov(a, b) /= nj;
          cov(b, a) = cov(a, b);
        }
      for (std::size_t a = 0; a < d; ++a) cov(a, a) += cfg.cov_reg;
    }
    if (degenerate) return result;

    // Renormalize after a possible component reset.
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;

    if (iter > 0) {
      const double rel = std::fabs(ll - prev_ll) / (std::fabs(prev_ll) + 1e-12);
      if (rel < cfg.tol) {
        model.converged = true;
        model.final_loglik = ll;
        result.model = std::move(model);
        result.valid = true;
        return result;
      }
    }
    prev_ll = ll;
  }
  model.converged = false;
  model.final_loglik = prev_ll;
  result.model = std::move(model);
  result.valid = true;
  return result;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iter < 1) throw InvalidConfigError("em: max_iter >= 1");
  if (!(tol > 0.0)) throw InvalidConfigError("em: tol > 0");
  if (n_init < 1) throw InvalidConfigError("em: n_init >= 1");
}

GmmModel gmm_fit(const Matrix& x, int k, const EmConfig& cfg) {
  return gmm_fit_traced(x, k, cfg, nullptr);
}

GmmModel gmm_fit_traced(const Matrix& x, int k, const EmConfig& cfg, FitTrace* trace) {
  cfg.validate();
  if (k < 1) throw InvalidConfigError("gmm: k >= 1");
  if (x.rows() < static_cast<std::size_t>(10 * k))
    throw TooFewSamplesError(x.rows(), 10 * k);

  RestartResult best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.n_init; ++r) {
    RestartResult candidate =
        run_restart(x, k, cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(k), r));
    if (!candidate.valid) continue;
    if (candidate.model.final_loglik > best_ll) {
      best_ll = candidate.model.final_loglik;
      best = std::move(candidate);
    }
  }
  if (!best.valid) throw Error("gmm: every restart degenerated");
  if (trace != nullptr) trace->loglik_per_iter = best.loglik_trace;
  return best.model;
}

std::vector<double> score_samples(const GmmModel& model, const Matrix& x) {
  if (x.cols() != model.dims()) throw DimensionMismatchError("score_samples");
  const auto comps = build_components(model);
  std::vector<double> scores(x.rows());
  std::vector<double> scratch(model.dims());
  std::vector<double> lp(model.k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double max_lp = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < model.k; ++j) {
      lp[j] = std::log(model.weights[j]) + comps[j].log_density(x.row(i), scratch);
      max_lp = std::max(max_lp, lp[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < model.k; ++j) sum += std::exp(lp[j] - max_lp);
    scores[i] = max_lp + std::log(sum);
  }
  return scores;
}

std::vector<bool> gmm_boxplot_keep(const GmmModel& model, const Matrix& x, bool relaxed) {
  if (x.rows() < 5) throw TooFewSamplesError(x.rows(), 5);
  const std::vector<double> scores = score_samples(model, x);
  const auto q = stats::quartiles(scores);
  const auto fences = stats::tukey_fences(q, relaxed);
  const bool use_relaxed = relaxed && q.iqr > 0.0;
  std::vector<bool> keep(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool low = use_relaxed ? scores[i] <= fences.lower : scores[i] < fences.lower;
    keep[i] = !low;  // high likelihood is never anomalous
  }
  return keep;
}

std::string GmmModel::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["seed"] = seed;
  j["converged"] = converged;
  j["final_loglik"] = final_loglik;
  j["weights"] = weights;
  j["means"] = means;
  std::vector<std::vector<std::vector<double>>> covs;
  for (const Matrix& c : covariances) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < c.rows(); ++r)
      rows.emplace_back(c.row(r).begin(), c.row(r).end());
    covs.push_back(std::move(rows));
  }
  j["covariances"] = covs;
  return j.dump(2);
}

GmmModel GmmModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GmmModel m;
  m.k = j.at("k").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.converged = j.at("converged").get<bool>();
  m.final_loglik = j.at("final_loglik").get<double>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.means = j.at("means").get<std::vector<std::vector<double>>>();
  for (const auto& rows : j.at("covariances")) {
    const auto mat = rows.get<std::vector<std::vector<double>>>();
    Matrix c(mat.size(), mat.empty() ? 0 : mat[0].size());
    for (std::size_t r = 0; r < mat.size(); ++r)
      for (std::size_t col = 0; col < mat[r].size(); ++col) c(r, col) = mat[r][col];
    m.covariances.push_back(std::move(c));
  }
  return m;
}

}  // namespace scadanb::gmm
