#include "scadanb/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "scadanb/csv.hpp"

namespace scadanb::io {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

void write_filter_reports_csv(const std::filesystem::path& path,
                              const std::vector<FilterReport>& reports) {
  auto out = open_out(path);
  out << "stage,rule,count\n";
  for (const auto& report : reports) {
    for (const auto& [rule, count] : report.removed_by_rule)
      out << report.stage << ',' << rule << ',' << count << "\n";
    out << report.stage << ",kept," << report.kept << "\n";
    out << report.stage << ",total," << report.total << "\n";
  }
}

void write_pps_csv(const std::filesystem::path& path, int turbine_id,
                   const std::vector<pps::PpsResult>& series) {
  auto out = open_out(path);
  out << "turbine_id,year,quarter,variable,pps,combined_avg\n";
  for (const auto& result : series) {
    if (!result.sufficient) {
      out << turbine_id << ',' << result.quarter.year << ',' << result.quarter.quarter
          << ",insufficient,,\n";
      continue;
    }
    for (const auto& [field, score] : result.per_variable)
      out << turbine_id << ',' << result.quarter.year << ',' << result.quarter.quarter << ','
          << field_name(field) << ',' << fmt(score) << ',' << fmt(result.combined_avg)
          << "\n";
  }
}

std::vector<pps::PpsResult> read_pps_csv(const std::filesystem::path& path, int* turbine_id) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError(path.string());
  std::map<QuarterKey, pps::PpsResult> by_quarter;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 6) cells.emplace_back();
    const int id = std::stoi(cells[0]);
    if (turbine_id != nullptr) *turbine_id = id;
    const QuarterKey key{std::stoi(cells[1]), std::stoi(cells[2])};
    auto& result = by_quarter[key];
    result.quarter = key;
    if (cells[3] == "insufficient") {
      result.sufficient = false;
      continue;
    }
    result.sufficient = true;
    result.per_variable[field_from_name(cells[3])] = std::stod(cells[4]);
    result.combined_avg = std::stod(cells[5]);
  }
  std::vector<pps::PpsResult> series;
  series.reserve(by_quarter.size());
  for (auto& [key, result] : by_quarter) series.push_back(std::move(result));
  return series;
}

void write_drift_csv(const std::filesystem::path& path,
                     const std::vector<exp::DriftReport>& reports) {
  auto out = open_out(path);
  out << "turbine_id,experiment,model,feature_set,nb_year,reference_year,year,delta,"
         "drift_delta,mae,mape,n\n";
  for (const auto& report : reports) {
    for (const auto& ys : report.per_year) {
      out << report.turbine_id << ',' << report.experiment << ','
          << ml::family_name(report.family) << ',' << exp::feature_set_name(report.features)
          << ',' << report.nb_year << ',' << report.reference_year << ',' << ys.year << ','
          << fmt(ys.delta) << ',' << fmt(ys.drift_delta) << ',' << fmt(ys.mae) << ','
          << fmt(ys.mape) << ',' << ys.n << "\n";
    }
  }
}

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<ml::Trial>& trials) {
  auto out = open_out(path);
  out << "trial,params,cv_error\n";
  for (const auto& trial : trials)
    out << trial.index << ',' << ml::describe_spec(trial.spec) << ',' << fmt(trial.cv_error)
        << "\n";
}

std::string stable_periods_to_json(const std::vector<nb::StablePeriod>& periods) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& p : periods) {
    nlohmann::ordered_json item;
    item["turbine_id"] = p.turbine_id;
    item["years"] = p.years;
    item["nb_year"] = p.nb_year;
    item["reference_year"] = p.reference_year;
    item["target_years"] = p.target_years;
    j.push_back(item);
  }
  return j.dump(2);
}

std::vector<nb::StablePeriod> stable_periods_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<nb::StablePeriod> periods;
  for (const auto& item : j) {
    nb::StablePeriod p;
    p.turbine_id = item.at("turbine_id").get<int>();
    p.years = item.at("years").get<std::vector<int>>();
    p.nb_year = item.at("nb_year").get<int>();
    p.reference_year = item.at("reference_year").get<int>();
    p.target_years = item.at("target_years").get<std::vector<int>>();
    periods.push_back(std::move(p));
  }
  return periods;
}

std::string k_selection_to_json(const std::vector<nb::KSelectionResult>& selections) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& sel : selections) {
    nlohmann::ordered_json item;
    item["year"] = sel.quarter.year;
    item["quarter"] = sel.quarter.quarter;
    item["sufficient"] = sel.sufficient;
    item["chosen_k"] = sel.chosen_k;
    nlohmann::ordered_json per_k = nlohmann::ordered_json::object();
    for (const auto& [k, entry] : sel.per_k) {
      nlohmann::ordered_json e;
      e["pps"] = entry.pps;
      e["n_delta"] = entry.n_delta;
      e["score"] = entry.score;
      per_k[std::to_string(k)] = e;
    }
    item["per_k"] = per_k;
    j.push_back(item);
  }
  return j.dump(2);
}

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<SvgSeries>& series) {
  constexpr double width = 720, height = 420;
  constexpr double left = 70, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    svg << "<line x1=\"" << px(fx) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(fx)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << px(fx) << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << fmt(std::round(fx * 100.0) / 100.0) << "</text>\n";
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << left
        << "\" y2=\"" << py(fy) << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << left - 9 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << fmt(std::round(fy * 100.0) / 100.0) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << x_label
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 "
      << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i > 0) svg << ' ';
      svg << fmt(px(series[s].x[i])) << ',' << fmt(py(series[s].y[i]));
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * s
        << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << color << "\">"
        << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

}  // namespace scadanb::io
