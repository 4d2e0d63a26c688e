#include "adrobust/report_io.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adrobust/error.hpp"

namespace adrobust {

using nlohmann::json;

namespace {

// Shortest exact representation, so CSV bytes are a pure function of values.
std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_indices(const std::vector<std::size_t>& idx) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(idx[i]);
  }
  return out;
}

}  // namespace

void write_records_csv(const RobustnessReport& report, std::ostream& out) {
  out << "category,method,estimator,aug_factor,n,replicate,seed,fit_size,auc,train_indices\n";
  for (const auto& r : report.records) {
    out << r.category << ',' << r.method << ',' << r.estimator << ',' << r.aug_factor << ',' << r.n << ','
        << r.replicate << ',' << r.seed << ',' << r.fit_size << ',' << exact(r.auc) << ','
        << join_indices(r.train_indices) << '\n';
  }
}

void write_timings_csv(const RobustnessReport& report, std::ostream& out) {
  out << "category,method,aug_factor,n,replicate,fit_size,fit_seconds,score_seconds\n";
  for (const auto& r : report.records) {
    out << r.category << ',' << r.method << ',' << r.aug_factor << ',' << r.n << ',' << r.replicate << ','
        << r.fit_size << ',' << exact(r.fit_seconds) << ',' << exact(r.score_seconds) << '\n';
  }
}

std::string report_json(const RobustnessReport& report, std::span<const std::string> exclusions) {
  json j;
  j["master_seed"] = report.master_seed;
  j["replicates"] = report.replicates;
  j["n_max"] = report.n_max;
  j["conventions"] = json::object();
  for (const auto& [k, v] : report.conventions) j["conventions"][k] = v;
  j["warnings"] = report.warnings;
  j["exclusions"] = std::vector<std::string>(exclusions.begin(), exclusions.end());

  std::set<std::string> categories;
  std::vector<std::pair<std::string, int>> method_aug;
  for (const auto& r : report.records) {
    categories.insert(r.category);
    const std::pair<std::string, int> key{r.method, r.aug_factor};
    if (std::find(method_aug.begin(), method_aug.end(), key) == method_aug.end()) method_aug.push_back(key);
  }

  json per_category = json::array();
  for (const auto& c : categories) {
    for (const auto& [method, aug] : method_aug) {
      std::vector<CurvePoint> curve;
      try {
        curve = auc_percent_curve(report, c, method, aug);
      } catch (const UndefinedMetric&) {
        continue;
      }
      if (curve.empty()) continue;
      json entry{{"category", c}, {"method", method}, {"aug_factor", aug}};
      entry["curve"] = json::array();
      for (const auto& p : curve) entry["curve"].push_back({{"fraction", p.x}, {"mean_auc", p.y}});
      entry["auc_percent_area"] = curve.size() >= 2 ? json(normalized_curve_area(curve)) : json(nullptr);
      per_category.push_back(std::move(entry));
    }
  }
  j["per_category"] = std::move(per_category);

  j["aggregates"] = json::array();
  for (const auto group : {CategoryGroup::all, CategoryGroup::textures, CategoryGroup::objects}) {
    AggregateTable table;
    try {
      table = aggregate(report, group, exclusions);
    } catch (const InvalidArgument&) {
      continue;
    }
    json g{{"group", group_name(group)}, {"categories", table.categories}};
    g["curve"] = json::array();
    for (const auto& p : table.curve) {
      g["curve"].push_back({{"method", p.method},
                            {"aug_factor", p.aug_factor},
                            {"n", p.n},
                            {"mean_auc", p.mean_auc},
                            {"n_categories", p.n_categories}});
    }
    g["auc_percent_area"] = json::array();
    for (const auto& a : table.areas) {
      g["auc_percent_area"].push_back({{"method", a.method},
                                       {"aug_factor", a.aug_factor},
                                       {"mean_area", a.mean_area},
                                       {"n_categories", a.n_categories}});
    }
    j["aggregates"].push_back(std::move(g));
  }
  return j.dump(2) + "\n";
}

std::string render_svg(const RobustnessReport& report, const std::string& category, int aug_factor) {
  constexpr double width = 640, height = 400, left = 60, right = 160, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::vector<std::string> methods;
  int n_lo = 0, n_hi = 0;
  double auc_lo = 1.0;
  for (const auto& r : report.records) {
    if (r.category != category || r.aug_factor != aug_factor) continue;
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    n_lo = n_lo == 0 ? r.n : std::min(n_lo, r.n);
    n_hi = std::max(n_hi, r.n);
    auc_lo = std::min(auc_lo, r.auc);
  }
  auc_lo = std::max(0.0, std::min(0.5, auc_lo - 0.05));
  const double n_span = n_hi > n_lo ? n_hi - n_lo : 1.0;
  auto sx = [&](double n) { return left + (n - n_lo) / n_span * plot_w; };
  auto sy = [&](double auc) { return top + (1.0 - (auc - auc_lo) / (1.0 - auc_lo)) * plot_h; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"18\">" << category << " (aug x" << aug_factor << ")</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double auc = auc_lo + (1.0 - auc_lo) * t / 4.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(auc) + 4 << "\" text-anchor=\"end\">" << auc << "</text>\n";
  }
  svg << "<text x=\"" << left << "\" y=\"" << height - 15 << "\">N = " << n_lo << "</text>\n";
  svg << "<text x=\"" << left + plot_w << "\" y=\"" << height - 15 << "\" text-anchor=\"end\">N = " << n_hi
      << "</text>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">training sample size</text>\n";

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const char* color = palette[mi % std::size(palette)];
    std::set<int> sizes;
    for (const auto& r : report.records) {
      if (r.category == category && r.method == methods[mi] && r.aug_factor == aug_factor) sizes.insert(r.n);
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const int n : sizes) svg << sx(n) << ',' << sy(mean_auc(report, category, methods[mi], aug_factor, n)) << ' ';
    svg << "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(mi);
    svg << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + plot_w + 35
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly << "\">" << methods[mi] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace adrobust
