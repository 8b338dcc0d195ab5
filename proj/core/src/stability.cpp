#include "webscraper/stability.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "webscraper/errors.hpp"
#include "webscraper/model.hpp"

namespace webscraper::stability {

namespace {

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

double ci_half_width(const std::vector<double>& values, double confidence) {
  const size_t n = values.size();
  if (n < 2)
    throw ValidationError("ci_half_width needs at least 2 values, got " +
                          std::to_string(n));
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ValidationError("confidence must lie in (0, 1)");

  bool constant = true;
  for (double v : values)
    if (v != values.front()) {
      constant = false;
      break;
    }
  if (constant) return 0.0;

  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double s = std::sqrt(ss / static_cast<double>(n - 1));

  boost::math::students_t_distribution<double> dist(
      static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  return t * s / std::sqrt(static_cast<double>(n));
}

ConvergenceCurve convergence_curve(const std::vector<double>& run_scores,
                                   int step, const std::string& setting_id) {
  if (run_scores.size() < 2)
    throw ValidationError("convergence_curve needs at least 2 scores");
  if (step < 1) throw ValidationError("step must be >= 1");

  ConvergenceCurve curve;
  curve.setting_id = setting_id;
  for (int n = step; n <= static_cast<int>(run_scores.size()); n += step) {
    if (n < 2) continue;
    std::vector<double> prefix(run_scores.begin(), run_scores.begin() + n);
    curve.points.push_back({n, ci_half_width(prefix)});
  }
  return curve;
}

std::vector<std::pair<int, double>> cumulative_average(
    const std::vector<double>& run_scores, int interval) {
  if (run_scores.empty())
    throw ValidationError("cumulative_average needs at least 1 score");
  if (interval < 1) throw ValidationError("interval must be >= 1");

  std::vector<std::pair<int, double>> points;
  double sum = 0.0;
  const int total = static_cast<int>(run_scores.size());
  for (int i = 0; i < total; ++i) {
    sum += run_scores[i];
    const int n = i + 1;
    if (n % interval == 0 || n == total)
      points.emplace_back(n, sum / static_cast<double>(n));
  }
  return points;
}

TemporalReport temporal_compare(
    const std::map<std::string, double>& scores_t,
    const std::map<std::string, double>& scores_t7) {
  for (const auto& [site, _] : scores_t)
    if (!scores_t7.count(site))
      throw ValidationError("temporal_compare: site '" + site +
                            "' missing from the T+7 scores");
  for (const auto& [site, _] : scores_t7)
    if (!scores_t.count(site))
      throw ValidationError("temporal_compare: site '" + site +
                            "' missing from the T scores");

  TemporalReport report;
  report.all_pass = true;
  for (const auto& [site, t_score] : scores_t) {
    TemporalRow row;
    row.site = site;
    row.score_t = t_score;
    row.score_t7 = scores_t7.at(site);
    row.abs_delta = std::fabs(row.score_t7 - row.score_t);
    row.pass = row.abs_delta < kTemporalThreshold;
    if (!row.pass) report.all_pass = false;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void emit_plot_data(const ConvergenceCurve& curve, const std::string& path) {
  std::ostringstream out;
  out << "n,half_width\n";
  for (const auto& p : curve.points)
    out << p.n << ',' << fmt(p.half_width) << '\n';
  model::write_file(path, out.str());
}

void emit_plot_data(const std::vector<std::pair<int, double>>& cumavg,
                    const std::string& path) {
  std::ostringstream out;
  out << "n,cumulative_mean\n";
  for (const auto& [n, m] : cumavg) out << n << ',' << fmt(m) << '\n';
  model::write_file(path, out.str());
}

void emit_plot_data(const TemporalReport& report, const std::string& path) {
  std::ostringstream out;
  out << "site,t,t7,delta,pass\n";
  for (const auto& r : report.rows)
    out << r.site << ',' << fmt(r.score_t) << ',' << fmt(r.score_t7) << ','
        << fmt(r.abs_delta) << ',' << (r.pass ? "true" : "false") << '\n';
  model::write_file(path, out.str());
}

}  // namespace webscraper::stability
