#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace webscraper::stability {

struct ConvergencePoint {
  int n = 0;
  double half_width = 0.0;
};

struct ConvergenceCurve {
  std::string setting_id;
  std::vector<ConvergencePoint> points;  // n strictly increasing, n >= 2
};

struct TemporalRow {
  std::string site;
  double score_t = 0.0;
  double score_t7 = 0.0;
  double abs_delta = 0.0;
  bool pass = false;  // abs_delta < kTemporalThreshold, strictly
};

struct TemporalReport {
  std::vector<TemporalRow> rows;  // sorted by site key
  bool all_pass = false;
};

inline constexpr double kTemporalThreshold = 0.05;

// Student-t half-width t(1-alpha/2, n-1) * s / sqrt(n), s with n-1
// denominator. Throws ValidationError for fewer than two values.
double ci_half_width(const std::vector<double>& values,
                     double confidence = 0.95);

// Half-widths over growing prefixes: one point per multiple of step
// (starting at the first multiple >= 2). Throws for fewer than two scores.
ConvergenceCurve convergence_curve(const std::vector<double>& run_scores,
                                   int step = 5,
                                   const std::string& setting_id = "");

// Running means sampled every `interval` runs; the final run count is
// always included. Throws ValidationError on empty input.
std::vector<std::pair<int, double>> cumulative_average(
    const std::vector<double>& run_scores, int interval = 5);

// Per-site |score_T7 - score_T| with the strict 0.05 pass rule. The two
// maps must cover the same sites; a mismatch names the offending key.
TemporalReport temporal_compare(const std::map<std::string, double>& scores_t,
                                const std::map<std::string, double>& scores_t7);

// CSV emission, one flavor per artifact. Header rows:
//   n,half_width | n,cumulative_mean | site,t,t7,delta,pass
void emit_plot_data(const ConvergenceCurve& curve, const std::string& path);
void emit_plot_data(const std::vector<std::pair<int, double>>& cumavg,
                    const std::string& path);
void emit_plot_data(const TemporalReport& report, const std::string& path);

}  // namespace webscraper::stability
