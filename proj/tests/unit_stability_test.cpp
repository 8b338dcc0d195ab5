#include "doctest.h"

#include <cmath>
#include <random>

#include "webscraper/errors.hpp"
#include "webscraper/model.hpp"
#include "webscraper/stability.hpp"

#include "support/temp_dir.hpp"

using namespace webscraper;
using test_support::TempDir;

namespace {

std::vector<double> bernoulli_scores(uint32_t seed, double p, int n) {
  std::mt19937 rng(seed);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double u = static_cast<double>(rng()) / 4294967296.0;
    out.push_back(u < p ? 1.0 : 0.0);
  }
  return out;
}

std::vector<double> random_vector(std::mt19937& rng, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(static_cast<double>(rng() % 1000) / 999.0);
  return out;
}

}  // namespace

// --------------------------------------------------------- ci_half_width

TEST_CASE("ci_half_width: zero variance gives zero") {
  std::vector<double> v(10, 0.5);
  CHECK(stability::ci_half_width(v) == 0.0);
}

TEST_CASE("ci_half_width: two-point case matches the published t value") {
  // n=2: s = 1/sqrt(2), t(0.975, 1) = 12.706 per standard tables,
  // giving 12.706 * 0.70711 / sqrt(2) = 6.353.
  double hw = stability::ci_half_width({0.0, 1.0});
  CHECK(hw == doctest::Approx(6.353).epsilon(1e-3));
}

TEST_CASE("ci_half_width: rejects degenerate input") {
  CHECK_THROWS_AS(stability::ci_half_width({}), ValidationError);
  CHECK_THROWS_AS(stability::ci_half_width({0.7}), ValidationError);
  CHECK_THROWS_AS(stability::ci_half_width({0.1, 0.2}, 1.5), ValidationError);
}

TEST_CASE("ci_half_width: homogeneity and translation invariance") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_vector(rng, 2 + static_cast<int>(rng() % 30));
    double base = stability::ci_half_width(v);

    double c = -3.0 + static_cast<double>(rng() % 100) / 16.0;
    std::vector<double> scaled, shifted;
    for (double x : v) scaled.push_back(c * x);
    for (double x : v) shifted.push_back(x + c);

    CHECK(stability::ci_half_width(scaled) ==
          doctest::Approx(std::fabs(c) * base).epsilon(1e-9));
    CHECK(stability::ci_half_width(shifted) ==
          doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("ci_half_width: narrower confidence narrows the interval") {
  std::vector<double> v{0.1, 0.4, 0.9, 0.3, 0.7};
  CHECK(stability::ci_half_width(v, 0.90) < stability::ci_half_width(v, 0.95));
  CHECK(stability::ci_half_width(v, 0.95) < stability::ci_half_width(v, 0.99));
}

// ----------------------------------------------------- convergence_curve

TEST_CASE("convergence_curve: five scores at step five give one point") {
  auto curve = stability::convergence_curve({1, 0, 1, 0, 1}, 5, "demo");
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].n == 5);
  CHECK(curve.setting_id == "demo");
  CHECK(curve.points[0].half_width ==
        doctest::Approx(stability::ci_half_width({1, 0, 1, 0, 1})));
}

TEST_CASE("convergence_curve: constant scores give an all-zero curve") {
  std::vector<double> v(25, 0.82);
  auto curve = stability::convergence_curve(v, 5);
  CHECK(curve.points.size() == 5);
  for (const auto& p : curve.points) CHECK(p.half_width == 0.0);
}

TEST_CASE("convergence_curve: n strictly increasing, all n >= 2") {
  auto v = bernoulli_scores(7, 0.5, 23);
  auto curve = stability::convergence_curve(v, 3);
  REQUIRE(!curve.points.empty());
  int prev = 1;
  for (const auto& p : curve.points) {
    CHECK(p.n > prev);
    CHECK(p.n >= 2);
    prev = p.n;
  }
  // step 1 must skip the impossible n=1 point.
  auto fine = stability::convergence_curve(v, 1);
  CHECK(fine.points.front().n == 2);
}

TEST_CASE("convergence_curve: each point depends only on its prefix") {
  auto v = bernoulli_scores(11, 0.5, 40);
  auto full = stability::convergence_curve(v, 10);
  std::vector<double> head(v.begin(), v.begin() + 20);
  auto partial = stability::convergence_curve(head, 10);
  REQUIRE(partial.points.size() == 2);
  CHECK(full.points[0].half_width == partial.points[0].half_width);
  CHECK(full.points[1].half_width == partial.points[1].half_width);
}

TEST_CASE("convergence_curve: half-width shrinks with more seeded runs") {
  auto v = bernoulli_scores(2024, 0.5, 40);
  auto curve = stability::convergence_curve(v, 10);
  REQUIRE(curve.points.size() == 4);
  CHECK(curve.points[3].half_width < curve.points[0].half_width);
  CHECK(curve.points[2].half_width < curve.points[0].half_width);
}

TEST_CASE("convergence_curve: degenerate inputs throw") {
  CHECK_THROWS_AS(stability::convergence_curve({0.5}, 5), ValidationError);
  CHECK_THROWS_AS(stability::convergence_curve({0.5, 0.6}, 0),
                  ValidationError);
}

// ---------------------------------------------------- cumulative_average

TEST_CASE("cumulative_average: arithmetic on a five-score run") {
  auto pts = stability::cumulative_average({1, 0, 1, 0, 1}, 5);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].first == 5);
  CHECK(pts[0].second == doctest::Approx(0.6));
}

TEST_CASE("cumulative_average: constant input is flat") {
  std::vector<double> v(17, 0.33);
  auto pts = stability::cumulative_average(v, 5);
  REQUIRE(pts.size() == 4);  // 5, 10, 15, and the final 17
  CHECK(pts.back().first == 17);
  for (const auto& [n, m] : pts) CHECK(m == doctest::Approx(0.33));
}

TEST_CASE("cumulative_average: seeded runs settle near the true mean") {
  auto v = bernoulli_scores(5150, 0.7, 40);
  auto pts = stability::cumulative_average(v, 5);
  REQUIRE(pts.back().first == 40);
  CHECK(std::fabs(pts.back().second - 0.7) < 0.15);
}

TEST_CASE("cumulative_average: empty input throws") {
  CHECK_THROWS_AS(stability::cumulative_average({}, 5), ValidationError);
}

// ------------------------------------------------------ temporal_compare

TEST_CASE("temporal_compare: week-over-week deltas under 0.05 pass") {
  std::map<std::string, double> t{{"site3", 0.511},
                                  {"site4", 0.648},
                                  {"site5", 0.820}};
  std::map<std::string, double> t7{{"site3", 0.533},
                                   {"site4", 0.673},
                                   {"site5", 0.820}};
  auto report = stability::temporal_compare(t, t7);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.all_pass);
  CHECK(report.rows[0].abs_delta == doctest::Approx(0.022).epsilon(1e-12));
  CHECK(report.rows[1].abs_delta == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(report.rows[2].abs_delta == 0.0);
  for (const auto& r : report.rows) CHECK(r.pass);
}

TEST_CASE("temporal_compare: the 0.05 rule is strict") {
  auto fail = stability::temporal_compare({{"a", 0.50}}, {{"a", 0.56}});
  CHECK(fail.rows[0].abs_delta == doctest::Approx(0.06));
  CHECK_FALSE(fail.rows[0].pass);
  CHECK_FALSE(fail.all_pass);

  // delta of exactly 0.05 is not "less than 5%".
  auto edge = stability::temporal_compare({{"a", 0.0}}, {{"a", 0.05}});
  CHECK_FALSE(edge.rows[0].pass);

  auto drop = stability::temporal_compare({{"a", 0.9}}, {{"a", 0.7}});
  CHECK(drop.rows[0].abs_delta == doctest::Approx(0.2));
  CHECK_FALSE(drop.rows[0].pass);
}

TEST_CASE("temporal_compare: mismatched site sets are named") {
  std::map<std::string, double> t{{"a", 0.5}, {"b", 0.5}};
  std::map<std::string, double> t7{{"a", 0.5}};
  CHECK_THROWS_WITH_AS(stability::temporal_compare(t, t7),
                       doctest::Contains("'b'"), ValidationError);
  CHECK_THROWS_WITH_AS(stability::temporal_compare(t7, t),
                       doctest::Contains("'b'"), ValidationError);
}

// -------------------------------------------------------- emit_plot_data

TEST_CASE("emit_plot_data writes the three CSV flavors") {
  TempDir dir;

  auto curve = stability::convergence_curve({1, 0, 1, 0, 1, 1}, 3, "s");
  std::string curve_path = dir.path() + "/curve.csv";
  stability::emit_plot_data(curve, curve_path);
  std::string curve_csv = model::read_file(curve_path);
  CHECK(curve_csv.rfind("n,half_width\n", 0) == 0);
  CHECK(curve_csv.find("\n3,") != std::string::npos);
  CHECK(curve_csv.find("\n6,") != std::string::npos);

  auto cumavg = stability::cumulative_average({1, 0, 1, 0, 1}, 5);
  std::string avg_path = dir.path() + "/cumavg.csv";
  stability::emit_plot_data(cumavg, avg_path);
  std::string avg_csv = model::read_file(avg_path);
  CHECK(avg_csv == "n,cumulative_mean\n5,0.6\n");

  auto report = stability::temporal_compare({{"a", 0.5}, {"b", 0.9}},
                                            {{"a", 0.52}, {"b", 0.7}});
  std::string rep_path = dir.path() + "/temporal.csv";
  stability::emit_plot_data(report, rep_path);
  std::string rep_csv = model::read_file(rep_path);
  CHECK(rep_csv.rfind("site,t,t7,delta,pass\n", 0) == 0);
  CHECK(rep_csv.find("a,0.5,0.52,0.02,true\n") != std::string::npos);
  CHECK(rep_csv.find("b,0.9,0.7,0.2,false\n") != std::string::npos);
}
