#pragma once

// Independent reference implementations used only to check the library.
// These are deliberately written the dumb way (full-matrix DP, linear
// scans) and share no code with core/.

#include <string>
#include <vector>

namespace test_support {

// Quadratic full-matrix LCS length.
inline int lcs_brute(const std::vector<std::string>& x,
                     const std::vector<std::string>& y) {
  size_t n = x.size(), m = y.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      if (x[i - 1] == y[j - 1])
        dp[i][j] = dp[i - 1][j - 1] + 1;
      else
        dp[i][j] = dp[i - 1][j] > dp[i][j - 1] ? dp[i - 1][j] : dp[i][j - 1];
    }
  }
  return dp[n][m];
}

struct RougeOracle {
  double recall;
  double precision;
  double f1;
  int lcs;
};

inline RougeOracle rouge_brute(const std::vector<std::string>& reference,
                               const std::vector<std::string>& candidate) {
  RougeOracle out{0.0, 0.0, 0.0, lcs_brute(reference, candidate)};
  if (!reference.empty()) out.recall = double(out.lcs) / double(reference.size());
  if (!candidate.empty())
    out.precision = double(out.lcs) / double(candidate.size());
  if (out.recall + out.precision > 0)
    out.f1 = 2.0 * out.recall * out.precision / (out.recall + out.precision);
  return out;
}

}  // namespace test_support
