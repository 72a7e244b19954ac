#include "zoomrl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace zoomrl {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

MannWhitneyResult mann_whitney_less(std::span<const double> x, std::span<const double> y) {
  MannWhitneyResult res;
  const std::size_t n1 = x.size(), n2 = y.size();
  if (n1 == 0 || n2 == 0) return res;

  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n1 + n2);
  for (double v : x) pooled.emplace_back(v, 0);
  for (double v : y) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());

  const double n = static_cast<double>(n1 + n2);
  double rank_sum_x = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_x += midrank;
    }
    i = j;
  }

  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  res.u = rank_sum_x - d1 * (d1 + 1.0) / 2.0;
  const double mu = d1 * d2 / 2.0;
  const double var = d1 * d2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return res;
  // Small U supports H1; the +0.5 is the continuity correction.
  res.z = (res.u - mu + 0.5) / std::sqrt(var);
  res.p_value = 0.5 * std::erfc(-res.z / std::sqrt(2.0));
  return res;
}

}  // namespace zoomrl
