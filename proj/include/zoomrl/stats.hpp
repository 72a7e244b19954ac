#pragma once

#include <span>

namespace zoomrl {

struct MannWhitneyResult {
  double u = 0.0;        // U statistic of the first sample
  double z = 0.0;        // continuity-corrected normal score
  double p_value = 1.0;  // one-sided, H1: first sample tends to be smaller
};

/// One-sided Mann-Whitney U test via the normal approximation, with midranks
/// and tie-corrected variance. p = 1 when either sample is empty or all values
/// tie.
MannWhitneyResult mann_whitney_less(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);

}  // namespace zoomrl
