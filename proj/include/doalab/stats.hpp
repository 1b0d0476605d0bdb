#pragma once

#include <span>

namespace doalab {

[[nodiscard]] double mean(std::span<const double> xs);
/// Unbiased (n - 1) standard deviation. Requires at least two values.
[[nodiscard]] double sample_stddev(std::span<const double> xs);
[[nodiscard]] double median(std::span<const double> xs);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
};

/// Welch's unequal-variance two-sample t-test.
[[nodiscard]] TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace doalab
