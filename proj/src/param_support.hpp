#pragma once

// Helpers shared by the prior sampler and the TPE.

#include <functional>
#include <random>
#include <utility>

#include "doalab/param_opt.hpp"

namespace doalab::detail {

enum class Dim { FrameSize, StepFraction, DeltaLow, DeltaHigh };
inline constexpr Dim kNumericDims[] = {Dim::FrameSize, Dim::StepFraction, Dim::DeltaLow, Dim::DeltaHigh};

/// Admissible values of a parameter: lo < x <= hi.
struct Support {
  double lo;
  double hi;
};

Support support_of(Dim dim);
const NumericDim& dim_of(const ParamSpace& space, Dim dim);
double get(const PipelineParams& p, Dim dim);

double sample_truncated_normal(double mean, double sd, Support s, std::mt19937_64& rng);
double sample_dim(const NumericDim& d, Support s, std::mt19937_64& rng);

/// Redraws until 0 < low < high (100 attempts), then swaps the last draw.
std::pair<double, double> ordered_thresholds(const std::function<std::pair<double, double>()>& draw);

}  // namespace doalab::detail
