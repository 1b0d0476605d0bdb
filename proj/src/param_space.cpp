#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"
#include "param_support.hpp"

namespace doalab {

using nlohmann::json;

std::vector<double> GridAxis::values() const {
  if (!(step > 0.0) || !std::isfinite(min) || !std::isfinite(max) || max < min) {
    throw InvalidArgument("grid axis needs finite min <= max and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = std::round((min + static_cast<double>(i) * step) * 1e10) / 1e10;
  }
  return v;
}

ParamSpace ParamSpace::table2_grid() {
  ParamSpace s;
  s.frame_size = GridAxis{0.1, 1.0, 0.05};
  s.step_fraction = GridAxis{0.1, 1.0, 0.05};
  s.delta_low = GridAxis{1.0, 10.0, 0.1};
  s.delta_high = GridAxis{3.0, 14.0, 0.1};
  return s;
}

ParamSpace ParamSpace::table2_tpe() { return ParamSpace{}; }

namespace {

void validate_dim(const NumericDim& d, const char* name) {
  std::visit(
      [name](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GridAxis>) {
          (void)v.values();
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          if (!std::isfinite(v.min) || !std::isfinite(v.max) || !(v.max > v.min)) {
            throw InvalidArgument(std::string(name) + ": uniform needs finite min < max");
          }
        } else {
          if (!std::isfinite(v.mean) || !(v.std > 0.0) || !std::isfinite(v.std)) {
            throw InvalidArgument(std::string(name) + ": normal needs finite mean and std > 0");
          }
        }
      },
      d);
}

json dim_to_json(const NumericDim& d) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GridAxis>) {
          return json{{"grid", {v.min, v.max, v.step}}};
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          return json{{"uniform", {v.min, v.max}}};
        } else {
          return json{{"normal", {v.mean, v.std}}};
        }
      },
      d);
}

NumericDim dim_from_json(const json& j, const char* name) {
  if (j.contains("grid")) {
    const auto& a = j.at("grid");
    return GridAxis{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
  }
  if (j.contains("uniform")) {
    const auto& a = j.at("uniform");
    return UniformDist{a.at(0).get<double>(), a.at(1).get<double>()};
  }
  if (j.contains("normal")) {
    const auto& a = j.at("normal");
    return NormalDist{a.at(0).get<double>(), a.at(1).get<double>()};
  }
  throw InvalidArgument(std::string(name) + ": expected one of grid/uniform/normal");
}

}  // namespace

void ParamSpace::validate() const {
  if (classifier_choices.empty()) throw InvalidArgument("parameter space has no classifier choices");
  if (timing_choices.empty()) throw InvalidArgument("parameter space has no timing choices");
  validate_dim(frame_size, "frame_size");
  validate_dim(step_fraction, "step_fraction");
  validate_dim(delta_low, "delta_low");
  validate_dim(delta_high, "delta_high");
}

bool ParamSpace::all_grid() const {
  return std::holds_alternative<GridAxis>(frame_size) && std::holds_alternative<GridAxis>(step_fraction) &&
         std::holds_alternative<GridAxis>(delta_low) && std::holds_alternative<GridAxis>(delta_high);
}

bool ParamSpace::all_distributions() const {
  return !std::holds_alternative<GridAxis>(frame_size) &&
         !std::holds_alternative<GridAxis>(step_fraction) &&
         !std::holds_alternative<GridAxis>(delta_low) && !std::holds_alternative<GridAxis>(delta_high);
}

json to_json(const ParamSpace& s) {
  json classifiers = json::array();
  for (auto c : s.classifier_choices) classifiers.push_back(std::string(to_string(c)));
  json timings = json::array();
  for (auto t : s.timing_choices) timings.push_back(std::string(to_string(t)));
  return json{{"classifier", classifiers},       {"timing", timings},
              {"frame_size", dim_to_json(s.frame_size)}, {"step_fraction", dim_to_json(s.step_fraction)},
              {"delta_low", dim_to_json(s.delta_low)},   {"delta_high", dim_to_json(s.delta_high)}};
}

ParamSpace space_from_json(const json& j) {
  try {
    ParamSpace s;
    s.classifier_choices.clear();
    for (const auto& c : j.at("classifier")) s.classifier_choices.push_back(parse_classifier(c.get<std::string>()));
    s.timing_choices.clear();
    for (const auto& t : j.at("timing")) s.timing_choices.push_back(parse_weighting(t.get<std::string>()));
    s.frame_size = dim_from_json(j.at("frame_size"), "frame_size");
    s.step_fraction = dim_from_json(j.at("step_fraction"), "step_fraction");
    s.delta_low = dim_from_json(j.at("delta_low"), "delta_low");
    s.delta_high = dim_from_json(j.at("delta_high"), "delta_high");
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad space JSON: ") + e.what());
  }
}

namespace detail {

Support support_of(Dim dim) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (dim) {
    case Dim::FrameSize: return {0.0, inf};
    case Dim::StepFraction: return {0.0, 1.0};
    case Dim::DeltaLow:
    case Dim::DeltaHigh: return {0.0, inf};
  }
  return {0.0, inf};
}

const NumericDim& dim_of(const ParamSpace& space, Dim dim) {
  switch (dim) {
    case Dim::FrameSize: return space.frame_size;
    case Dim::StepFraction: return space.step_fraction;
    case Dim::DeltaLow: return space.delta_low;
    case Dim::DeltaHigh: return space.delta_high;
  }
  return space.frame_size;
}

double get(const PipelineParams& p, Dim dim) {
  switch (dim) {
    case Dim::FrameSize: return p.framing.frame_size_s;
    case Dim::StepFraction: return p.framing.step_fraction;
    case Dim::DeltaLow: return p.thresholds.delta_low();
    case Dim::DeltaHigh: return p.thresholds.delta_high();
  }
  return 0.0;
}

double sample_truncated_normal(double mean, double sd, Support s, std::mt19937_64& rng) {
  std::normal_distribution<double> n(mean, sd);
  for (int i = 0; i < 1000; ++i) {
    const double x = n(rng);
    if (x > s.lo && x <= s.hi) return x;
  }
  // Mass inside the support is negligible; fall back to the nearest admissible value.
  const double x = std::clamp(mean, s.lo, s.hi);
  return x > s.lo ? x : std::nextafter(s.lo, s.hi);
}

double sample_dim(const NumericDim& d, Support s, std::mt19937_64& rng) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GridAxis>) {
          const auto values = v.values();
          std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
          return values[pick(rng)];
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          std::uniform_real_distribution<double> u(v.min, v.max);
          return u(rng);
        } else {
          return sample_truncated_normal(v.mean, v.std, s, rng);
        }
      },
      d);
}

std::pair<double, double> ordered_thresholds(const std::function<std::pair<double, double>()>& draw) {
  std::pair<double, double> t{};
  for (int attempt = 0; attempt < 100; ++attempt) {
    t = draw();
    if (t.first > 0.0 && t.first < t.second) return t;
  }
  if (t.first > t.second) std::swap(t.first, t.second);
  if (t.first == t.second) t.second = std::nextafter(t.second, std::numeric_limits<double>::infinity());
  return t;
}

}  // namespace detail

PipelineParams sample_prior(const ParamSpace& space, std::mt19937_64& rng) {
  space.validate();
  using detail::Dim;
  PipelineParams p;
  std::uniform_int_distribution<std::size_t> pick_c(0, space.classifier_choices.size() - 1);
  p.classifier = space.classifier_choices[pick_c(rng)];
  std::uniform_int_distribution<std::size_t> pick_t(0, space.timing_choices.size() - 1);
  p.timing = space.timing_choices[pick_t(rng)];
  p.framing.frame_size_s = detail::sample_dim(space.frame_size, detail::support_of(Dim::FrameSize), rng);
  p.framing.step_fraction =
      detail::sample_dim(space.step_fraction, detail::support_of(Dim::StepFraction), rng);
  const auto [lo, hi] = detail::ordered_thresholds([&] {
    const double l = detail::sample_dim(space.delta_low, detail::support_of(Dim::DeltaLow), rng);
    const double h = detail::sample_dim(space.delta_high, detail::support_of(Dim::DeltaHigh), rng);
    return std::make_pair(l, h);
  });
  p.thresholds = Thresholds(lo, hi);
  return p;
}

}  // namespace doalab
