#pragma once

// Property checks for every module, shared by the doctest property suite and the acceptance
// binary. Generators are hand-rolled on top of std::mt19937_64.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "doalab/pipeline.hpp"
#include "doalab/scene_sim.hpp"

namespace doalab::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mean = 0.0, double std = 1.0) { return std::normal_distribution<double>(mean, std)(rng_); }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(integer(0, static_cast<long>(n) - 1)); }
  bool coin() { return integer(0, 1) == 1; }
  std::uint64_t seed() { return rng_(); }
  std::vector<double> noise(std::size_t n, double std = 1.0);
  std::mt19937_64& engine() { return rng_; }

  /// Short single-talker scene (1-2 s) with random intervals, azimuth and noise.
  SceneSpec small_scene(bool allow_distractors = true);

 private:
  std::mt19937_64 rng_;
};

struct PropertyOutcome {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;  ///< empty when every case passed

  [[nodiscard]] bool passed() const { return cases > 0 && failures == 0; }
};

struct Property {
  std::string module;
  std::string name;
  std::function<PropertyOutcome(std::size_t cases, std::uint64_t seed)> run;
};

/// Runs `body` once per case with a fresh generator; a returned string is a failure message.
PropertyOutcome for_all(std::size_t cases, std::uint64_t seed,
                        const std::function<std::optional<std::string>(Gen&)>& body);

/// Every invariant listed for the modules, in module order.
[[nodiscard]] std::vector<Property> all_properties();

inline constexpr std::size_t kDefaultCases = 100;

}  // namespace doalab::testing
