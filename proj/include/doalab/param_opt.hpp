#pragma once

// Parameter search over the pipeline's decision vector: objective aggregation, exhaustive grid
// search, a Tree-structured Parzen Estimator, a random-search baseline and contour export.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "doalab/pipeline.hpp"

namespace doalab {

// ---------------------------------------------------------------------------------------------
// Search space

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  /// min, min + step, ..., up to max (inclusive within 1e-9 of a step).
  [[nodiscard]] std::vector<double> values() const;
};

struct UniformDist {
  double min = 0.0;
  double max = 1.0;
};

struct NormalDist {
  double mean = 0.0;
  double std = 1.0;
};

using NumericDim = std::variant<GridAxis, UniformDist, NormalDist>;

struct ParamSpace {
  std::vector<ClassifierKind> classifier_choices{ClassifierKind::Srmr, ClassifierKind::PowerOnset};
  std::vector<WeightingKind> timing_choices{WeightingKind::PlainCC, WeightingKind::Phat,
                                            WeightingKind::Scot};
  NumericDim frame_size = UniformDist{0.1, 1.0};
  NumericDim step_fraction = UniformDist{0.1, 1.0};
  NumericDim delta_low = NormalDist{3.0, 3.0};
  NumericDim delta_high = NormalDist{10.0, 3.0};

  /// Brute-force form: frames and steps (0.1, 1) by 0.05, thresholds (1, 10) and (3, 14) by 0.1.
  static ParamSpace table2_grid();
  /// TPE form: U(0.1, 1) frames and steps, N(3, 3) and N(10, 3) thresholds.
  static ParamSpace table2_tpe();

  /// Throws InvalidArgument on empty choices, empty grids or non-finite distribution parameters.
  void validate() const;
  [[nodiscard]] bool all_grid() const;
  [[nodiscard]] bool all_distributions() const;
};

[[nodiscard]] nlohmann::json to_json(const ParamSpace& space);
[[nodiscard]] ParamSpace space_from_json(const nlohmann::json& j);

/// One draw from the prior: uniform categoricals, U/N numerics (grid axes draw a uniform grid
/// point). Normal draws are truncated to the parameter's support; delta_low < delta_high is
/// enforced by rejection (100 attempts), then by swapping.
[[nodiscard]] PipelineParams sample_prior(const ParamSpace& space, std::mt19937_64& rng);

// ---------------------------------------------------------------------------------------------
// Objectives

enum class ObjectiveKind { Doa, Classification, Joint, JointReg };

[[nodiscard]] std::string_view to_string(ObjectiveKind kind);
[[nodiscard]] ObjectiveKind parse_objective(std::string_view name);

struct Objective {
  ObjectiveKind kind = ObjectiveKind::JointReg;
  double lambda = 0.5;  ///< frame-size regularization weight, JointReg only
};

/// Objective assigned to trials that find no speech windows (or f1 = 0 under the joint forms).
inline constexpr double kPenalty = 1e6;

/// Per-recording scenario weights of the eight training recordings.
inline constexpr std::array<int, 8> kScenarioWeights{1, 1, 2, 2, 3, 2, 1, 3};

/// Weighted aggregate of per-recording metrics; see ObjectiveKind. Throws on length mismatch or
/// non-positive weights.
[[nodiscard]] double aggregate(std::span<const Metrics> per_recording, std::span<const int> weights,
                               const Objective& objective, double frame_size_s);

struct Trial {
  std::size_t index = 0;
  PipelineParams params;
  std::vector<Metrics> per_recording;
  double objective = kPenalty;
  bool valid = false;
};

/// {"classifier", "timing", "frame_size_s", "step_fraction", "delta_low", "delta_high"}.
[[nodiscard]] nlohmann::json to_json(const PipelineParams& p);
[[nodiscard]] PipelineParams params_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const Trial& t);
[[nodiscard]] Trial trial_from_json(const nlohmann::json& j);
void write_trials_jsonl(std::ostream& out, std::span<const Trial> trials);
[[nodiscard]] std::vector<Trial> read_trials_jsonl(std::istream& in);

/// Evaluates a parameter vector; the returned trial's index is ignored by the optimizers.
using TrialFunction = std::function<Trial(const PipelineParams&)>;

/// Evaluates parameter vectors over an ordered dataset. Recordings are visited in order and
/// evaluation stops at the first recording with no speech windows. Results are cached by exact
/// parameter vector; evaluate() is safe to call from several threads.
class DatasetEvaluator {
 public:
  DatasetEvaluator(std::span<const AnnotatedRecording> dataset, HeadModel model, Objective objective,
                   PipelineOptions options = {});

  [[nodiscard]] Trial evaluate(const PipelineParams& params);
  /// Evaluates several threshold pairs sharing one (classifier, timing, framing) with one
  /// frame analysis per recording.
  [[nodiscard]] std::vector<Trial> evaluate_thresholds(ClassifierKind classifier, WeightingKind timing,
                                                       const FramingParams& framing,
                                                       std::span<const Thresholds> thresholds);
  [[nodiscard]] TrialFunction as_function();
  [[nodiscard]] std::size_t cache_size() const;
  [[nodiscard]] const Objective& objective() const noexcept { return objective_; }

 private:
  struct Key {
    PipelineParams p;
    bool operator<(const Key& o) const { return compare(p, o.p) < 0; }
  };

  std::span<const AnnotatedRecording> dataset_;
  HeadModel model_;
  Objective objective_;
  PipelineOptions options_;
  std::vector<int> weights_;
  mutable std::mutex mutex_;
  std::map<Key, Trial> cache_;
};

// ---------------------------------------------------------------------------------------------
// Search strategies

struct TpeConfig {
  std::size_t n_startup = 20;
  double gamma_quantile = 0.25;
  std::size_t n_candidates = 24;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SearchResult {
  std::optional<Trial> best;  ///< empty when no trials were run
  std::vector<Trial> trials;  ///< in evaluation order

  [[nodiscard]] bool no_trials() const noexcept { return trials.empty(); }
  /// Best objective after each trial.
  [[nodiscard]] std::vector<double> best_so_far() const;
};

/// Argmin objective; ties go to the smaller frame size, then to the lexicographically smaller
/// parameter vector.
[[nodiscard]] const Trial* select_best(std::span<const Trial> trials);

/// Random generator for the i-th suggestion of a run seeded with `seed`.
[[nodiscard]] std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial_index);

/// Enumerates every grid point with delta_low < delta_high.
[[nodiscard]] std::vector<PipelineParams> enumerate_grid(const ParamSpace& space);

[[nodiscard]] SearchResult grid_search(const ParamSpace& space, DatasetEvaluator& evaluator,
                                       unsigned threads = 1);
[[nodiscard]] SearchResult grid_search(const ParamSpace& space, const Objective& objective,
                                       std::span<const AnnotatedRecording> dataset,
                                       const HeadModel& model, unsigned threads = 1);

/// Next parameter vector given the evaluation history (see TpeConfig). Deterministic in
/// (history.size(), config.seed).
[[nodiscard]] PipelineParams tpe_suggest(std::span<const Trial> history, const ParamSpace& space,
                                         const TpeConfig& config);

[[nodiscard]] SearchResult tpe_optimize(const ParamSpace& space, const TrialFunction& evaluate,
                                        std::size_t n_trials, const TpeConfig& config);
[[nodiscard]] SearchResult tpe_optimize(const ParamSpace& space, const Objective& objective,
                                        std::span<const AnnotatedRecording> dataset,
                                        const HeadModel& model, std::size_t n_trials,
                                        const TpeConfig& config);

[[nodiscard]] SearchResult random_search(const ParamSpace& space, const TrialFunction& evaluate,
                                         std::size_t n_trials, std::uint64_t seed);
[[nodiscard]] SearchResult random_search(const ParamSpace& space, const Objective& objective,
                                         std::span<const AnnotatedRecording> dataset,
                                         const HeadModel& model, std::size_t n_trials,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------------------------
// Contours

enum class ContourStat { Min, Mean };

struct ContourCell {
  double x = 0.0;
  double y = 0.0;
  std::size_t count = 0;
  std::optional<double> value;  ///< empty where no valid trial landed
};

struct ContourGrid {
  std::string x_axis;
  std::string y_axis;
  std::vector<double> x_centers;
  std::vector<double> y_centers;
  std::vector<ContourCell> cells;  ///< row-major: y outer, x inner

  [[nodiscard]] std::size_t populated() const;
};

/// Numeric parameter of a trial by name: frame_size, step_fraction, delta_low, delta_high.
[[nodiscard]] double parameter_value(const PipelineParams& params, std::string_view name);

/// Bins valid trials on two numeric parameters. An axis with at most `bins` distinct values gets
/// one bin per value; otherwise `bins` equal-width bins over the observed range.
[[nodiscard]] ContourGrid contour_export(std::span<const Trial> trials, std::string_view x_axis,
                                         std::string_view y_axis, ContourStat stat,
                                         std::size_t bins = 20);
void write_contour_csv(std::ostream& out, const ContourGrid& grid);

/// Rounds to a multiple of `quantum` (e.g. 0.339 s -> 0.34 s with 0.01).
[[nodiscard]] double round_to(double value, double quantum);

}  // namespace doalab
