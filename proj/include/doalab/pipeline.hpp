#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doalab/frame_classify.hpp"
#include "doalab/head_geometry.hpp"
#include "doalab/signal.hpp"
#include "doalab/tde.hpp"

namespace doalab {

/// The optimizer's decision vector: classifier, timing method, framing and thresholds.
struct PipelineParams {
  ClassifierKind classifier = ClassifierKind::Srmr;
  WeightingKind timing = WeightingKind::Phat;
  FramingParams framing{};
  Thresholds thresholds{};

  /// SRMR, GCC-PHAT, 0.34 s frames, step 0.90, thresholds (1.5, 7).
  static PipelineParams best();
  void validate() const;
};

/// Lexicographic over (classifier, timing, frame, step, low, high).
[[nodiscard]] std::strong_ordering compare(const PipelineParams& a, const PipelineParams& b);
[[nodiscard]] inline bool operator==(const PipelineParams& a, const PipelineParams& b) {
  return compare(a, b) == std::strong_ordering::equal;
}

struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct AngleKnot {
  double t_s = 0.0;
  double theta_rad = 0.0;
};

struct AnnotatedRecording {
  StereoSignal audio;
  std::vector<Interval> speech_intervals;  ///< sorted, non-overlapping
  std::vector<AngleKnot> angle_track;      ///< piecewise-linear, increasing times
  int weight = 1;
  std::string label;

  /// Throws InvalidArgument on unsorted/overlapping intervals, non-increasing knots, weight < 1.
  void validate() const;
  /// Ground-truth azimuth at t (clamped to the first/last knot). Requires a non-empty track.
  [[nodiscard]] double angle_at(double t_s) const;
  /// Seconds of annotated speech inside [a, b].
  [[nodiscard]] double speech_overlap(double a_s, double b_s) const;
};

struct DoaEstimate {
  double frame_start_s = 0.0;
  double frame_size_s = 0.0;
  bool accepted = false;
  double classifier_value = 0.0;   ///< NaN for the first power-onset frame
  std::optional<AzimuthRad> angle;  ///< present iff accepted
  double lag_seconds = 0.0;        ///< NaN unless accepted
  double prominence = 0.0;         ///< NaN unless accepted
  double emit_time_s = 0.0;        ///< simulated emission: frame-end arrival + processing time
};

struct Metrics {
  double f1 = 0.0;
  double mse = 0.0;  ///< radians^2 over true-positive frames; pi^2 when there are none
  std::size_t n_accepted = 0;
  std::size_t n_frames = 0;
  std::size_t n_true_positive = 0;
  std::size_t n_false_positive = 0;
  std::size_t n_false_negative = 0;
  bool no_speech_windows = true;  ///< set when nothing was accepted
};

struct PipelineOptions {
  ClassifierOptions classifier{};
  /// Linear correlation: the padded transforms have 5-smooth lengths, circular ones would not.
  GccOptions gcc{.zero_pad = true};
  ModulationFilterbank bank = ModulationFilterbank::standard();
  /// Defaults to HeadModel::max_lag_samples(sample_rate).
  std::optional<std::size_t> max_lag;
};

/// Classifier value of one frame. `prev` is empty for the first frame of a stream.
[[nodiscard]] double classifier_value(ClassifierKind kind, std::span<const double> mono,
                                      std::span<const double> prev_mono, double sample_rate,
                                      const PipelineOptions& options);

/// Threshold-independent per-frame analysis of one recording. Classifier values are computed
/// eagerly; correlation results lazily, only for frames someone asks about. Not thread-safe.
class FrameAnalysis {
 public:
  FrameAnalysis(const AnnotatedRecording& recording, ClassifierKind classifier, WeightingKind timing,
                const FramingParams& framing, const HeadModel& model, PipelineOptions options = {});

  [[nodiscard]] std::size_t frame_count() const noexcept { return starts_.size(); }
  [[nodiscard]] double frame_start_s(std::size_t i) const;
  [[nodiscard]] double frame_size_s() const noexcept { return frame_size_s_; }
  [[nodiscard]] double classifier_value(std::size_t i) const { return values_[i]; }
  /// nullopt when the frame is silent on a channel.
  [[nodiscard]] const std::optional<TdeResult>& tde(std::size_t i);

  /// Estimates under the given thresholds. emit_time_s is frame end plus measured processing.
  [[nodiscard]] std::vector<DoaEstimate> estimates(const Thresholds& thresholds);

 private:
  const AnnotatedRecording* recording_;
  WeightingKind timing_;
  HeadModel model_;
  PipelineOptions options_;
  double frame_size_s_;
  std::size_t frame_samples_;
  std::size_t max_lag_;
  std::vector<std::size_t> starts_;
  std::vector<double> values_;
  std::vector<double> classify_seconds_;
  std::vector<std::optional<TdeResult>> tde_;
  std::vector<double> tde_seconds_;
  std::vector<bool> tde_done_;
};

[[nodiscard]] std::vector<DoaEstimate> run_pipeline(const AnnotatedRecording& recording,
                                                    const PipelineParams& params,
                                                    const HeadModel& model,
                                                    const PipelineOptions& options = {});

/// True iff at least half of [start, start + size] overlaps annotated speech.
[[nodiscard]] bool ground_truth_label(double frame_start_s, double frame_size_s,
                                      const AnnotatedRecording& recording);

/// Per-frame F1 of accepted-vs-annotated speech and MSE (rad^2) on true-positive frames against
/// the angle track at frame center.
[[nodiscard]] Metrics evaluate(std::span<const DoaEstimate> estimates,
                               const AnnotatedRecording& recording);

/// Single-consumer real-time session: samples are pushed in arrival order and estimates are
/// emitted as soon as a frame is complete.
class StreamingSession {
 public:
  StreamingSession(const PipelineParams& params, const HeadModel& model, double sample_rate,
                   PipelineOptions options = {});

  /// Appends a chunk that arrived at `arrival_time_s` (the time its last sample was captured)
  /// and returns every estimate completed by it.
  std::vector<DoaEstimate> push(std::span<const double> left, std::span<const double> right,
                                double arrival_time_s);

 private:
  PipelineParams params_;
  HeadModel model_;
  double sample_rate_;
  PipelineOptions options_;
  std::size_t frame_samples_;
  std::size_t hop_samples_;
  std::size_t max_lag_;
  std::vector<double> left_;
  std::vector<double> right_;
  std::size_t buffer_origin_ = 0;  ///< absolute index of left_[0]
  std::size_t next_start_ = 0;
  std::optional<std::size_t> prev_start_;
  double busy_until_s_ = 0.0;
};

struct LatencyStats {
  double frame_size_s = 0.0;
  double mean_s = 0.0;
  double std_s = 0.0;  ///< sample standard deviation
  std::vector<double> latencies_s;
  std::size_t events = 0;
  std::size_t dropped = 0;  ///< onsets with no accepted estimate before the next onset
};

/// Streams each recording in `chunk_s` blocks n_repeats times. Latency of an onset is the
/// emission time of the first accepted estimate whose frame starts at or after the onset (and
/// before the next onset) minus the onset time.
[[nodiscard]] LatencyStats latency_experiment(std::span<const AnnotatedRecording> recordings,
                                              const PipelineParams& params, const HeadModel& model,
                                              std::size_t n_repeats,
                                              const PipelineOptions& options = {},
                                              double chunk_s = 0.01);

}  // namespace doalab
