#include "doalab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "doalab/errors.hpp"

namespace doalab {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

PipelineParams PipelineParams::best() {
  return PipelineParams{ClassifierKind::Srmr, WeightingKind::Phat, FramingParams{0.34, 0.90},
                        Thresholds{1.5, 7.0}};
}

void PipelineParams::validate() const {
  framing.validate();
  Thresholds(thresholds.delta_low(), thresholds.delta_high());
}

std::strong_ordering compare(const PipelineParams& a, const PipelineParams& b) {
  if (auto c = a.classifier <=> b.classifier; c != 0) return c;
  if (auto c = a.timing <=> b.timing; c != 0) return c;
  auto real = [](double x, double y) {
    return x < y ? std::strong_ordering::less
                 : (y < x ? std::strong_ordering::greater : std::strong_ordering::equal);
  };
  if (auto c = real(a.framing.frame_size_s, b.framing.frame_size_s); c != 0) return c;
  if (auto c = real(a.framing.step_fraction, b.framing.step_fraction); c != 0) return c;
  if (auto c = real(a.thresholds.delta_low(), b.thresholds.delta_low()); c != 0) return c;
  return real(a.thresholds.delta_high(), b.thresholds.delta_high());
}

void AnnotatedRecording::validate() const {
  if (weight < 1) throw InvalidArgument("recording weight must be >= 1");
  for (std::size_t i = 0; i < speech_intervals.size(); ++i) {
    const auto& iv = speech_intervals[i];
    if (!(iv.end_s > iv.start_s)) throw InvalidArgument("speech interval with end <= start");
    if (i > 0 && iv.start_s < speech_intervals[i - 1].end_s) {
      throw InvalidArgument("speech intervals must be sorted and non-overlapping");
    }
  }
  for (std::size_t i = 1; i < angle_track.size(); ++i) {
    if (!(angle_track[i].t_s > angle_track[i - 1].t_s)) {
      throw InvalidArgument("angle track times must be increasing");
    }
  }
}

double AnnotatedRecording::angle_at(double t_s) const {
  if (angle_track.empty()) throw InvalidArgument("recording has no angle track");
  if (t_s <= angle_track.front().t_s) return angle_track.front().theta_rad;
  if (t_s >= angle_track.back().t_s) return angle_track.back().theta_rad;
  const auto it = std::upper_bound(angle_track.begin(), angle_track.end(), t_s,
                                   [](double t, const AngleKnot& k) { return t < k.t_s; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t_s - lo.t_s) / (hi.t_s - lo.t_s);
  return lo.theta_rad + w * (hi.theta_rad - lo.theta_rad);
}

double AnnotatedRecording::speech_overlap(double a_s, double b_s) const {
  double total = 0.0;
  for (const auto& iv : speech_intervals) {
    total += std::max(0.0, std::min(b_s, iv.end_s) - std::max(a_s, iv.start_s));
  }
  return total;
}

double classifier_value(ClassifierKind kind, std::span<const double> mono,
                        std::span<const double> prev_mono, double sample_rate,
                        const PipelineOptions& options) {
  switch (kind) {
    case ClassifierKind::PowerOnset:
      if (prev_mono.empty()) return kNaN;  // no predecessor: non-speech by convention
      return power_onset_ratio(mono, prev_mono, options.classifier);
    case ClassifierKind::Srmr:
      return srmr(mono, sample_rate, options.bank, options.classifier).ratio;
  }
  return kNaN;
}

FrameAnalysis::FrameAnalysis(const AnnotatedRecording& recording, ClassifierKind classifier,
                             WeightingKind timing, const FramingParams& framing,
                             const HeadModel& model, PipelineOptions options)
    : recording_(&recording), timing_(timing), model_(model), options_(std::move(options)) {
  const double fs = recording.audio.sample_rate();
  frame_samples_ = framing.frame_samples(fs);
  frame_size_s_ = static_cast<double>(frame_samples_) / fs;
  max_lag_ = options_.max_lag.value_or(model_.max_lag_samples(fs));
  starts_ = frame_starts(recording.audio.size(), fs, framing);
  if (!starts_.empty() && max_lag_ >= frame_samples_) {
    throw InvalidArgument("frame too short for the feasible lag range");
  }

  const auto left = recording.audio.left().samples();
  const auto right = recording.audio.right().samples();
  std::vector<double> mono(left.size());
  for (std::size_t i = 0; i < mono.size(); ++i) mono[i] = 0.5 * (left[i] + right[i]);

  values_.resize(starts_.size());
  classify_seconds_.resize(starts_.size());
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    const auto t0 = Clock::now();
    const std::span<const double> frame(mono.data() + starts_[i], frame_samples_);
    std::span<const double> prev;
    if (i > 0) prev = std::span<const double>(mono.data() + starts_[i - 1], frame_samples_);
    values_[i] = doalab::classifier_value(classifier, frame, prev, fs, options_);
    classify_seconds_[i] = seconds_since(t0);
  }
  tde_.resize(starts_.size());
  tde_seconds_.assign(starts_.size(), 0.0);
  tde_done_.assign(starts_.size(), false);
}

double FrameAnalysis::frame_start_s(std::size_t i) const {
  return static_cast<double>(starts_[i]) / recording_->audio.sample_rate();
}

const std::optional<TdeResult>& FrameAnalysis::tde(std::size_t i) {
  if (!tde_done_[i]) {
    const auto t0 = Clock::now();
    const auto left = recording_->audio.left().samples().subspan(starts_[i], frame_samples_);
    const auto right = recording_->audio.right().samples().subspan(starts_[i], frame_samples_);
    try {
      tde_[i] = gcc(left, right, recording_->audio.sample_rate(), timing_, max_lag_, options_.gcc).result;
    } catch (const SilentFrame&) {
      tde_[i].reset();
    }
    tde_seconds_[i] = seconds_since(t0);
    tde_done_[i] = true;
  }
  return tde_[i];
}

std::vector<DoaEstimate> FrameAnalysis::estimates(const Thresholds& thresholds) {
  std::vector<DoaEstimate> out;
  out.reserve(starts_.size());
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    DoaEstimate e;
    e.frame_start_s = frame_start_s(i);
    e.frame_size_s = frame_size_s_;
    e.classifier_value = values_[i];
    e.lag_seconds = kNaN;
    e.prominence = kNaN;
    if (classify(values_[i], thresholds)) {
      if (const auto& r = tde(i)) {
        e.accepted = true;
        e.lag_seconds = r->lag_seconds;
        e.prominence = r->prominence;
        e.angle = angle_from_itd(r->lag_seconds, model_).angle;
      }
    }
    e.emit_time_s = e.frame_start_s + frame_size_s_ + classify_seconds_[i] + tde_seconds_[i];
    out.push_back(e);
  }
  return out;
}

std::vector<DoaEstimate> run_pipeline(const AnnotatedRecording& recording,
                                      const PipelineParams& params, const HeadModel& model,
                                      const PipelineOptions& options) {
  params.validate();
  FrameAnalysis analysis(recording, params.classifier, params.timing, params.framing, model, options);
  return analysis.estimates(params.thresholds);
}

bool ground_truth_label(double frame_start_s, double frame_size_s, const AnnotatedRecording& recording) {
  const double overlap = recording.speech_overlap(frame_start_s, frame_start_s + frame_size_s);
  return overlap >= 0.5 * frame_size_s;
}

Metrics evaluate(std::span<const DoaEstimate> estimates, const AnnotatedRecording& recording) {
  Metrics m;
  m.n_frames = estimates.size();
  double sq_err = 0.0;
  for (const auto& e : estimates) {
    const bool truth = ground_truth_label(e.frame_start_s, e.frame_size_s, recording);
    if (e.accepted) {
      ++m.n_accepted;
      if (truth) {
        ++m.n_true_positive;
        const double center = e.frame_start_s + 0.5 * e.frame_size_s;
        const double err = e.angle->value() - recording.angle_at(center);
        sq_err += err * err;
      } else {
        ++m.n_false_positive;
      }
    } else if (truth) {
      ++m.n_false_negative;
    }
  }
  m.no_speech_windows = m.n_accepted == 0;
  const double tp = static_cast<double>(m.n_true_positive);
  if (m.n_true_positive > 0) {
    const double precision = tp / static_cast<double>(m.n_true_positive + m.n_false_positive);
    const double recall = tp / static_cast<double>(m.n_true_positive + m.n_false_negative);
    m.f1 = 2.0 * precision * recall / (precision + recall);
    m.mse = sq_err / tp;
  } else {
    m.f1 = 0.0;
    m.mse = std::numbers::pi * std::numbers::pi;
  }
  return m;
}

}  // namespace doalab
