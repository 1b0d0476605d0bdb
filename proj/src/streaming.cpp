#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "doalab/errors.hpp"
#include "doalab/pipeline.hpp"
#include "doalab/stats.hpp"

namespace doalab {

StreamingSession::StreamingSession(const PipelineParams& params, const HeadModel& model,
                                   double sample_rate, PipelineOptions options)
    : params_(params), model_(model), sample_rate_(sample_rate), options_(std::move(options)) {
  params_.validate();
  if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
  frame_samples_ = params_.framing.frame_samples(sample_rate);
  hop_samples_ = params_.framing.hop_samples(sample_rate);
  max_lag_ = options_.max_lag.value_or(model_.max_lag_samples(sample_rate));
  if (frame_samples_ < 2 || max_lag_ >= frame_samples_) {
    throw InvalidArgument("frame too short for the feasible lag range");
  }
}

std::vector<DoaEstimate> StreamingSession::push(std::span<const double> left,
                                                std::span<const double> right,
                                                double arrival_time_s) {
  if (left.size() != right.size()) throw InvalidArgument("stream chunk channels differ in length");
  left_.insert(left_.end(), left.begin(), left.end());
  right_.insert(right_.end(), right.begin(), right.end());

  std::vector<DoaEstimate> out;
  const double frame_size_s = static_cast<double>(frame_samples_) / sample_rate_;
  while (next_start_ + frame_samples_ <= buffer_origin_ + left_.size()) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t off = next_start_ - buffer_origin_;
    std::vector<double> mono(frame_samples_);
    for (std::size_t j = 0; j < frame_samples_; ++j) mono[j] = 0.5 * (left_[off + j] + right_[off + j]);
    std::vector<double> prev_mono;
    if (prev_start_) {
      const std::size_t poff = *prev_start_ - buffer_origin_;
      prev_mono.resize(frame_samples_);
      for (std::size_t j = 0; j < frame_samples_; ++j) {
        prev_mono[j] = 0.5 * (left_[poff + j] + right_[poff + j]);
      }
    }

    DoaEstimate e;
    e.frame_start_s = static_cast<double>(next_start_) / sample_rate_;
    e.frame_size_s = frame_size_s;
    e.classifier_value = classifier_value(params_.classifier, mono, prev_mono, sample_rate_, options_);
    e.lag_seconds = std::numeric_limits<double>::quiet_NaN();
    e.prominence = std::numeric_limits<double>::quiet_NaN();
    if (classify(e.classifier_value, params_.thresholds)) {
      try {
        const auto r = gcc(std::span<const double>(left_).subspan(off, frame_samples_),
                           std::span<const double>(right_).subspan(off, frame_samples_),
                           sample_rate_, params_.timing, max_lag_, options_.gcc)
                           .result;
        e.accepted = true;
        e.lag_seconds = r.lag_seconds;
        e.prominence = r.prominence;
        e.angle = angle_from_itd(r.lag_seconds, model_).angle;
      } catch (const SilentFrame&) {
      }
    }
    const double processing =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Frames are handled one at a time; a frame cannot start before its last sample arrived or
    // before the previous frame finished.
    busy_until_s_ = std::max(arrival_time_s, busy_until_s_) + processing;
    e.emit_time_s = busy_until_s_;
    out.push_back(e);

    prev_start_ = next_start_;
    next_start_ += hop_samples_;
  }

  const std::size_t keep_from = prev_start_ ? std::min(*prev_start_, next_start_) : next_start_;
  if (keep_from > buffer_origin_) {
    const std::size_t drop = std::min(keep_from - buffer_origin_, left_.size());
    left_.erase(left_.begin(), left_.begin() + static_cast<std::ptrdiff_t>(drop));
    right_.erase(right_.begin(), right_.begin() + static_cast<std::ptrdiff_t>(drop));
    buffer_origin_ += drop;
  }
  return out;
}

LatencyStats latency_experiment(std::span<const AnnotatedRecording> recordings,
                                const PipelineParams& params, const HeadModel& model,
                                std::size_t n_repeats, const PipelineOptions& options,
                                double chunk_s) {
  if (n_repeats == 0) throw InvalidArgument("latency_experiment: n_repeats must be >= 1");
  if (!(chunk_s > 0.0)) throw InvalidArgument("latency_experiment: chunk must be positive");

  LatencyStats stats;
  stats.frame_size_s = params.framing.frame_size_s;
  std::size_t onsets = 0;
  for (const auto& rec : recordings) onsets += rec.speech_intervals.size();
  if (onsets == 0) throw InvalidArgument("latency_experiment: no speech onsets");

  for (std::size_t rep = 0; rep < n_repeats; ++rep) {
    for (const auto& rec : recordings) {
      const double fs = rec.audio.sample_rate();
      const auto chunk = static_cast<std::size_t>(std::max(1L, std::lround(chunk_s * fs)));
      StreamingSession session(params, model, fs, options);
      std::vector<DoaEstimate> estimates;
      const auto left = rec.audio.left().samples();
      const auto right = rec.audio.right().samples();
      for (std::size_t pos = 0; pos < left.size(); pos += chunk) {
        const std::size_t n = std::min(chunk, left.size() - pos);
        const double arrival = static_cast<double>(pos + n) / fs;
        auto emitted = session.push(left.subspan(pos, n), right.subspan(pos, n), arrival);
        estimates.insert(estimates.end(), emitted.begin(), emitted.end());
      }

      for (std::size_t k = 0; k < rec.speech_intervals.size(); ++k) {
        const double onset = rec.speech_intervals[k].start_s;
        const double limit = k + 1 < rec.speech_intervals.size()
                                 ? rec.speech_intervals[k + 1].start_s
                                 : rec.audio.duration_s();
        ++stats.events;
        const auto hit = std::find_if(estimates.begin(), estimates.end(), [&](const DoaEstimate& e) {
          return e.accepted && e.frame_start_s >= onset - 1e-12 && e.frame_start_s < limit;
        });
        if (hit == estimates.end()) {
          ++stats.dropped;
        } else {
          stats.latencies_s.push_back(hit->emit_time_s - onset);
        }
      }
    }
  }
  if (!stats.latencies_s.empty()) {
    stats.mean_s = mean(stats.latencies_s);
    stats.std_s = stats.latencies_s.size() > 1 ? sample_stddev(stats.latencies_s) : 0.0;
  }
  return stats;
}

}  // namespace doalab
