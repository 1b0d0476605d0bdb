#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace doalab {

inline constexpr double kDefaultSampleRate = 16000.0;

/// A single channel of real samples at a fixed rate. Immutable after construction.
class MonoSignal {
 public:
  MonoSignal() = default;
  /// Throws InvalidArgument if `sample_rate <= 0` or any sample is non-finite.
  MonoSignal(std::vector<double> samples, double sample_rate);

  [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
  [[nodiscard]] double sample_rate() const noexcept { return sample_rate_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return samples_[i]; }

  /// Copy of samples [begin, begin + count).
  [[nodiscard]] MonoSignal slice(std::size_t begin, std::size_t count) const;

 private:
  std::vector<double> samples_;
  double sample_rate_ = kDefaultSampleRate;
};

/// Two synchronized channels with a common rate and equal length.
class StereoSignal {
 public:
  StereoSignal() = default;
  StereoSignal(MonoSignal left, MonoSignal right);

  [[nodiscard]] const MonoSignal& left() const noexcept { return left_; }
  [[nodiscard]] const MonoSignal& right() const noexcept { return right_; }
  [[nodiscard]] double sample_rate() const noexcept { return left_.sample_rate(); }
  [[nodiscard]] std::size_t size() const noexcept { return left_.size(); }
  [[nodiscard]] double duration_s() const noexcept { return left_.duration_s(); }

  /// Mean of the two channels.
  [[nodiscard]] MonoSignal mono_mix() const;
  [[nodiscard]] StereoSignal swapped() const { return StereoSignal(right_, left_); }

 private:
  MonoSignal left_;
  MonoSignal right_;
};

/// Full complex transform of a real frame.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  double sample_rate = kDefaultSampleRate;
  std::size_t length = 0;
};

struct FramingParams {
  double frame_size_s = 0.34;
  double step_fraction = 0.9;

  /// Throws InvalidArgument unless frame_size_s > 0 and step_fraction in (0, 1].
  void validate() const;
  [[nodiscard]] double hop_s() const noexcept { return frame_size_s * step_fraction; }
  [[nodiscard]] std::size_t frame_samples(double sample_rate) const;
  [[nodiscard]] std::size_t hop_samples(double sample_rate) const;
};

struct Frame {
  double start_time_s = 0.0;
  std::size_t start_sample = 0;
  MonoSignal samples;
};

/// Positions (first sample index) of every complete frame; no partial trailing frame.
[[nodiscard]] std::vector<std::size_t> frame_starts(std::size_t signal_length, double sample_rate,
                                                    const FramingParams& params);

/// Tiles `signal` into frames starting at 0, hop, 2*hop, ... Empty if the signal is shorter than
/// one frame.
[[nodiscard]] std::vector<Frame> frame_stream(const MonoSignal& signal, const FramingParams& params);

[[nodiscard]] Spectrum forward_transform(const MonoSignal& frame);
/// Real part of the inverse transform, normalized so inverse(forward(x)) == x.
[[nodiscard]] MonoSignal inverse_transform(const Spectrum& spectrum);

/// Magnitude of the analytic signal (FFT-based Hilbert transform). Requires >= 8 samples.
[[nodiscard]] MonoSignal analytic_envelope(const MonoSignal& frame);
[[nodiscard]] std::vector<double> analytic_envelope(std::span<const double> frame);
/// Same, with the transform zero-padded to `transform_length` (at least the frame length) and the
/// envelope cut back to the frame length.
[[nodiscard]] std::vector<double> analytic_envelope(std::span<const double> frame, std::size_t transform_length);

/// Smallest 2^a 3^b 5^c that is >= n. Transforms of such lengths avoid FFTW's slow paths for
/// large prime factors, which continuous frame sizes hit constantly.
[[nodiscard]] std::size_t fast_transform_length(std::size_t n);

/// Mean squared sample value.
[[nodiscard]] double frame_power(const MonoSignal& frame);
[[nodiscard]] double frame_power(std::span<const double> frame);

}  // namespace doalab
