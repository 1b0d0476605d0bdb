#include "doalab/signal.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "doalab/errors.hpp"
#include "fft_backend.hpp"

namespace doalab {

MonoSignal::MonoSignal(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw InvalidArgument("sample_rate must be positive, got " + std::to_string(sample_rate_));
  }
  for (double s : samples_) {
    if (!std::isfinite(s)) throw InvalidArgument("signal contains non-finite samples");
  }
}

MonoSignal MonoSignal::slice(std::size_t begin, std::size_t count) const {
  if (begin > samples_.size() || count > samples_.size() - begin) {
    throw InvalidArgument("slice out of range");
  }
  const auto first = samples_.begin() + static_cast<std::ptrdiff_t>(begin);
  return MonoSignal(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count)),
                    sample_rate_);
}

StereoSignal::StereoSignal(MonoSignal left, MonoSignal right)
    : left_(std::move(left)), right_(std::move(right)) {
  if (left_.sample_rate() != right_.sample_rate()) {
    throw InvalidArgument("stereo channels have different sample rates");
  }
  if (left_.size() != right_.size()) {
    throw InvalidArgument("stereo channels have different lengths");
  }
}

MonoSignal StereoSignal::mono_mix() const {
  std::vector<double> mix(size());
  const auto l = left_.samples();
  const auto r = right_.samples();
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.5 * (l[i] + r[i]);
  return MonoSignal(std::move(mix), sample_rate());
}

void FramingParams::validate() const {
  if (!(frame_size_s > 0.0) || !std::isfinite(frame_size_s)) {
    throw InvalidArgument("frame_size_s must be positive");
  }
  if (!(step_fraction > 0.0 && step_fraction <= 1.0)) {
    throw InvalidArgument("step_fraction must lie in (0, 1]");
  }
}

std::size_t FramingParams::frame_samples(double sample_rate) const {
  return static_cast<std::size_t>(std::llround(frame_size_s * sample_rate));
}

std::size_t FramingParams::hop_samples(double sample_rate) const {
  const auto hop = std::llround(hop_s() * sample_rate);
  return static_cast<std::size_t>(std::max<long long>(hop, 1));
}

std::vector<std::size_t> frame_starts(std::size_t signal_length, double sample_rate,
                                      const FramingParams& params) {
  params.validate();
  const std::size_t n = params.frame_samples(sample_rate);
  if (n < 2) throw InvalidArgument("frame must span at least 2 samples");
  const std::size_t hop = params.hop_samples(sample_rate);
  std::vector<std::size_t> starts;
  if (signal_length < n) return starts;
  starts.reserve((signal_length - n) / hop + 1);
  for (std::size_t s = 0; s + n <= signal_length; s += hop) starts.push_back(s);
  return starts;
}

std::vector<Frame> frame_stream(const MonoSignal& signal, const FramingParams& params) {
  const double fs = signal.sample_rate();
  const std::size_t n = params.frame_samples(fs);
  std::vector<Frame> frames;
  for (std::size_t start : frame_starts(signal.size(), fs, params)) {
    frames.push_back(Frame{static_cast<double>(start) / fs, start, signal.slice(start, n)});
  }
  return frames;
}

Spectrum forward_transform(const MonoSignal& frame) {
  if (frame.empty()) throw InvalidArgument("forward_transform: empty frame");
  const auto x = frame.samples();
  std::vector<std::complex<double>> in(x.begin(), x.end());
  Spectrum spec{std::vector<std::complex<double>>(in.size()), frame.sample_rate(), in.size()};
  detail::fft(in, spec.bins);
  return spec;
}

MonoSignal inverse_transform(const Spectrum& spectrum) {
  if (spectrum.bins.empty()) throw InvalidArgument("inverse_transform: empty spectrum");
  std::vector<std::complex<double>> out(spectrum.bins.size());
  detail::ifft(spectrum.bins, out);
  const double scale = 1.0 / static_cast<double>(out.size());
  std::vector<double> samples(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) samples[i] = out[i].real() * scale;
  return MonoSignal(std::move(samples), spectrum.sample_rate);
}

std::vector<double> analytic_envelope(std::span<const double> frame) {
  return analytic_envelope(frame, frame.size());
}

std::vector<double> analytic_envelope(std::span<const double> frame, std::size_t transform_length) {
  if (frame.size() < 8) throw InvalidArgument("analytic_envelope: frame needs at least 8 samples");
  if (transform_length < frame.size()) throw InvalidArgument("analytic_envelope: transform shorter than frame");
  const std::size_t n = transform_length;

  std::vector<std::complex<double>> half(n / 2 + 1);
  if (n == frame.size()) {
    detail::rfft(frame, half);
  } else {
    std::vector<double> padded(n, 0.0);
    std::copy(frame.begin(), frame.end(), padded.begin());
    detail::rfft(padded, half);
  }

  // One-sided spectrum: keep DC (and Nyquist for even n), double the positive frequencies.
  std::vector<std::complex<double>> analytic(n, {0.0, 0.0});
  analytic[0] = half[0];
  const std::size_t positive_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) analytic[k] = 2.0 * half[k];
  if (n % 2 == 0) analytic[n / 2] = half[n / 2];

  std::vector<std::complex<double>> time(n);
  detail::ifft(analytic, time);
  std::vector<double> env(frame.size());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < env.size(); ++i) env[i] = std::sqrt(std::norm(time[i])) * scale;
  return env;
}

std::size_t fast_transform_length(std::size_t n) { return detail::fast_length(n); }

MonoSignal analytic_envelope(const MonoSignal& frame) {
  return MonoSignal(analytic_envelope(frame.samples()), frame.sample_rate());
}

double frame_power(std::span<const double> frame) {
  if (frame.empty()) throw InvalidArgument("frame_power: empty frame");
  const double sum = std::transform_reduce(frame.begin(), frame.end(), 0.0, std::plus<>(),
                                           [](double v) { return v * v; });
  return sum / static_cast<double>(frame.size());
}

double frame_power(const MonoSignal& frame) { return frame_power(frame.samples()); }

}  // namespace doalab
