#include "doalab/frame_classify.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "doalab/errors.hpp"
#include "fft_backend.hpp"

namespace doalab {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::PowerOnset: return "po";
    case ClassifierKind::Srmr: return "srmr";
  }
  return "?";
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "po" || name == "power_onset" || name == "power-onset") return ClassifierKind::PowerOnset;
  if (name == "srmr") return ClassifierKind::Srmr;
  throw InvalidArgument("unknown classifier '" + std::string(name) + "'");
}

Thresholds::Thresholds(double delta_low, double delta_high) : low_(delta_low), high_(delta_high) {
  if (!(low_ > 0.0 && low_ < high_) || !std::isfinite(high_)) {
    throw InvalidArgument("thresholds must satisfy 0 < delta_low < delta_high");
  }
}

ModulationFilterbank ModulationFilterbank::standard() {
  return from_centers({4.0, 6.5, 10.7, 17.6, 28.9, 47.5, 78.1, 128.0});
}

ModulationFilterbank ModulationFilterbank::from_centers(const std::array<double, 8>& centers) {
  ModulationFilterbank bank;
  bank.band_centers_hz = centers;
  for (std::size_t j = 0; j + 1 < centers.size(); ++j) {
    if (!(centers[j] > 0.0 && centers[j + 1] > centers[j])) {
      throw InvalidArgument("filterbank centers must be positive and strictly increasing");
    }
    bank.band_edges_hz[j + 1] = std::sqrt(centers[j] * centers[j + 1]);
  }
  bank.band_edges_hz[0] = centers[0] * centers[0] / bank.band_edges_hz[1];
  bank.band_edges_hz[8] = centers[7] * centers[7] / bank.band_edges_hz[7];
  return bank;
}

std::array<double, 8> ModulationFilterbank::band_energies(std::span<const double> envelope, double sample_rate,
                                                          std::size_t transform_length) const {
  const std::size_t n = std::max(transform_length, envelope.size());
  std::vector<std::complex<double>> spec(n / 2 + 1);
  if (n == envelope.size()) {
    detail::rfft(envelope, spec);
  } else {
    std::vector<double> padded(n, 0.0);
    std::copy(envelope.begin(), envelope.end(), padded.begin());
    detail::rfft(padded, spec);
  }
  std::array<double, 8> e{};
  const double df = sample_rate / static_cast<double>(n);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= band_edges_hz[8]) break;
    if (f < band_edges_hz[0]) continue;
    std::size_t j = 0;
    while (j < 7 && f >= band_edges_hz[j + 1]) ++j;
    e[j] += std::norm(spec[k]);
  }
  return e;
}

double power_onset_ratio(std::span<const double> frame, std::span<const double> prev,
                         const ClassifierOptions& options) {
  if (frame.size() != prev.size() || frame.empty()) {
    throw InvalidArgument("power_onset_ratio: frames must be non-empty and equally long");
  }
  if (!(options.floor_eps > 0.0)) throw InvalidArgument("power_onset_ratio: floor_eps must be positive");
  if (options.whole_frame_power_ratio) {
    return frame_power(frame) / std::max(frame_power(prev), options.floor_eps);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < frame.size(); ++j) {
    acc += frame[j] * frame[j] / std::max(prev[j] * prev[j], options.floor_eps);
  }
  return acc / static_cast<double>(frame.size());
}

double power_onset_ratio(const MonoSignal& frame, const MonoSignal& prev,
                         const ClassifierOptions& options) {
  return power_onset_ratio(frame.samples(), prev.samples(), options);
}

SrmrValue srmr(std::span<const double> frame, double sample_rate, const ModulationFilterbank& bank,
               const ClassifierOptions& options) {
  const std::size_t n = options.srmr_fast_transforms ? fast_transform_length(frame.size()) : frame.size();
  std::vector<double> env = analytic_envelope(frame, n);
  const double mean = std::accumulate(env.begin(), env.end(), 0.0) / static_cast<double>(env.size());
  for (double& v : env) v -= mean;

  const auto e = bank.band_energies(env, sample_rate, n);
  const double speech = e[0] + e[1] + e[2] + e[3];
  const std::size_t first_reverb = options.srmr_overlapping_band ? 3 : 4;
  double reverb = 0.0;
  for (std::size_t j = first_reverb; j < 8; ++j) reverb += e[j];

  SrmrValue out;
  out.ratio = (speech + options.floor_eps) / (reverb + options.floor_eps);
  const double duration = static_cast<double>(frame.size()) / sample_rate;
  out.low_confidence = duration < 1.0 / bank.band_centers_hz[0];
  return out;
}

SrmrValue srmr(const MonoSignal& frame, const ModulationFilterbank& bank,
               const ClassifierOptions& options) {
  return srmr(frame.samples(), frame.sample_rate(), bank, options);
}

bool classify(double value, const Thresholds& thresholds) noexcept {
  return value > thresholds.delta_low() && value < thresholds.delta_high();
}

}  // namespace doalab
