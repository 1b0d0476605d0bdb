#pragma once

// Time-delay estimation between two channels.
//
// Sign convention used throughout the library: a positive lag means the LEFT channel leads,
// i.e. right[n] ~= left[n - lag]. Correlograms are indexed in the same orientation, so the value
// at lag l is sum_n left[n] * right[n + l].

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "doalab/signal.hpp"

namespace doalab {

enum class WeightingKind { PlainCC, Phat, Scot };

[[nodiscard]] std::string_view to_string(WeightingKind kind);
/// Accepts "cc"/"cross-corr"/"plaincc", "phat"/"gcc-phat", "scot"/"gcc-scot".
[[nodiscard]] WeightingKind parse_weighting(std::string_view name);

struct CrossCorrelogram {
  std::vector<double> values;  ///< values[i] is the lag `i - max_lag`
  std::size_t max_lag = 0;
  double sample_rate = kDefaultSampleRate;

  [[nodiscard]] double at(long lag) const { return values[static_cast<std::size_t>(lag + static_cast<long>(max_lag))]; }
  [[nodiscard]] long lag_of(std::size_t index) const {
    return static_cast<long>(index) - static_cast<long>(max_lag);
  }
};

struct TdeResult {
  long lag_samples = 0;
  double lag_seconds = 0.0;
  double peak_value = 0.0;
  double prominence = 0.0;  ///< +infinity when no competing local maximum exists
};

struct GccOptions {
  /// Divisions in PHAT/SCOT are guarded by this fraction of the largest spectral magnitude.
  double relative_epsilon = 1e-12;
  /// Zero-pad to at least twice the frame length, turning circular into linear correlation.
  bool zero_pad = false;
  /// Half-width (bins) of the moving average applied to the auto-spectra before SCOT weighting,
  /// counted on the unpadded frame's bin grid. With 0 the single-frame SCOT weight equals |G_xy|
  /// and SCOT collapses onto PHAT.
  std::size_t scot_smoothing_bins = 8;
};

struct GccOutput {
  CrossCorrelogram correlogram;
  TdeResult result;
};

/// Element-wise X[f] * conj(Y[f]).
[[nodiscard]] std::vector<std::complex<double>> cross_power_spectrum(const Spectrum& x,
                                                                     const Spectrum& y);

/// Applies the generalized weighting psi(f) to a cross-power spectrum. `epsilon` is absolute.
[[nodiscard]] std::vector<std::complex<double>> apply_weighting(
    std::span<const std::complex<double>> g_xy, std::span<const double> g_xx,
    std::span<const double> g_yy, WeightingKind kind, double epsilon);

/// Generalized cross-correlation of two equal-length frames. The returned correlogram covers
/// every distinct circular lag; the argmax is searched within [-max_lag, +max_lag] (ties go to the
/// smallest |lag|, then the positive one) and the prominence is that of the whole correlogram.
/// Throws SilentFrame when either channel has no energy.
[[nodiscard]] GccOutput gcc(const MonoSignal& left, const MonoSignal& right, WeightingKind kind,
                            std::size_t max_lag, const GccOptions& options = {});
[[nodiscard]] GccOutput gcc(std::span<const double> left, std::span<const double> right,
                            double sample_rate, WeightingKind kind, std::size_t max_lag,
                            const GccOptions& options = {});

/// Direct sliding dot product, linear (non-circular) sums. Oracle for gcc with PlainCC.
[[nodiscard]] CrossCorrelogram time_domain_xcorr(const MonoSignal& left, const MonoSignal& right,
                                                 std::size_t max_lag);

/// Global maximum divided by the largest interior local maximum at least 2 lags away from it.
[[nodiscard]] double peak_prominence(const CrossCorrelogram& correlogram);

/// Argmax lag with the tie rule above, plus prominence.
[[nodiscard]] TdeResult pick_peak(const CrossCorrelogram& correlogram);

}  // namespace doalab
