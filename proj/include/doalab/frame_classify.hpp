#pragma once

// Per-frame speech/direct-path classification: power-onset ratio and a lightweight
// speech-to-reverberation modulation ratio (SRMR), both thresholded between delta_low and
// delta_high.

#include <array>
#include <span>
#include <string_view>

#include "doalab/signal.hpp"

namespace doalab {

enum class ClassifierKind { PowerOnset, Srmr };

[[nodiscard]] std::string_view to_string(ClassifierKind kind);
/// Accepts "po"/"power_onset"/"power-onset" and "srmr".
[[nodiscard]] ClassifierKind parse_classifier(std::string_view name);

class Thresholds {
 public:
  Thresholds() = default;
  /// Throws InvalidArgument unless 0 < delta_low < delta_high.
  Thresholds(double delta_low, double delta_high);

  [[nodiscard]] double delta_low() const noexcept { return low_; }
  [[nodiscard]] double delta_high() const noexcept { return high_; }

 private:
  double low_ = 1.5;
  double high_ = 7.0;
};

/// Eight log-spaced modulation bands, edges at the geometric midpoints of neighbouring centers.
struct ModulationFilterbank {
  std::array<double, 8> band_centers_hz{};
  std::array<double, 9> band_edges_hz{};

  /// Centers 4, 6.5, 10.7, 17.6, 28.9, 47.5, 78.1, 128 Hz.
  static ModulationFilterbank standard();
  static ModulationFilterbank from_centers(const std::array<double, 8>& centers);

  /// Summed squared spectral magnitude of `envelope` in each band (rectangular summation). A
  /// `transform_length` above the envelope length zero-pads the transform.
  [[nodiscard]] std::array<double, 8> band_energies(std::span<const double> envelope, double sample_rate,
                                                    std::size_t transform_length = 0) const;
};

struct ClassifierOptions {
  double floor_eps = 1e-10;
  /// Power onset: false = mean of per-sample ratios (verbatim), true = ratio of frame powers.
  bool whole_frame_power_ratio = false;
  /// SRMR: true sums bands 1..4 over 4..8 (shared 4th band, as printed); false uses 1..4 / 5..8.
  bool srmr_overlapping_band = true;
  /// SRMR: zero-pad the Hilbert transform and the modulation spectrum to fast_transform_length.
  /// Band ratios are unchanged up to the finer bin grid; frames of awkward lengths get ~5x cheaper.
  bool srmr_fast_transforms = true;
};

/// Mean over samples of frame[j]^2 / max(prev[j]^2, floor_eps).
[[nodiscard]] double power_onset_ratio(std::span<const double> frame, std::span<const double> prev,
                                       const ClassifierOptions& options = {});
[[nodiscard]] double power_onset_ratio(const MonoSignal& frame, const MonoSignal& prev,
                                       const ClassifierOptions& options = {});

struct SrmrValue {
  double ratio = 1.0;
  bool low_confidence = false;  ///< frame shorter than one period of the lowest band center
};

[[nodiscard]] SrmrValue srmr(std::span<const double> frame, double sample_rate,
                             const ModulationFilterbank& bank, const ClassifierOptions& options = {});
[[nodiscard]] SrmrValue srmr(const MonoSignal& frame, const ModulationFilterbank& bank,
                             const ClassifierOptions& options = {});

/// delta_low < value < delta_high, strict on both sides. NaN is never speech.
[[nodiscard]] bool classify(double value, const Thresholds& thresholds) noexcept;

}  // namespace doalab
