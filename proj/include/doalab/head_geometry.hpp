#pragma once

#include <cstddef>
#include <numbers>
#include <span>

namespace doalab {

/// Microphone-pair geometry: ear-to-ear distance D and speed of sound.
class HeadModel {
 public:
  static constexpr double kDefaultEarDistance = 0.255;  // calibrated REEM-C head, meters
  static constexpr double kDefaultSpeedOfSound = 343.0;  // 20 C air

  HeadModel() = default;
  /// Throws InvalidArgument unless 0.05 <= ear_distance_m <= 0.5 and speed > 0.
  HeadModel(double ear_distance_m, double speed_of_sound_mps);

  [[nodiscard]] double ear_distance_m() const noexcept { return ear_distance_; }
  [[nodiscard]] double speed_of_sound_mps() const noexcept { return speed_; }

  /// tau at theta = +pi/2 under the spherical-head model.
  [[nodiscard]] double max_itd_s() const noexcept;
  /// ceil(max_itd_s * sample_rate): the largest physically feasible integer lag.
  [[nodiscard]] std::size_t max_lag_samples(double sample_rate) const noexcept;

 private:
  double ear_distance_ = kDefaultEarDistance;
  double speed_ = kDefaultSpeedOfSound;
};

/// Azimuth in radians, [-pi/2, +pi/2]; 0 is straight ahead, positive toward the side whose
/// microphone the sound reaches first when the lag is positive (the left side).
class AzimuthRad {
 public:
  AzimuthRad() = default;
  /// Throws InvalidArgument when outside [-pi/2, pi/2] or non-finite.
  explicit AzimuthRad(double radians);
  static AzimuthRad from_degrees(double degrees);

  [[nodiscard]] double value() const noexcept { return value_; }
  [[nodiscard]] double degrees() const noexcept { return value_ * 180.0 / std::numbers::pi; }

  friend bool operator==(AzimuthRad, AzimuthRad) = default;

 private:
  double value_ = 0.0;
};

/// Plane-wave model: tau = D sin(theta) / v.
[[nodiscard]] double itd_simple(AzimuthRad theta, const HeadModel& model);
/// Woodworth-Schlosberg spherical head: tau = D / (2 v) * (theta + sin(theta)).
[[nodiscard]] double itd_woodworth(AzimuthRad theta, const HeadModel& model);

struct AngleEstimate {
  AzimuthRad angle;
  bool clipped = false;
};

/// Inverts the spherical-head map by bisection; |tau| beyond the +-pi/2 limit clamps.
[[nodiscard]] AngleEstimate angle_from_itd(double tau_s, const HeadModel& model);

struct CalibrationObservation {
  AzimuthRad theta;
  double tau_s = 0.0;
};

struct CalibrationFit {
  double ear_distance_m = 0.0;
  double residual_sum_squares = 0.0;
};

/// Least-squares ear distance for the spherical-head model (closed form; the model is linear in
/// D). Throws Unidentifiable when every observation has theta == 0, InvalidArgument when empty.
[[nodiscard]] CalibrationFit calibrate_distance(std::span<const CalibrationObservation> observations,
                                                double speed_of_sound_mps);

}  // namespace doalab
