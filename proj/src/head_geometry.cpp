#include "doalab/head_geometry.hpp"

#include <cmath>
#include <string>

#include "doalab/errors.hpp"

namespace doalab {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;

double woodworth(double theta, double d, double v) { return d / (2.0 * v) * (theta + std::sin(theta)); }
}  // namespace

HeadModel::HeadModel(double ear_distance_m, double speed_of_sound_mps)
    : ear_distance_(ear_distance_m), speed_(speed_of_sound_mps) {
  if (!(ear_distance_ >= 0.05 && ear_distance_ <= 0.5)) {
    throw InvalidArgument("ear distance must lie in [0.05, 0.5] m, got " + std::to_string(ear_distance_));
  }
  if (!(speed_ > 0.0) || !std::isfinite(speed_)) {
    throw InvalidArgument("speed of sound must be positive");
  }
}

double HeadModel::max_itd_s() const noexcept { return woodworth(kHalfPi, ear_distance_, speed_); }

std::size_t HeadModel::max_lag_samples(double sample_rate) const noexcept {
  return static_cast<std::size_t>(std::ceil(max_itd_s() * sample_rate));
}

AzimuthRad::AzimuthRad(double radians) : value_(radians) {
  if (!std::isfinite(radians) || radians < -kHalfPi || radians > kHalfPi) {
    throw InvalidArgument("azimuth outside [-pi/2, pi/2]: " + std::to_string(radians));
  }
}

AzimuthRad AzimuthRad::from_degrees(double degrees) {
  return AzimuthRad(degrees * std::numbers::pi / 180.0);
}

double itd_simple(AzimuthRad theta, const HeadModel& model) {
  return model.ear_distance_m() * std::sin(theta.value()) / model.speed_of_sound_mps();
}

double itd_woodworth(AzimuthRad theta, const HeadModel& model) {
  return woodworth(theta.value(), model.ear_distance_m(), model.speed_of_sound_mps());
}

AngleEstimate angle_from_itd(double tau_s, const HeadModel& model) {
  if (!std::isfinite(tau_s)) throw InvalidArgument("angle_from_itd: non-finite tau");
  const double limit = model.max_itd_s();
  if (tau_s >= limit) return {AzimuthRad(kHalfPi), tau_s > limit};
  if (tau_s <= -limit) return {AzimuthRad(-kHalfPi), tau_s < -limit};

  double lo = -kHalfPi;
  double hi = kHalfPi;
  const double d = model.ear_distance_m();
  const double v = model.speed_of_sound_mps();
  // 60 halvings of pi take the bracket below 1e-17 rad.
  for (int i = 0; i < 60 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (woodworth(mid, d, v) < tau_s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {AzimuthRad(0.5 * (lo + hi)), false};
}

CalibrationFit calibrate_distance(std::span<const CalibrationObservation> observations,
                                  double speed_of_sound_mps) {
  if (observations.empty()) throw InvalidArgument("calibrate_distance: no observations");
  if (!(speed_of_sound_mps > 0.0)) throw InvalidArgument("calibrate_distance: speed must be positive");

  // tau_k = D * a_k with a_k = (theta_k + sin theta_k) / (2 v).
  double saa = 0.0;
  double sta = 0.0;
  for (const auto& obs : observations) {
    const double a = woodworth(obs.theta.value(), 1.0, speed_of_sound_mps);
    saa += a * a;
    sta += obs.tau_s * a;
  }
  if (saa == 0.0) throw Unidentifiable("all calibration angles are zero");

  CalibrationFit fit;
  fit.ear_distance_m = sta / saa;
  for (const auto& obs : observations) {
    const double r = obs.tau_s - fit.ear_distance_m * woodworth(obs.theta.value(), 1.0, speed_of_sound_mps);
    fit.residual_sum_squares += r * r;
  }
  return fit;
}

}  // namespace doalab
