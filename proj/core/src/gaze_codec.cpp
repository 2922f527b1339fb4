#include "supergaze/gaze_codec.hpp"

#include <algorithm>
#include <stdexcept>

namespace supergaze::codec {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

/// Wrap an angle into (-pi, pi].
double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

GazeVector GazeVector::normalized() const {
  const double n = norm();
  if (n == 0.0 || !std::isfinite(n)) {
    throw std::domain_error("cannot normalize a zero-norm gaze vector");
  }
  return {x / n, y / n, z / n};
}

GazeVector angles_to_vector(const YawPitch& a) {
  const double cp = std::cos(a.pitch);
  return {cp * std::sin(a.yaw), std::sin(a.pitch), cp * std::cos(a.yaw)};
}

YawPitch vector_to_angles(const GazeVector& g) {
  const GazeVector u = g.normalized();
  // atan2(0, 0) = 0, which fixes yaw at the poles.
  return {std::atan2(u.x, u.z), std::asin(clamp_unit(u.y))};
}

TrigGaze encode(const YawPitch& a) {
  return {std::sin(a.yaw), std::cos(a.yaw), std::sin(a.pitch)};
}

namespace {

struct YawEstimates {
  double theta_s;
  double theta_c;
  double weight;
};

YawEstimates yaw_estimates(const TrigGaze& t) {
  const double sy = clamp_unit(t.sy);
  const double cy = clamp_unit(t.cy);

  double theta_s;
  if (sign_nonneg(cy) > 0.0) {
    theta_s = std::asin(sy);
  } else {
    theta_s = sign_nonneg(sy) * kPi - std::asin(sy);
  }
  double theta_c = sign_nonneg(sy) * std::acos(cy);

  // theta_s and theta_c always share a sign after clamping, so this
  // unwrap is a no-op in practice; it pins the blend onto the circle
  // in case either estimate is nudged across +-pi by rounding.
  theta_c += 2.0 * kPi * std::round((theta_s - theta_c) / (2.0 * kPi));

  const double w = std::fabs(std::cos(0.5 * (theta_s + theta_c)));
  return {theta_s, theta_c, w};
}

}  // namespace

double decode_yaw(const TrigGaze& t) {
  const YawEstimates e = yaw_estimates(t);
  return wrap_angle(e.weight * e.theta_s + (1.0 - e.weight) * e.theta_c);
}

double decode_yaw_weight(const TrigGaze& t) { return yaw_estimates(t).weight; }

double decode_pitch(const TrigGaze& t) { return std::asin(clamp_unit(t.sp)); }

YawPitch decode(const TrigGaze& t) { return {decode_yaw(t), decode_pitch(t)}; }

double angular_error_deg(const GazeVector& g, const GazeVector& g_hat) {
  const double ng = g.norm();
  const double nh = g_hat.norm();
  if (ng == 0.0 || nh == 0.0 || !std::isfinite(ng) || !std::isfinite(nh)) {
    throw std::domain_error("angular error requires nonzero gaze vectors");
  }
  // atan2 over the cross/dot pair is scale-free and, unlike acos(dot/(|g||h|)),
  // does not lose precision for (anti)parallel vectors.
  const double cx = g.y * g_hat.z - g.z * g_hat.y;
  const double cy = g.z * g_hat.x - g.x * g_hat.z;
  const double cz = g.x * g_hat.y - g.y * g_hat.x;
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = g.x * g_hat.x + g.y * g_hat.y + g.z * g_hat.z;
  return rad_to_deg(std::atan2(cross, dot));
}

}  // namespace supergaze::codec
