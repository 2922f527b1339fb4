#pragma once

#include <cmath>

namespace supergaze::codec {

/// 3D gaze direction. Canonical form is unit norm; the convention is
/// x right, y up, z forward:
///   g = (cos(pitch) * sin(yaw), sin(pitch), cos(pitch) * cos(yaw)).
/// Dataset loaders convert their native axes into this frame.
struct GazeVector {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  GazeVector normalized() const;
  GazeVector operator-() const { return {-x, -y, -z}; }
};

/// Yaw in (-pi, pi], pitch in [-pi/2, pi/2], radians.
struct YawPitch {
  double yaw = 0.0;
  double pitch = 0.0;
};

/// Trigonometric prediction triple: sine of yaw, cosine of yaw, sine of
/// pitch. Encoded values satisfy sy^2 + cy^2 = 1; model outputs are
/// unconstrained reals until clamped by the decoders.
struct TrigGaze {
  double sy = 0.0;
  double cy = 1.0;
  double sp = 0.0;
};

/// sign(0) = 1 by definition; -0.0 counts as non-negative.
inline double sign_nonneg(double v) { return v >= 0.0 ? 1.0 : -1.0; }

GazeVector angles_to_vector(const YawPitch& a);

/// Inverse of angles_to_vector after normalization. Throws
/// std::domain_error on a zero-norm vector. At the poles yaw is 0.
YawPitch vector_to_angles(const GazeVector& g);

TrigGaze encode(const YawPitch& a);

/// Fused yaw decoder. Clamps sy and cy to [-1, 1], forms the sine-based
/// estimate (quadrant-corrected via sign(cy)) and the cosine-based
/// estimate (sign taken from sy), then blends them with
/// w = |cos((theta_s + theta_c) / 2)| so the sine route dominates near 0
/// and the cosine route near +-pi/2. Total function; result in (-pi, pi].
double decode_yaw(const TrigGaze& t);

/// asin of sp clamped to [-1, 1].
double decode_pitch(const TrigGaze& t);

YawPitch decode(const TrigGaze& t);

/// Blend weight used by decode_yaw, exposed for diagnostics.
double decode_yaw_weight(const TrigGaze& t);

/// Angular error in degrees, in [0, 180]. Symmetric and scale invariant.
/// Throws std::domain_error when either vector has zero norm.
double angular_error_deg(const GazeVector& g, const GazeVector& g_hat);

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace supergaze::codec
