#include "salp/se2.hpp"

#include <stdexcept>

namespace salp {

namespace {
constexpr double kSmallAngle = 1e-6;

// sin(t)/t and (1-cos(t))/t with 4-term series below the switch.
inline double sinc(double t) {
  if (std::abs(t) < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0;
  }
  return std::sin(t) / t;
}

inline double cosc(double t) {
  if (std::abs(t) < kSmallAngle) {
    const double t2 = t * t;
    return t / 2.0 - t * t2 / 24.0 + t * t2 * t2 / 720.0 - t * t2 * t2 * t2 / 40320.0;
  }
  return (1.0 - std::cos(t)) / t;
}
}  // namespace

Pose exp(const Twist& xi, double dt) {
  const double th = xi.omega * dt;
  const double a = sinc(th), b = cosc(th);
  const double px = dt * (a * xi.vx - b * xi.vy);
  const double py = dt * (b * xi.vx + a * xi.vy);
  return {px, py, th};
}

Twist log(const Pose& g) {
  const double th = g.theta;
  const double a = sinc(th), b = cosc(th);
  // Invert V = [[a, -b], [b, a]] scaled by 1/(a^2 + b^2).
  const double d = a * a + b * b;
  const double vx = (a * g.x + b * g.y) / d;
  const double vy = (-b * g.x + a * g.y) / d;
  return {vx, vy, th};
}

Eigen::Matrix3d adjoint(const Pose& g) {
  Eigen::Matrix3d ad = Eigen::Matrix3d::Identity();
  ad.topLeftCorner<2, 2>() = g.rotation();
  ad(0, 2) = g.y;
  ad(1, 2) = -g.x;
  return ad;
}

std::vector<Twist> group_diff(const std::vector<Pose>& poses, double dt) {
  if (poses.size() < 2) throw std::invalid_argument("group_diff: need at least 2 samples");
  if (dt <= 0.0) throw std::invalid_argument("group_diff: dt must be positive");
  std::vector<Twist> out;
  out.reserve(poses.size() - 1);
  for (size_t k = 0; k + 1 < poses.size(); ++k) {
    const Twist xi = log(compose(inverse(poses[k]), poses[k + 1]));
    out.push_back(xi * (1.0 / dt));
  }
  return out;
}

}  // namespace salp
