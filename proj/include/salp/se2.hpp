#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

// Planar rigid-body algebra. Poses are stored as (x, y, theta) with theta
// wrapped to (-pi, pi]; homogeneous matrices are produced on demand so no
// renormalization is ever needed.
namespace salp {

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  Twist() = default;
  Twist(double vx_, double vy_, double omega_) : vx(vx_), vy(vy_), omega(omega_) {}
  explicit Twist(const Eigen::Vector3d& v) : vx(v[0]), vy(v[1]), omega(v[2]) {}

  Eigen::Vector3d vec() const { return {vx, vy, omega}; }
  double norm() const { return vec().norm(); }

  Twist operator*(double s) const { return {vx * s, vy * s, omega * s}; }
  Twist operator+(const Twist& o) const { return {vx + o.vx, vy + o.vy, omega + o.omega}; }
  Twist operator-(const Twist& o) const { return {vx - o.vx, vy - o.vy, omega - o.omega}; }
};

struct Wrench {
  double fx = 0.0;
  double fy = 0.0;
  double tau = 0.0;

  Wrench() = default;
  Wrench(double fx_, double fy_, double tau_) : fx(fx_), fy(fy_), tau(tau_) {}
  explicit Wrench(const Eigen::Vector3d& v) : fx(v[0]), fy(v[1]), tau(v[2]) {}

  Eigen::Vector3d vec() const { return {fx, fy, tau}; }

  // Bilinear pairing with a body velocity.
  double dot(const Twist& xi) const { return fx * xi.vx + fy * xi.vy + tau * xi.omega; }
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // wrapped to (-pi, pi]

  Pose() = default;
  Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  static Pose identity() { return {}; }

  Eigen::Matrix2d rotation() const {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
  }

  Eigen::Vector2d translation() const { return {x, y}; }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m.topLeftCorner<2, 2>() = rotation();
    m(0, 2) = x;
    m(1, 2) = y;
    return m;
  }
};

inline Pose compose(const Pose& a, const Pose& b) {
  const Eigen::Vector2d t = a.rotation() * b.translation() + a.translation();
  return {t[0], t[1], a.theta + b.theta};
}

inline Pose inverse(const Pose& g) {
  const Eigen::Vector2d t = -(g.rotation().transpose() * g.translation());
  return {t[0], t[1], -g.theta};
}

// Closed-form SE(2) exponential of dt*xi. Near-zero rotation uses the Taylor
// series of sin(t)/t and (1-cos(t))/t, switching at |omega*dt| < 1e-6.
Pose exp(const Twist& xi, double dt = 1.0);

// Inverse of exp with dt = 1; the branch is fixed by theta in (-pi, pi].
Twist log(const Pose& g);

// Ad_g such that Ad_g * xi is the matrix form of g xihat g^-1.
Eigen::Matrix3d adjoint(const Pose& g);
inline Eigen::Matrix3d adjoint_inverse(const Pose& g) { return adjoint(inverse(g)); }

// se(2) algebra bracket [a, b] = ad_a b.
inline Twist algebra_bracket(const Twist& a, const Twist& b) {
  return {a.omega * -b.vy - b.omega * -a.vy,
          a.omega * b.vx - b.omega * a.vx, 0.0};
}

// Lie-group time differentiation of a uniformly sampled pose sequence:
// xi(t) = log(g(t)^-1 g(t+dt)) / dt. Returns N-1 twists; exact for
// trajectories that are exponentials of constant twists.
std::vector<Twist> group_diff(const std::vector<Pose>& poses, double dt);

// Geodesic interpolation g_a * exp(s * log(g_a^-1 g_b)), s in [0, 1].
inline Pose interpolate(const Pose& a, const Pose& b, double s) {
  return compose(a, exp(log(compose(inverse(a), b)), s));
}

}  // namespace salp
