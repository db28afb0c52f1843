/// @file physics.hpp
/// @brief Flux models: 1D Burgers, 1D linear advection and 2D compressible Euler.
///
/// Every model exposes the same static interface so the solvers can be
/// templated on it: flux, analytic Jacobian, eigensystem with explicit left
/// eigenvectors, and an admissibility check.
#pragma once

#include "adjstep/error.hpp"
#include "adjstep/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <string>

namespace adjstep {

template <int N>
using State = Eigen::Matrix<double, N, 1>;
template <int N>
using Matrix = Eigen::Matrix<double, N, N>;

template <int N>
struct Eigensystem {
  State<N> lambda;
  Matrix<N> R;  ///< right eigenvectors as columns
  Matrix<N> L;  ///< left eigenvectors as rows, L = R^-1
};

template <int N>
struct Projections {
  Matrix<N> minus;  ///< onto eigenvectors with negative eigenvalue
  Matrix<N> plus;   ///< the rest (zero eigenvalues count as outgoing)
};

/// Harten entropy fix of |lambda| with threshold delta.
inline double harten_abs(double lambda, double delta) {
  const double a = std::abs(lambda);
  if (a >= delta || delta <= 0.0) return a;
  return 0.5 * (lambda * lambda + delta * delta) / delta;
}

/// Builds P_- and P_+ from an eigensystem.
template <int N>
Projections<N> projections_from(const Eigensystem<N>& es) {
  State<N> neg, pos;
  for (int k = 0; k < N; ++k) {
    neg[k] = es.lambda[k] < 0.0 ? 1.0 : 0.0;
    pos[k] = 1.0 - neg[k];
  }
  return {es.R * neg.asDiagonal() * es.L, es.R * pos.asDiagonal() * es.L};
}

/// Inviscid Burgers equation u_t + (u^2/2)_x = 0.
struct Burgers1D {
  static constexpr int kVars = 1;
  static constexpr int kDim = 1;
  using S = State<1>;
  using M = Matrix<1>;

  static const char* name() { return "burgers1d"; }

  void check(const S& u, int cell = -1) const {
    if (!std::isfinite(u[0])) throw StateError("non-finite Burgers state", cell);
  }
  S flux(const S& u, const Vec2& n) const { return S(0.5 * u[0] * u[0] * n.x()); }
  M jacobian(const S& u, const Vec2& n) const { return M(u[0] * n.x()); }
  Eigensystem<1> eigensystem(const S& u, const Vec2& n) const {
    return {S(u[0] * n.x()), M::Identity(), M::Identity()};
  }
  double max_wave_speed(const S& u) const { return std::abs(u[0]); }

  /// Roe linearization: exact for Burgers with the mean speed.
  M roe_abs_matrix(const S& ul, const S& ur, const Vec2& n) const {
    const double a = 0.5 * (ul[0] + ur[0]) * n.x();
    return M(harten_abs(a, 0.05 * std::abs(a)));
  }
  /// State whose Jacobian equals the Roe matrix.
  S roe_state(const S& ul, const S& ur) const { return S(0.5 * (ul[0] + ur[0])); }
};

/// Linear advection u_t + a u_x = 0; used to verify the dual solver.
struct LinearAdvection1D {
  static constexpr int kVars = 1;
  static constexpr int kDim = 1;
  using S = State<1>;
  using M = Matrix<1>;

  double speed = 1.0;

  static const char* name() { return "advection1d"; }

  void check(const S& u, int cell = -1) const {
    if (!std::isfinite(u[0])) throw StateError("non-finite advected state", cell);
  }
  S flux(const S& u, const Vec2& n) const { return S(speed * u[0] * n.x()); }
  M jacobian(const S&, const Vec2& n) const { return M(speed * n.x()); }
  Eigensystem<1> eigensystem(const S&, const Vec2& n) const {
    return {S(speed * n.x()), M::Identity(), M::Identity()};
  }
  double max_wave_speed(const S&) const { return std::abs(speed); }
  M roe_abs_matrix(const S&, const S&, const Vec2& n) const { return M(std::abs(speed * n.x())); }
  S roe_state(const S& ul, const S& ur) const { return 0.5 * (ul + ur); }
};

/// 2D compressible Euler equations in conserved variables (rho, rho u, rho v, E).
struct Euler2D {
  static constexpr int kVars = 4;
  static constexpr int kDim = 2;
  using S = State<4>;
  using M = Matrix<4>;

  static constexpr double kFloor = 1e-10;
  double gamma = 1.4;

  static const char* name() { return "euler2d"; }

  double pressure(const S& u) const {
    return (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]);
  }
  double sound_speed(const S& u) const { return std::sqrt(gamma * pressure(u) / u[0]); }

  void check(const S& u, int cell = -1) const {
    if (!u.allFinite()) throw StateError("non-finite Euler state", cell);
    if (!(u[0] > kFloor)) throw StateError("density below admissibility floor", cell);
    if (!(pressure(u) > kFloor)) throw StateError("pressure below admissibility floor", cell);
  }

  S from_primitive(double rho, double u, double v, double p) const {
    return S(rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v));
  }

  S flux(const S& u, const Vec2& n) const {
    const double rho = u[0];
    const double vx = u[1] / rho, vy = u[2] / rho;
    const double p = pressure(u);
    const double un = vx * n.x() + vy * n.y();
    return S(rho * un, u[1] * un + p * n.x(), u[2] * un + p * n.y(), (u[3] + p) * un);
  }

  M jacobian(const S& u, const Vec2& n) const {
    const double g = gamma;
    const double vx = u[1] / u[0], vy = u[2] / u[0];
    const double q2 = vx * vx + vy * vy;
    const double h = (u[3] + pressure(u)) / u[0];
    const double un = vx * n.x() + vy * n.y();
    const double phi = 0.5 * (g - 1.0) * q2;
    M a;
    a << 0.0, n.x(), n.y(), 0.0,
        phi * n.x() - vx * un, un - (g - 2.0) * vx * n.x(), vx * n.y() - (g - 1.0) * vy * n.x(), (g - 1.0) * n.x(),
        phi * n.y() - vy * un, vy * n.x() - (g - 1.0) * vx * n.y(), un - (g - 2.0) * vy * n.y(), (g - 1.0) * n.y(),
        un * (phi - h), h * n.x() - (g - 1.0) * vx * un, h * n.y() - (g - 1.0) * vy * un, g * un;
    return a;
  }

  /// Eigenvalues ordered (u_n - c, u_n, u_n, u_n + c): acoustic, entropy, shear, acoustic.
  Eigensystem<4> eigensystem(const S& u, const Vec2& n) const {
    const double vx = u[1] / u[0], vy = u[2] / u[0];
    const double h = (u[3] + pressure(u)) / u[0];
    const double c2 = (gamma - 1.0) * (h - 0.5 * (vx * vx + vy * vy));
    if (!(c2 > 0.0)) throw StateError("imaginary sound speed in eigensystem");
    return eigensystem_primitive(vx, vy, h, std::sqrt(c2), n);
  }

  Eigensystem<4> eigensystem_primitive(double vx, double vy, double h, double c,
                                       const Vec2& n) const {
    const double nx = n.x(), ny = n.y();
    const double tx = -ny, ty = nx;
    const double un = vx * nx + vy * ny;
    const double ut = vx * tx + vy * ty;
    const double q2 = vx * vx + vy * vy;
    Eigensystem<4> es;
    es.lambda = S(un - c, un, un, un + c);
    es.R << 1.0, 1.0, 0.0, 1.0,
        vx - c * nx, vx, tx, vx + c * nx,
        vy - c * ny, vy, ty, vy + c * ny,
        h - c * un, 0.5 * q2, ut, h + c * un;
    const double b1 = (gamma - 1.0) / (c * c);
    const double b2 = 0.5 * b1 * q2;
    es.L << 0.5 * (b2 + un / c), -0.5 * (b1 * vx + nx / c), -0.5 * (b1 * vy + ny / c), 0.5 * b1,
        1.0 - b2, b1 * vx, b1 * vy, -b1,
        -ut, tx, ty, 0.0,
        0.5 * (b2 - un / c), -0.5 * (b1 * vx - nx / c), -0.5 * (b1 * vy - ny / c), 0.5 * b1;
    return es;
  }

  double max_wave_speed(const S& u) const {
    const double vx = u[1] / u[0], vy = u[2] / u[0];
    return std::sqrt(vx * vx + vy * vy) + sound_speed(u);
  }

  /// Roe-averaged state: its velocity and total enthalpy are the Roe averages.
  S roe_state(const S& ul, const S& ur) const {
    const double sl = std::sqrt(ul[0]), sr = std::sqrt(ur[0]);
    const double wl = sl / (sl + sr), wr = sr / (sl + sr);
    const double vx = wl * ul[1] / ul[0] + wr * ur[1] / ur[0];
    const double vy = wl * ul[2] / ul[0] + wr * ur[2] / ur[0];
    const double h = wl * (ul[3] + pressure(ul)) / ul[0] + wr * (ur[3] + pressure(ur)) / ur[0];
    const double rho = sl * sr;
    const double q2 = vx * vx + vy * vy;
    const double e = (rho * h + 0.5 * (gamma - 1.0) * rho * q2) / gamma;
    return S(rho, rho * vx, rho * vy, e);
  }

  /// |A| at the Roe average with the Harten fix delta = 0.05 (|u| + c).
  M roe_abs_matrix(const S& ul, const S& ur, const Vec2& n) const {
    const double sl = std::sqrt(ul[0]), sr = std::sqrt(ur[0]);
    const double wl = sl / (sl + sr), wr = sr / (sl + sr);
    const double vx = wl * ul[1] / ul[0] + wr * ur[1] / ur[0];
    const double vy = wl * ul[2] / ul[0] + wr * ur[2] / ur[0];
    const double h = wl * (ul[3] + pressure(ul)) / ul[0] + wr * (ur[3] + pressure(ur)) / ur[0];
    const double q2 = vx * vx + vy * vy;
    const double c2 = (gamma - 1.0) * (h - 0.5 * q2);
    if (!(c2 > kFloor)) throw StateError("Roe average is not admissible");
    const double c = std::sqrt(c2);
    const Eigensystem<4> es = eigensystem_primitive(vx, vy, h, c, n);
    const double delta = 0.05 * (std::sqrt(q2) + c);
    S abs_lambda;
    for (int k = 0; k < 4; ++k) abs_lambda[k] = harten_abs(es.lambda[k], delta);
    return es.R * abs_lambda.asDiagonal() * es.L;
  }

  /// Gradient of pressure with respect to the conserved variables.
  S pressure_gradient(const S& u) const {
    const double vx = u[1] / u[0], vy = u[2] / u[0];
    return (gamma - 1.0) * S(0.5 * (vx * vx + vy * vy), -vx, -vy, 1.0);
  }

  /// Mach number |v| / c.
  double mach(const S& u) const {
    const double vx = u[1] / u[0], vy = u[2] / u[0];
    return std::sqrt(vx * vx + vy * vy) / sound_speed(u);
  }
};

template <class Model>
Projections<Model::kVars> projections(const Model& model, const State<Model::kVars>& u,
                                      const Vec2& n) {
  return projections_from(model.eigensystem(u, n));
}

}  // namespace adjstep
