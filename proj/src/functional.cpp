#include "adjstep/functional.hpp"

#include "adjstep/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace adjstep {

namespace {

constexpr std::array<double, 5> kGaussX = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

// ∫ over the straight segment p0 -> p1 of f, split where x crosses a breakpoint.
template <class F>
auto integrate_segment(const Vec2& p0, const Vec2& p1, const std::vector<double>& breaks, F&& f) {
  const double length = (p1 - p0).norm();
  std::vector<double> cuts = {0.0, 1.0};
  const double dx = p1.x() - p0.x();
  if (dx != 0.0)
    for (double b : breaks) {
      const double s = (b - p0.x()) / dx;
      if (s > 0.0 && s < 1.0) cuts.push_back(s);
    }
  std::sort(cuts.begin(), cuts.end());
  decltype(f(p0)) sum = decltype(f(p0))::Zero();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    for (int q = 0; q < 5; ++q) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * kGaussX[q];
      sum += (0.5 * (b - a) * kGaussW[q] * length) * f(Vec2(p0 + s * (p1 - p0)));
    }
  }
  return sum;
}

}  // namespace

template <int N>
TargetFunctional<N> TargetFunctional<N>::scaled(double factor) const {
  TargetFunctional<N> out = *this;
  if (interior) {
    auto f = interior;
    out.interior = [f, factor](const Vec2& x) { return S(factor * f(x)); };
  }
  if (boundary) {
    auto f = boundary;
    out.boundary = [f, factor](const Vec2& x, const Face& face) { return S(factor * f(x, face)); };
  }
  return out;
}

template <int N>
FunctionalWeights<N> functional_weights(const TargetFunctional<N>& func, const Mesh& mesh) {
  using S = State<N>;
  FunctionalWeights<N> w;
  const int nc = static_cast<int>(mesh.num_cells());
  w.cell.assign(nc, S::Zero());
  w.cell_center.assign(nc, S::Zero());
  w.cell_gradient.assign(nc, Eigen::Matrix<double, 2, N>::Zero());
  w.face.assign(mesh.num_faces(), S::Zero());
  w.face_mean.assign(mesh.num_faces(), S::Zero());
  w.has_interior = static_cast<bool>(func.interior);
  w.has_boundary = static_cast<bool>(func.boundary);

  if (func.interior) {
    for (int c = 0; c < nc; ++c) {
      const Cell& cell = mesh.cell(c);
      w.cell_center[c] = func.interior(cell.centroid);
      if (mesh.dim() == 1) {
        const auto& cv = mesh.data().cell_vertices[c];
        w.cell[c] = integrate_segment(mesh.vertices()[cv[0]], mesh.vertices()[cv[1]],
                                      func.breakpoints, func.interior);
      } else {
        w.cell[c] = cell.volume * w.cell_center[c];
      }
      Eigen::Matrix<double, 2, N> g = Eigen::Matrix<double, 2, N>::Zero();
      for (int f : mesh.cell_faces(c)) {
        const Face& fc = mesh.face(f);
        g += (fc.area * mesh.outward_normal(f, c)) * func.interior(fc.midpoint).transpose();
      }
      w.cell_gradient[c] = g / cell.volume;
    }
  }
  if (func.boundary) {
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      const Face& fc = mesh.face(f);
      if (!fc.is_boundary()) continue;
      auto at = [&](const Vec2& x) { return func.boundary(x, fc); };
      if (mesh.dim() == 1) {
        w.face[f] = fc.area * at(fc.midpoint);
      } else {
        w.face[f] = integrate_segment(mesh.vertices()[fc.v0], mesh.vertices()[fc.v1],
                                      func.breakpoints, at);
      }
      w.face_mean[f] = w.face[f] / fc.area;
    }
  }
  return w;
}

double pressure_window(double x, double center, double half_width) {
  const double a = x - (center - half_width);
  const double b = x - (center + half_width);
  if (a < 0.0 || b > 0.0) return 0.0;
  const double w2 = half_width * half_width;
  return (a * a) * (b * b) / (w2 * w2);
}

TargetFunctional<4> bump_pressure_functional(const std::vector<double>& centers, double half_width,
                                             double t_end) {
  TargetFunctional<4> func;
  func.boundary = [centers, half_width](const Vec2& x, const Face& face) {
    State<4> psi = State<4>::Zero();
    if (face.patch != Patch::kBottom) return psi;
    double s = 0.0;
    for (double c : centers) s += pressure_window(x.x(), c, half_width);
    psi[1] = -face.normal.x() * s;
    psi[2] = -face.normal.y() * s;
    return psi;
  };
  func.boundary_t0 = 0.0;
  func.boundary_t1 = t_end;
  for (double c : centers) {
    func.breakpoints.push_back(c - half_width);
    func.breakpoints.push_back(c + half_width);
  }
  return func;
}

TargetFunctional<1> interval_bump_functional(double center, double half_width, double t0, double t1) {
  TargetFunctional<1> func;
  func.interior = [center, half_width](const Vec2& x) {
    const double s = (x.x() - center) / half_width;
    return State<1>(std::abs(s) >= 1.0 ? 0.0 : (1.0 - s * s) * (1.0 - s * s));
  };
  func.interior_t0 = t0;
  func.interior_t1 = t1;
  func.breakpoints = {center - half_width, center + half_width};
  return func;
}

template <class Model>
FunctionalAccumulator<Model>::FunctionalAccumulator(const FiniteVolume<Model>& fv,
                                                    const TargetFunctional<Model::kVars>& func)
    : fv_(&fv), func_(func), weights_(functional_weights(func, fv.mesh())) {}

template <class Model>
double FunctionalAccumulator<Model>::slab_value(double t0, double t1, const Field& u) const {
  const Mesh& mesh = fv_->mesh();
  double j = 0.0;
  const double wi = weights_.has_interior ? func_.interior_overlap(t0, t1) : 0.0;
  if (wi > 0.0)
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c)
      j += wi * fv_->cell_state(u, c).dot(weights_.cell[c]);
  const double wb = weights_.has_boundary ? func_.boundary_overlap(t0, t1) : 0.0;
  if (wb > 0.0) {
    const SlabBoundary<Model::kVars> sb = fv_->freeze(t0, t1);
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      const Face& fc = mesh.face(f);
      if (!fc.is_boundary() || weights_.face[f].isZero(0.0)) continue;
      const auto out = outgoing_flux(fv_->model(), fv_->cell_state(u, fc.left), fc.normal, sb.kind_of(fc.tag));
      j -= wb * out.dot(weights_.face[f]);
    }
  }
  return j;
}

template <class Model>
void FunctionalAccumulator<Model>::add_slab(double t0, double t1, const Field& u_new) {
  const double j = slab_value(t0, t1, u_new);
  value_ += j;
  trace_.push_back({t1, t1 - t0, j / (t1 - t0), value_});
}

template <class Model>
double evaluate_functional(const FiniteVolume<Model>& fv, const Trajectory& traj,
                           const TargetFunctional<Model::kVars>& func) {
  FunctionalAccumulator<Model> acc(fv, func);
  for (std::size_t m = 1; m < traj.records.size(); ++m) {
    if (traj.records[m].field.size() == 0) throw ArgumentError("trajectory does not store fields");
    acc.add_slab(traj.records[m - 1].t, traj.records[m].t, traj.records[m].field);
  }
  return acc.value();
}

template <class Model>
std::vector<TracePoint> functional_trace(const FiniteVolume<Model>& fv, const Trajectory& traj,
                                         const TargetFunctional<Model::kVars>& func) {
  FunctionalAccumulator<Model> acc(fv, func);
  for (std::size_t m = 1; m < traj.records.size(); ++m) {
    if (traj.records[m].field.size() == 0) throw ArgumentError("trajectory does not store fields");
    acc.add_slab(traj.records[m - 1].t, traj.records[m].t, traj.records[m].field);
  }
  return acc.trace();
}

template <class Model>
double snapshot_boundary_integral(const FiniteVolume<Model>& fv, const Field& u,
                                  const TargetFunctional<Model::kVars>& func) {
  TargetFunctional<Model::kVars> f = func;
  f.interior = {};
  f.boundary_t0 = 0.0;
  f.boundary_t1 = 1.0;
  FunctionalAccumulator<Model> acc(fv, f);
  return -acc.slab_value(0.0, 1.0, u);
}

template struct TargetFunctional<1>;
template struct TargetFunctional<4>;
template FunctionalWeights<1> functional_weights(const TargetFunctional<1>&, const Mesh&);
template FunctionalWeights<4> functional_weights(const TargetFunctional<4>&, const Mesh&);

#define ADJSTEP_INSTANTIATE(Model)                                                               \
  template class FunctionalAccumulator<Model>;                                                  \
  template double evaluate_functional(const FiniteVolume<Model>&, const Trajectory&,            \
                                      const TargetFunctional<Model::kVars>&);                   \
  template std::vector<TracePoint> functional_trace(const FiniteVolume<Model>&,                 \
                                                    const Trajectory&,                          \
                                                    const TargetFunctional<Model::kVars>&);     \
  template double snapshot_boundary_integral(const FiniteVolume<Model>&, const Field&,          \
                                             const TargetFunctional<Model::kVars>&);
ADJSTEP_INSTANTIATE(Burgers1D)
ADJSTEP_INSTANTIATE(LinearAdvection1D)
ADJSTEP_INSTANTIATE(Euler2D)
#undef ADJSTEP_INSTANTIATE

}  // namespace adjstep
