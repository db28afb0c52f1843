#include "adjstep/adjoint.hpp"

#include "adjstep/error.hpp"

#include <cmath>
#include <limits>

namespace adjstep {

template <int N>
Field dual_source(const TargetFunctional<N>& func, const Mesh& mesh) {
  const int d = mesh.dim();
  const int nc = static_cast<int>(mesh.num_cells());
  Field s = Field::Zero(static_cast<Eigen::Index>(nc) * d * N);
  if (!func.interior) return s;
  const FunctionalWeights<N> wts = functional_weights(func, mesh);
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < d; ++k)
      for (int v = 0; v < N; ++v) s[(c * d + k) * N + v] = wts.cell_gradient[c](k, v);
  return s;
}

template <class Model>
DualSolver<Model>::DualSolver(const FiniteVolume<Model>& fv, const TargetFunctional<N>& func,
                              DualOptions options)
    : fv_(&fv),
      func_(func),
      weights_(functional_weights(func, fv.mesh())),
      source_(dual_source(func, fv.mesh())),
      cfl_(options.cfl > 0.0 ? options.cfl : (D == 1 ? 0.9 : 0.5)) {}

template <class Model>
Eigen::Index DualSolver<Model>::field_size() const {
  return static_cast<Eigen::Index>(fv_->mesh().num_cells()) * D * N;
}

namespace {

template <class Model>
State<Model::kVars> checked(const Model& model, const State<Model::kVars>& u, int face) {
  try {
    model.check(u);
  } catch (const StateError& e) {
    throw StateError(std::string("dual projections undefined at face: ") + e.what(), face);
  }
  return u;
}

}  // namespace

template <class Model>
void DualSolver<Model>::prepare_slab(const Field& u_coeff, const Field& u_lo, const Field& u_hi,
                                     double t0, double t1) {
  const Mesh& mesh = fv_->mesh();
  const Model& model = fv_->model();
  const int nc = static_cast<int>(mesh.num_cells());
  const int nf = static_cast<int>(mesh.num_faces());
  t0_ = t0;
  t1_ = t1;
  const double dt = t1 - t0;
  if (!(dt > 0.0)) throw ArgumentError("dual slab must have positive length");

  cell_at_.resize(static_cast<std::size_t>(nc) * D);
  double rate = 0.0;
  for (int c = 0; c < nc; ++c) {
    const S u = fv_->cell_state(u_coeff, c);
    for (int k = 0; k < D; ++k) {
      const Vec2 e = k == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
      cell_at_[c * D + k] = model.jacobian(u, e).transpose();
    }
    rate = std::max(rate, model.max_wave_speed(u) / mesh.cell(c).length_scale);
  }
  max_substep_ = rate > 0.0 ? cfl_ / rate : std::numeric_limits<double>::infinity();

  face_plus_.resize(nf);
  face_minus_.resize(nf);
  face_hgamma_.assign(nf, S::Zero());
  const SlabBoundary<N> sb = fv_->freeze(t0, t1);
  const double chi_lo = func_.boundary_active(t0) ? 1.0 : 0.0;
  const double chi_hi = func_.boundary_active(t1) ? 1.0 : 0.0;
  const double chi_cell = weights_.has_interior ? func_.interior_overlap(t0, t1) / dt : 0.0;

  for (int f = 0; f < nf; ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_boundary()) {
      const S avg = 0.5 * (fv_->cell_state(u_coeff, fc.left) + fv_->cell_state(u_coeff, fc.right));
      const auto pr = projections(model, checked(model, avg, f), fc.normal);
      face_plus_[f] = pr.plus.transpose();
      face_minus_[f] = pr.minus.transpose();
      continue;
    }
    const bool wall = sb.kind_of(fc.tag) == BoundaryKind::kWall;
    auto trace = [&](const Field& u) {
      const S s = fv_->cell_state(u, fc.left);
      return checked(model, wall ? wall_trace_state(model, s, fc.normal) : s, f);
    };
    const auto pr = projections(model, trace(u_coeff), fc.normal);
    face_plus_[f] = pr.plus.transpose();
    face_minus_[f] = pr.minus.transpose();

    S h = S::Zero();
    if (weights_.has_boundary && (chi_lo != 0.0 || chi_hi != 0.0)) {
      const M p_hi = projections(model, trace(u_hi), fc.normal).plus.transpose();
      const M p_lo = projections(model, trace(u_lo), fc.normal).plus.transpose();
      h -= (p_hi * (chi_hi * weights_.face_mean[f]) - p_lo * (chi_lo * weights_.face_mean[f])) / dt;
    }
    if (chi_cell != 0.0) {
      const M p_lo = projections(model, trace(u_lo), fc.normal).plus.transpose();
      h += p_lo * (chi_cell * weights_.cell_center[fc.left]);
    }
    face_hgamma_[f] = h;
  }
}

template <class Model>
typename DualSolver<Model>::S DualSolver<Model>::cell_flux(const Field& w, int c) const {
  S h = S::Zero();
  for (int k = 0; k < D; ++k)
    h += cell_at_[c * D + k] * w.template segment<N>((c * D + k) * N);
  return h;
}

template <class Model>
Field DualSolver<Model>::substep(Field& w, double tau_lo, double tau_hi) const {
  const Mesh& mesh = fv_->mesh();
  const int nc = static_cast<int>(mesh.num_cells());
  const double dtau = tau_hi - tau_lo;
  if (w.size() != field_size()) throw ArgumentError("dual field has the wrong size");

  std::vector<S> h(nc);
  for (int c = 0; c < nc; ++c) h[c] = cell_flux(w, c);

  Field acc = Field::Zero(w.size());
  Field boundary = Field::Zero(D * N);
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const Face& fc = mesh.face(f);
    S flux;
    if (fc.is_boundary())
      flux = face_minus_[f] * h[fc.left] + face_hgamma_[f];
    else
      flux = face_plus_[f] * h[fc.right] + face_minus_[f] * h[fc.left];
    for (int k = 0; k < D; ++k) {
      const S part = (fc.area * fc.normal[k]) * flux;
      acc.template segment<N>((fc.left * D + k) * N) += part;
      if (fc.is_boundary())
        boundary.template segment<N>(k * N) += part;
      else
        acc.template segment<N>((fc.right * D + k) * N) -= part;
    }
  }

  const double chi = weights_.has_interior ? func_.interior_overlap(tau_lo, tau_hi) / dtau : 0.0;
  for (int c = 0; c < nc; ++c) {
    const double inv_vol = 1.0 / mesh.cell(c).volume;
    auto wc = w.segment(static_cast<Eigen::Index>(c) * D * N, D * N);
    wc += dtau * (inv_vol * acc.segment(static_cast<Eigen::Index>(c) * D * N, D * N) -
                  chi * source_.segment(static_cast<Eigen::Index>(c) * D * N, D * N));
  }
  return boundary;
}

template <class Model>
int DualSolver<Model>::slab_backward(Field& w) const {
  const double dt = t1_ - t0_;
  const int n = std::isfinite(max_substep_)
                    ? std::max(1, static_cast<int>(std::ceil(dt / max_substep_ * (1.0 - 1e-12))))
                    : 1;
  for (int s = n; s >= 1; --s) {
    const double hi = s == n ? t1_ : t0_ + dt * s / n;
    const double lo = s == 1 ? t0_ : t0_ + dt * (s - 1) / n;
    substep(w, lo, hi);
  }
  if (!w.allFinite()) throw StateError("dual solution is not finite", -1);
  return n;
}

template <class Model>
DualSolution run_adjoint(const FiniteVolume<Model>& fv, const Trajectory& traj,
                         const TargetFunctional<Model::kVars>& func, const DualOptions& options) {
  constexpr int N = Model::kVars;
  constexpr int D = Model::kDim;
  if (traj.records.size() < 2) throw ArgumentError("trajectory has no steps");
  if (!traj.has_fields()) throw ArgumentError("trajectory does not store fields");
  if (traj.mesh_hash != 0 && traj.mesh_hash != fv.mesh().hash())
    throw ArgumentError("trajectory was computed on a different mesh");

  DualSolver<Model> solver(fv, func, options);
  const int levels = static_cast<int>(traj.records.size());
  DualSolution out;
  out.dim = D;
  out.n_vars = N;
  out.t.resize(levels);
  out.w.resize(levels);
  out.substeps.assign(levels, 0);
  for (int m = 0; m < levels; ++m) out.t[m] = traj.records[m].t;

  Field w = Field::Zero(solver.field_size());
  if (options.terminal) {
    if (options.terminal->size() != w.size()) throw ArgumentError("terminal dual data has the wrong size");
    w = *options.terminal;
  }
  out.w[levels - 1] = w;
  for (int m = levels - 1; m >= 1; --m) {
    const StepRecord& lo = traj.records[m - 1];
    const StepRecord& hi = traj.records[m];
    const Field& coeff = theta_of(hi.mode) == 1 ? hi.field : lo.field;
    solver.prepare_slab(coeff, lo.field, hi.field, lo.t, hi.t);
    out.substeps[m] = solver.slab_backward(w);
    out.w[m - 1] = w;
  }
  return out;
}

std::vector<double> dual_norms(const DualSolution& dual, const Mesh& mesh) {
  std::vector<double> out;
  const int stride = dual.cell_stride();
  for (const Field& w : dual.w) {
    double s = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c)
      s += mesh.cell(c).volume * w.segment(static_cast<Eigen::Index>(c) * stride, stride).lpNorm<1>();
    out.push_back(s);
  }
  return out;
}

template Field dual_source(const TargetFunctional<1>&, const Mesh&);
template Field dual_source(const TargetFunctional<4>&, const Mesh&);

#define ADJSTEP_INSTANTIATE(Model)                                                              \
  template class DualSolver<Model>;                                                            \
  template DualSolution run_adjoint(const FiniteVolume<Model>&, const Trajectory&,             \
                                    const TargetFunctional<Model::kVars>&, const DualOptions&);
ADJSTEP_INSTANTIATE(Burgers1D)
ADJSTEP_INSTANTIATE(LinearAdvection1D)
ADJSTEP_INSTANTIATE(Euler2D)
#undef ADJSTEP_INSTANTIATE

}  // namespace adjstep
