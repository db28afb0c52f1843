#include "adjstep/indicator.hpp"

#include "adjstep/error.hpp"

#include <cmath>

namespace adjstep {

namespace {

void check_alignment(const Trajectory& traj, const DualSolution& dual, int n_vars, int dim,
                     std::size_t n_cells) {
  if (dual.n_vars != n_vars || dual.dim != dim) throw ArgumentError("dual has the wrong shape");
  if (dual.w.size() != traj.records.size()) throw ArgumentError("dual and trajectory levels differ");
  for (std::size_t m = 0; m < dual.w.size(); ++m) {
    if (std::abs(dual.t[m] - traj.records[m].t) > 1e-12 * std::max(1.0, std::abs(dual.t[m])))
      throw ArgumentError("dual and trajectory time levels differ");
    if (dual.w[m].size() != static_cast<Eigen::Index>(n_cells) * n_vars * dim)
      throw ArgumentError("dual field has the wrong size");
  }
}

// Mean dual gradient on slab m (1-based) for cell c as a 2 x N matrix.
template <int N>
Eigen::Matrix<double, 2, N> slab_gradient(const DualSolution& dual, int m, int c) {
  Eigen::Matrix<double, 2, N> g = Eigen::Matrix<double, 2, N>::Zero();
  const int stride = dual.cell_stride();
  for (int k = 0; k < dual.dim; ++k)
    for (int v = 0; v < N; ++v) {
      const Eigen::Index idx = static_cast<Eigen::Index>(c) * stride + k * N + v;
      g(k, v) = 0.5 * (dual.w[m - 1][idx] + dual.w[m][idx]);
    }
  return g;
}

// Pointwise time-slope weight ψ̄ - Ã^T w̄ on (m, c).
template <class Model>
State<Model::kVars> slope_weight(const FiniteVolume<Model>& fv, const Trajectory& traj,
                                 const DualSolution& dual, const FunctionalWeights<Model::kVars>& wts,
                                 double psi_factor, int m, int c) {
  constexpr int N = Model::kVars;
  const StepRecord& hi = traj.records[m];
  const Field& coeff = theta_of(hi.mode) == 1 ? hi.field : traj.records[m - 1].field;
  const State<N> u = fv.cell_state(coeff, c);
  const Eigen::Matrix<double, 2, N> g = slab_gradient<N>(dual, m, c);
  State<N> s = State<N>::Zero();
  if (wts.has_interior) s += psi_factor * wts.cell[c] / fv.mesh().cell(c).volume;
  for (int k = 0; k < Model::kDim; ++k) {
    const Vec2 e = k == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
    s -= fv.model().jacobian(u, e).transpose() * g.row(k).transpose();
  }
  return s;
}

}  // namespace

template <class Model>
ErrorBreakdown compute_eta_k(const FiniteVolume<Model>& fv, const Trajectory& traj,
                             const DualSolution& dual, const TargetFunctional<Model::kVars>& func) {
  constexpr int N = Model::kVars;
  check_trajectory_grid(fv, traj);
  const Mesh& mesh = fv.mesh();
  check_alignment(traj, dual, N, Model::kDim, mesh.num_cells());
  const FunctionalWeights<N> wts = functional_weights(func, mesh);
  const int nc = static_cast<int>(mesh.num_cells());

  ErrorBreakdown out;
  for (int m = 1; m < static_cast<int>(traj.records.size()); ++m) {
    const StepRecord& lo = traj.records[m - 1];
    const StepRecord& hi = traj.records[m];
    const double dt = hi.t - lo.t;
    const int theta = theta_of(hi.mode);
    const Field& before = m >= 2 ? traj.records[m - 2].field : lo.field;
    const double psi_factor = wts.has_interior ? func.interior_overlap(lo.t, hi.t) / dt : 0.0;
    double signed_sum = 0.0, abs_sum = 0.0, consistent = 0.0;
    for (int c = 0; c < nc; ++c) {
      const double vol = mesh.cell(c).volume;
      const State<N> s = slope_weight(fv, traj, dual, wts, psi_factor, m, c);
      const State<N> step = fv.cell_state(hi.field, c) - fv.cell_state(lo.field, c);
      const State<N> diff = theta == 1 ? step : State<N>(fv.cell_state(lo.field, c) - fv.cell_state(before, c));
      const double local = vol * diff.dot(s);
      signed_sum += local;
      abs_sum += std::abs(local);
      consistent += vol * step.dot(s);
    }
    out.eta_k += 0.5 * dt * signed_sum;
    out.eta_k_consistent += 0.5 * dt * (1 - 2 * theta) * consistent;
    out.intervals.push_back({m, hi.t, dt, 0.5 * abs_sum});
    out.eta_k_bar += dt * 0.5 * abs_sum;
  }
  out.eta = out.eta_k + out.eta_h;
  return out;
}

template <class Model>
void compute_eta_h(const FiniteVolume<Model>& fv, const Trajectory& traj, const DualSolution& dual,
                   ErrorBreakdown& out) {
  constexpr int N = Model::kVars;
  check_alignment(traj, dual, N, Model::kDim, fv.mesh().num_cells());
  out.eta_h_cells.assign(fv.mesh().num_cells(), 0.0);
  out.eta_h_bar = 0.0;
  const TestFunction<N> phi = [&](int m, int c) {
    LocalTest<N> lt;
    lt.gradient = slab_gradient<N>(dual, m, c);
    return lt;
  };
  const LocalSink sink = [&](int, int c, double v) {
    out.eta_h_bar += std::abs(v);
    out.eta_h_cells[c] += std::abs(v);
  };
  out.eta_h = semilinear_form(fv, traj, phi, sink);
  out.eta = out.eta_k + out.eta_h;
}

template <class Model>
ErrorBreakdown compute_breakdown(const FiniteVolume<Model>& fv, const Trajectory& traj,
                                 const DualSolution& dual, const TargetFunctional<Model::kVars>& func) {
  ErrorBreakdown b = compute_eta_k(fv, traj, dual, func);
  compute_eta_h(fv, traj, dual, b);
  return b;
}

template <class Model>
double reconstructed_residual(const FiniteVolume<Model>& fv, const Trajectory& traj,
                              const DualSolution& dual, const TargetFunctional<Model::kVars>& func) {
  constexpr int N = Model::kVars;
  check_trajectory_grid(fv, traj);
  check_alignment(traj, dual, N, Model::kDim, fv.mesh().num_cells());
  const FunctionalWeights<N> wts = functional_weights(func, fv.mesh());
  const TestFunction<N> phi = [&](int m, int c) {
    const double dt = traj.records[m].t - traj.records[m - 1].t;
    const double psi_factor =
        wts.has_interior ? func.interior_overlap(traj.records[m - 1].t, traj.records[m].t) / dt : 0.0;
    LocalTest<N> lt;
    lt.time_slope = slope_weight(fv, traj, dual, wts, psi_factor, m, c);
    lt.gradient = slab_gradient<N>(dual, m, c);
    return lt;
  };
  return semilinear_form(fv, traj, phi);
}

double efficiency_index(const ErrorBreakdown& b, double j_coarse, double j_reference) {
  const double denom = j_reference - j_coarse;
  if (std::abs(denom) < 1e-14) throw ArgumentError("efficiency index undefined: J_reference - J_coarse is below 1e-14");
  return (b.eta_h + b.eta_k) / denom;
}

#define ADJSTEP_INSTANTIATE(Model)                                                             \
  template ErrorBreakdown compute_eta_k(const FiniteVolume<Model>&, const Trajectory&,        \
                                        const DualSolution&, const TargetFunctional<Model::kVars>&); \
  template void compute_eta_h(const FiniteVolume<Model>&, const Trajectory&, const DualSolution&, \
                              ErrorBreakdown&);                                                \
  template ErrorBreakdown compute_breakdown(const FiniteVolume<Model>&, const Trajectory&,    \
                                            const DualSolution&,                              \
                                            const TargetFunctional<Model::kVars>&);           \
  template double reconstructed_residual(const FiniteVolume<Model>&, const Trajectory&,       \
                                         const DualSolution&, const TargetFunctional<Model::kVars>&);
ADJSTEP_INSTANTIATE(Burgers1D)
ADJSTEP_INSTANTIATE(LinearAdvection1D)
ADJSTEP_INSTANTIATE(Euler2D)
#undef ADJSTEP_INSTANTIATE

}  // namespace adjstep
