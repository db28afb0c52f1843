#include "adjstep/galerkin.hpp"

#include "adjstep/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace adjstep {

template <class Model>
void check_trajectory_grid(const FiniteVolume<Model>& fv, const Trajectory& traj) {
  const Mesh& mesh = fv.mesh();
  if (traj.records.size() < 2) throw ArgumentError("trajectory has no steps");
  if (traj.n_vars != Model::kVars) throw ArgumentError("trajectory has the wrong number of variables");
  if (traj.mesh_hash != 0 && traj.mesh_hash != mesh.hash())
    throw ArgumentError("trajectory was computed on a different mesh");
  const Eigen::Index expected = static_cast<Eigen::Index>(mesh.num_cells()) * Model::kVars;
  for (const StepRecord& r : traj.records)
    if (r.field.size() != expected) throw ArgumentError("trajectory fields do not match the mesh");
}

template <class Model>
double semilinear_form(const FiniteVolume<Model>& fv, const Trajectory& traj,
                       const TestFunction<Model::kVars>& phi, const LocalSink& sink) {
  constexpr int N = Model::kVars;
  using S = State<N>;
  check_trajectory_grid(fv, traj);
  const Mesh& mesh = fv.mesh();
  const Model& model = fv.model();
  const int nc = static_cast<int>(mesh.num_cells());

  std::vector<LocalTest<N>> local(nc);
  std::vector<double> contrib(nc);
  double total = 0.0;
  for (int m = 1; m < static_cast<int>(traj.records.size()); ++m) {
    const StepRecord& prev = traj.records[m - 1];
    const StepRecord& cur = traj.records[m];
    const double dt = cur.t - prev.t;
    const Field& u_old = prev.field;
    const Field& u_new = cur.field;
    const Field& u_star = theta_of(cur.mode) == 1 ? u_new : u_old;
    const SlabBoundary<N> sb = fv.freeze(prev.t, cur.t);

    for (int i = 0; i < nc; ++i) {
      local[i] = phi(m, i);
      const double vol = mesh.cell(i).volume;
      const S up = fv.cell_state(u_star, i);
      const S top = local[i].value + 0.5 * dt * local[i].time_slope;
      const S bottom = local[i].value - 0.5 * dt * local[i].time_slope;
      contrib[i] = vol * ((fv.cell_state(u_new, i) - up).dot(top) -
                          (fv.cell_state(u_old, i) - up).dot(bottom));
    }
    const auto faces = mesh.faces();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      const Face& fc = faces[f];
      const S flux = fv.face_flux(u_star, sb, f);
      const double w = fc.area * dt;
      {
        const int c = fc.left;
        const LocalTest<N>& lt = local[c];
        const Vec2 dx = fc.midpoint - mesh.cell(c).centroid;
        const S val = lt.value + lt.gradient.transpose() * dx;
        contrib[c] += w * (flux - model.flux(fv.cell_state(u_star, c), fc.normal)).dot(val);
      }
      if (!fc.is_boundary()) {
        const int c = fc.right;
        const LocalTest<N>& lt = local[c];
        const Vec2 dx = fc.midpoint - mesh.cell(c).centroid;
        const S val = lt.value + lt.gradient.transpose() * dx;
        contrib[c] += w * (model.flux(fv.cell_state(u_star, c), fc.normal) - flux).dot(val);
      }
    }
    for (int i = 0; i < nc; ++i) {
      total += contrib[i];
      if (sink) sink(m, i, contrib[i]);
    }
  }
  return total;
}

template <class Model>
OrthogonalityResult galerkin_orthogonality_check(const FiniteVolume<Model>& fv,
                                                 const Trajectory& traj, int n_random,
                                                 std::uint64_t seed) {
  constexpr int N = Model::kVars;
  check_trajectory_grid(fv, traj);
  OrthogonalityResult out;
  Field r;
  for (int m = 1; m < static_cast<int>(traj.records.size()); ++m) {
    const double dt = traj.records[m].t - traj.records[m - 1].t;
    fv.residual(traj.records[m - 1].field, fv.freeze(traj.records[m - 1].t, traj.records[m].t), r);
    out.scale += dt * r.template lpNorm<1>();
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int nc = static_cast<int>(fv.mesh().num_cells());
  const int n_slabs = traj.num_steps();
  for (int k = 0; k < n_random; ++k) {
    std::vector<State<N>> coeff(static_cast<std::size_t>(n_slabs) * nc);
    for (auto& c : coeff)
      for (int v = 0; v < N; ++v) c[v] = uni(rng);
    const TestFunction<N> phi = [&](int m, int i) {
      LocalTest<N> lt;
      lt.value = coeff[static_cast<std::size_t>(m - 1) * nc + i];
      return lt;
    };
    out.max_abs = std::max(out.max_abs, std::abs(semilinear_form(fv, traj, phi)));
  }
  return out;
}

#define ADJSTEP_INSTANTIATE(Model)                                                              \
  template void check_trajectory_grid(const FiniteVolume<Model>&, const Trajectory&);          \
  template double semilinear_form(const FiniteVolume<Model>&, const Trajectory&,               \
                                  const TestFunction<Model::kVars>&, const LocalSink&);        \
  template OrthogonalityResult galerkin_orthogonality_check(const FiniteVolume<Model>&,        \
                                                            const Trajectory&, int, std::uint64_t);
ADJSTEP_INSTANTIATE(Burgers1D)
ADJSTEP_INSTANTIATE(LinearAdvection1D)
ADJSTEP_INSTANTIATE(Euler2D)
#undef ADJSTEP_INSTANTIATE

}  // namespace adjstep
