#include "adjstep/forward.hpp"

#include "adjstep/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adjstep {

const char* to_string(StepMode mode) {
  return mode == StepMode::kExplicit ? "explicit" : "implicit";
}

StepMode parse_step_mode(const std::string& s) {
  if (s == "explicit") return StepMode::kExplicit;
  if (s == "implicit") return StepMode::kImplicit;
  throw ConfigError("unknown step mode '" + s + "'");
}

bool Trajectory::has_fields() const {
  return std::all_of(records.begin(), records.end(),
                     [](const StepRecord& r) { return r.field.size() > 0; });
}

int Trajectory::implicit_steps() const {
  int n = 0;
  for (std::size_t m = 1; m < records.size(); ++m) n += records[m].mode == StepMode::kImplicit;
  return n;
}

long Trajectory::total_newton() const {
  long n = 0;
  for (const StepRecord& r : records) n += r.newton_iters;
  return n;
}

long Trajectory::total_linear() const {
  long n = 0;
  for (const StepRecord& r : records) n += r.linear_iters;
  return n;
}

template <class Model>
FiniteVolume<Model>::FiniteVolume(const Mesh& mesh, Model model, BoundarySpec<N> boundary)
    : mesh_(&mesh), model_(std::move(model)), boundary_(std::move(boundary)) {
  for (const Face& f : mesh.faces())
    if (f.is_boundary()) boundary_.at(f.tag);  // fail early on missing data
}

template <class Model>
void FiniteVolume<Model>::check_field(const Field& u) const {
  if (u.size() != static_cast<Eigen::Index>(mesh_->num_cells()) * N)
    throw ArgumentError("field size does not match mesh");
  for (int c = 0; c < static_cast<int>(mesh_->num_cells()); ++c) model_.check(cell_state(u, c), c);
}

template <class Model>
auto FiniteVolume<Model>::face_flux(const Field& u, const SlabBoundary<N>& sb, int f) const -> S {
  const Face& fc = mesh_->face(f);
  const S ul = cell_state(u, fc.left);
  if (fc.is_boundary()) return boundary_flux(model_, ul, sb.data(fc.tag), fc.normal, sb.kind_of(fc.tag));
  return roe_flux(model_, ul, cell_state(u, fc.right), fc.normal);
}

template <class Model>
double FiniteVolume<Model>::residual(const Field& u, const SlabBoundary<N>& sb, Field& r) const {
  r.setZero(u.size());
  double magnitude = 0.0;
  const auto faces = mesh_->faces();
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& fc = faces[f];
    const S flux = fc.area * face_flux(u, sb, f);
    r.template segment<N>(fc.left * N) += flux;
    if (!fc.is_boundary()) r.template segment<N>(fc.right * N) -= flux;
    magnitude += flux.template lpNorm<1>();
  }
  return magnitude;
}

template <class Model>
void FiniteVolume<Model>::add_residual_jacobian(const Field& u, const SlabBoundary<N>& sb,
                                                double scale, BlockMatrix<N>& jac) const {
  const auto faces = mesh_->faces();
  M dl, dr;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& fc = faces[f];
    const S ul = cell_state(u, fc.left);
    const double w = scale * fc.area;
    if (fc.is_boundary()) {
      jac.add_diagonal(fc.left, w * boundary_flux_jacobian(model_, ul, fc.normal, sb.kind_of(fc.tag)));
      continue;
    }
    roe_flux_jacobians(model_, ul, cell_state(u, fc.right), fc.normal, dl, dr);
    dl *= w;
    dr *= w;
    jac.add_face(f, dl, dr, -dl, -dr);
  }
}

template <class Model>
auto FiniteVolume<Model>::boundary_flux_total(const Field& u, const SlabBoundary<N>& sb) const -> S {
  S total = S::Zero();
  const auto faces = mesh_->faces();
  for (int f = 0; f < static_cast<int>(faces.size()); ++f)
    if (faces[f].is_boundary()) total += faces[f].area * face_flux(u, sb, f);
  return total;
}

template <class Model>
auto FiniteVolume<Model>::total_conserved(const Field& u) const -> S {
  S total = S::Zero();
  for (int c = 0; c < static_cast<int>(mesh_->num_cells()); ++c)
    total += mesh_->cell(c).volume * cell_state(u, c);
  return total;
}

template <class Model>
double FiniteVolume<Model>::cfl_timestep(const Field& u, double cfl) const {
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(mesh_->num_cells()); ++c) {
    const double s = model_.max_wave_speed(cell_state(u, c));
    if (s > 0.0) best = std::min(best, mesh_->cell(c).length_scale / s);
  }
  if (!std::isfinite(best)) throw ArgumentError("zero wave speed everywhere: time step is unbounded");
  return cfl * best;
}

template <class Model>
Field FiniteVolume<Model>::explicit_step(const Field& u, double t, double dt) const {
  const SlabBoundary<N> sb = freeze(t, t + dt);
  Field r;
  residual(u, sb, r);
  Field out = u;
  for (int c = 0; c < static_cast<int>(mesh_->num_cells()); ++c) {
    out.template segment<N>(c * N) -= (dt / mesh_->cell(c).volume) * r.template segment<N>(c * N);
    model_.check(cell_state(out, c), c);
  }
  return out;
}

namespace {

template <class Model>
bool admissible_field(const Model& model, const Field& u) {
  constexpr int N = Model::kVars;
  for (Eigen::Index c = 0; c < u.size() / N; ++c) {
    try {
      model.check(u.template segment<N>(c * N), static_cast<int>(c));
    } catch (const StateError&) {
      return false;
    }
  }
  return true;
}

}  // namespace

template <class Model>
Field FiniteVolume<Model>::implicit_step(const Field& u_old, double t, double dt,
                                         const SchemeConfig& cfg, StepStats& stats) const {
  const SlabBoundary<N> sb = freeze(t, t + dt);
  const int nc = static_cast<int>(mesh_->num_cells());
  if (!jac_) jac_.emplace(*mesh_);
  BlockMatrix<N>& jac = *jac_;

  Field u = u_old;
  Field r, g(u.size());
  auto eval = [&](const Field& state) {
    const double mag = residual(state, sb, r);
    for (int c = 0; c < nc; ++c)
      g.template segment<N>(c * N) =
          mesh_->cell(c).volume * (state.template segment<N>(c * N) - u_old.template segment<N>(c * N)) +
          dt * r.template segment<N>(c * N);
    return mag;
  };

  double vol_norm = 0.0;
  for (int c = 0; c < nc; ++c) vol_norm += mesh_->cell(c).volume * cell_state(u_old, c).template lpNorm<1>();
  const double mag = eval(u);
  const double floor = 1e-14 * (vol_norm + dt * mag);
  double res = g.lpNorm<1>();
  stats = StepStats{};
  stats.initial_residual = res;
  stats.residual_history.push_back(res);
  const double target = std::max(cfg.newton_tol * res, floor);
  Field delta;
  while (res > target) {
    if (stats.newton_iters >= cfg.newton_max)
      throw NonconvergenceError("Newton iteration did not converge", res);
    jac.set_zero();
    for (int c = 0; c < nc; ++c) jac.add_diagonal(c, mesh_->cell(c).volume * M::Identity());
    add_residual_jacobian(u, sb, dt, jac);
    const LinearSolveStats ls = solve_block_system(jac, Field(-g), delta, cfg.linear_tol, cfg.linear_max);
    ++stats.newton_iters;
    stats.linear_iters += ls.iterations;

    double lambda = 1.0;
    Field trial = u + delta;
    int cuts = 0;
    while (!admissible_field(model_, trial)) {
      if (++cuts > 12) throw StateError("Newton update left the admissible set");
      lambda *= 0.5;
      trial = u + lambda * delta;
    }
    u = std::move(trial);
    eval(u);
    res = g.lpNorm<1>();
    stats.residual_history.push_back(res);
    if (!std::isfinite(res)) throw NonconvergenceError("Newton residual is not finite", res);
  }
  stats.final_residual = res;
  return u;
}

template <class Model>
double FiniteVolume<Model>::pseudo_time_step(Field& u, double cfl, const SlabBoundary<N>& sb,
                                             const SchemeConfig& cfg, int& linear_iters) const {
  const int nc = static_cast<int>(mesh_->num_cells());
  if (!jac_) jac_.emplace(*mesh_);
  BlockMatrix<N>& jac = *jac_;
  Field r;
  residual(u, sb, r);
  const double norm = r.lpNorm<1>();
  jac.set_zero();
  for (int c = 0; c < nc; ++c) {
    const Cell& cell = mesh_->cell(c);
    const double dt = cfl * cell.length_scale / model_.max_wave_speed(cell_state(u, c));
    jac.add_diagonal(c, (cell.volume / dt) * M::Identity());
  }
  add_residual_jacobian(u, sb, 1.0, jac);
  Field delta;
  const LinearSolveStats ls = solve_block_system(jac, Field(-r), delta, cfg.linear_tol, cfg.linear_max);
  linear_iters = ls.iterations;
  double lambda = 1.0;
  Field trial = u + delta;
  int cuts = 0;
  while (!admissible_field(model_, trial)) {
    if (++cuts > 12) throw StateError("pseudo-time update left the admissible set");
    lambda *= 0.5;
    trial = u + lambda * delta;
  }
  u = std::move(trial);
  return norm;
}

template <class Model>
Trajectory FiniteVolume<Model>::run(const Field& initial, const StepSchedule& schedule,
                                    const SchemeConfig& cfg, const RunOptions& options) const {
  check_field(initial);
  Trajectory tr;
  tr.n_vars = N;
  tr.level = mesh_->level();
  tr.mesh_hash = mesh_->hash();
  StepRecord first;
  first.mode = schedule.is_planned() ? schedule.steps.front().mode : schedule.mode;
  if (options.keep_fields) first.field = initial;
  tr.records.push_back(first);

  Field u = initial;
  double t = 0.0;
  const double T = schedule.final_time;
  if (!(T > 0.0)) throw ArgumentError("schedule has no positive final time");

  auto advance = [&](double dt, StepMode mode, double t_end_exact) {
    StepStats stats;
    Field next;
    if (mode == StepMode::kExplicit) {
      next = explicit_step(u, t, dt);
    } else {
      next = implicit_step(u, t, dt, cfg, stats);
    }
    StepRecord rec;
    rec.t = t_end_exact;
    rec.dt = dt;
    rec.mode = mode;
    rec.newton_iters = stats.newton_iters;
    rec.linear_iters = stats.linear_iters;
    rec.initial_residual = stats.initial_residual;
    rec.final_residual = stats.final_residual;
    if (options.keep_fields) rec.field = next;
    if (options.observer) options.observer(rec, next, u);
    tr.records.push_back(std::move(rec));
    u = std::move(next);
    t = t_end_exact;
  };

  auto step = [&](double dt, StepMode mode, double t_end_exact) {
    if (mode == StepMode::kImplicit && cfg.retry_with_half_step) {
      try {
        advance(dt, mode, t_end_exact);
        return;
      } catch (const NonconvergenceError&) {
      } catch (const StateError&) {
      }
      const double half = 0.5 * dt;
      advance(half, mode, t + half);
      advance(t_end_exact - t, mode, t_end_exact);
      return;
    }
    advance(dt, mode, t_end_exact);
  };

  try {
    if (schedule.is_planned()) {
      double acc = 0.0;
      for (std::size_t k = 0; k < schedule.steps.size(); ++k) {
        const PlannedStep& p = schedule.steps[k];
        acc += p.dt;
        const double t_end = (k + 1 == schedule.steps.size()) ? T : acc;
        step(t_end - t, p.mode, t_end);
      }
    } else {
      while (t < T) {
        double dt = cfl_timestep(u, schedule.cfl);
        double t_end = t + dt;
        if (t_end >= T * (1.0 - 1e-12)) t_end = T;
        step(t_end - t, schedule.mode, t_end);
      }
    }
  } catch (const NonconvergenceError& e) {
    throw RunAborted<NonconvergenceError>(e, std::move(tr));
  } catch (const StateError& e) {
    throw RunAborted<StateError>(e, std::move(tr));
  }
  return tr;
}

template class FiniteVolume<Burgers1D>;
template class FiniteVolume<LinearAdvection1D>;
template class FiniteVolume<Euler2D>;

}  // namespace adjstep
