/// @file numflux.hpp
/// @brief Roe interface flux, characteristic and wall boundary fluxes, and their
/// frozen-coefficient linearizations used by the Newton solver.
#pragma once

#include "adjstep/error.hpp"
#include "adjstep/mesh.hpp"
#include "adjstep/physics.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>

namespace adjstep {

enum class BoundaryKind : std::uint8_t { kCharacteristic, kWall };

/// Boundary data for one tag. `data(t0, t1)` returns the far-field state averaged
/// over [t0, t1]; unused for walls.
template <int N>
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::kCharacteristic;
  std::function<State<N>(double, double)> data;
};

template <int N>
class BoundarySpec {
 public:
  void set(BoundaryTag tag, BoundaryCondition<N> bc) { conditions_[tag] = std::move(bc); }
  void set_characteristic(BoundaryTag tag, std::function<State<N>(double, double)> data) {
    set(tag, {BoundaryKind::kCharacteristic, std::move(data)});
  }
  void set_constant(BoundaryTag tag, const State<N>& g) {
    set_characteristic(tag, [g](double, double) { return g; });
  }
  void set_wall(BoundaryTag tag) { set(tag, {BoundaryKind::kWall, {}}); }

  bool has(BoundaryTag tag) const { return conditions_.count(tag) != 0; }

  const BoundaryCondition<N>& at(BoundaryTag tag) const {
    auto it = conditions_.find(tag);
    if (it == conditions_.end())
      throw ConfigError(std::string("no boundary condition for tag '") + to_string(tag) + "'");
    if (it->second.kind == BoundaryKind::kCharacteristic && !it->second.data)
      throw ConfigError(std::string("missing far-field data for tag '") + to_string(tag) + "'");
    return it->second;
  }

 private:
  std::map<BoundaryTag, BoundaryCondition<N>> conditions_;
};

/// Boundary data frozen for one time slab, indexed by BoundaryTag.
template <int N>
struct SlabBoundary {
  std::array<BoundaryKind, 4> kind{};
  std::array<State<N>, 4> g{};
  std::array<bool, 4> used{};

  const State<N>& data(BoundaryTag tag) const { return g[static_cast<int>(tag)]; }
  BoundaryKind kind_of(BoundaryTag tag) const { return kind[static_cast<int>(tag)]; }
};

/// Evaluates the boundary data of every tag present on `mesh` for [t0, t1].
template <int N>
SlabBoundary<N> freeze_boundary(const BoundarySpec<N>& spec, const Mesh& mesh, double t0,
                                double t1) {
  SlabBoundary<N> sb;
  for (auto& g : sb.g) g.setZero();
  for (const Face& f : mesh.faces()) {
    if (!f.is_boundary()) continue;
    const int k = static_cast<int>(f.tag);
    if (sb.used[k]) continue;
    const BoundaryCondition<N>& bc = spec.at(f.tag);
    sb.used[k] = true;
    sb.kind[k] = bc.kind;
    if (bc.kind == BoundaryKind::kCharacteristic) sb.g[k] = bc.data(t0, t1);
  }
  return sb;
}

template <class Model>
using StateOf = State<Model::kVars>;
template <class Model>
using MatrixOf = Matrix<Model::kVars>;

template <class Model>
StateOf<Model> roe_flux(const Model& model, const StateOf<Model>& ul, const StateOf<Model>& ur,
                        const Vec2& n) {
  return 0.5 * (model.flux(ul, n) + model.flux(ur, n)) -
         0.5 * model.roe_abs_matrix(ul, ur, n) * (ur - ul);
}

/// Frozen-|A| linearization: dF/dU_L = (A(U_L) + |A_roe|)/2, dF/dU_R = (A(U_R) - |A_roe|)/2.
template <class Model>
void roe_flux_jacobians(const Model& model, const StateOf<Model>& ul, const StateOf<Model>& ur,
                        const Vec2& n, MatrixOf<Model>& d_left, MatrixOf<Model>& d_right) {
  const MatrixOf<Model> abs_a = model.roe_abs_matrix(ul, ur, n);
  d_left = 0.5 * (model.jacobian(ul, n) + abs_a);
  d_right = 0.5 * (model.jacobian(ur, n) - abs_a);
}

template <class Model>
constexpr bool kHasPressure = requires(const Model& m, const StateOf<Model>& u) { m.pressure(u); };

/// Pressure-only wall flux (0, p n_x, p n_y, 0).
template <class Model>
StateOf<Model> wall_flux(const Model& model, const StateOf<Model>& u, const Vec2& n) {
  if constexpr (kHasPressure<Model>) {
    const double p = model.pressure(u);
    StateOf<Model> f = StateOf<Model>::Zero();
    f[1] = p * n.x();
    f[2] = p * n.y();
    return f;
  } else {
    (void)model, (void)u, (void)n;
    throw ConfigError(std::string("wall boundaries are not defined for ") + Model::name());
  }
}

/// Characteristic flux P_+(U) f_n(U) + P_-(U) f_n(g), or the wall flux.
template <class Model>
StateOf<Model> boundary_flux(const Model& model, const StateOf<Model>& u,
                             const StateOf<Model>& g, const Vec2& n, BoundaryKind kind) {
  if (kind == BoundaryKind::kWall) return wall_flux(model, u, n);
  const auto pr = projections(model, u, n);
  return pr.plus * model.flux(u, n) + pr.minus * model.flux(g, n);
}

/// Outgoing part P_+(U) f_n(U) only; the boundary term of the target functional.
template <class Model>
StateOf<Model> outgoing_flux(const Model& model, const StateOf<Model>& u, const Vec2& n,
                             BoundaryKind kind) {
  if (kind == BoundaryKind::kWall) return wall_flux(model, u, n);
  return projections(model, u, n).plus * model.flux(u, n);
}

/// Linearization of boundary_flux in U with frozen projections (P_+ A for
/// characteristic faces, exact for walls).
template <class Model>
MatrixOf<Model> boundary_flux_jacobian(const Model& model, const StateOf<Model>& u,
                                       const Vec2& n, BoundaryKind kind) {
  if (kind == BoundaryKind::kWall) {
    if constexpr (kHasPressure<Model>) {
      MatrixOf<Model> d = MatrixOf<Model>::Zero();
      const StateOf<Model> dp = model.pressure_gradient(u);
      d.row(1) = n.x() * dp.transpose();
      d.row(2) = n.y() * dp.transpose();
      return d;
    } else {
      throw ConfigError(std::string("wall boundaries are not defined for ") + Model::name());
    }
  }
  const auto es = model.eigensystem(u, n);
  StateOf<Model> lam_plus;
  for (int k = 0; k < Model::kVars; ++k) lam_plus[k] = es.lambda[k] < 0.0 ? 0.0 : es.lambda[k];
  return es.R * lam_plus.asDiagonal() * es.L;
}

}  // namespace adjstep
