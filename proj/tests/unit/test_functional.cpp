#include "adjstep/functional.hpp"
#include "adjstep/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adjstep;

namespace {

// ∫ (1 - s^2)^2 over the support of a quartic window of half-width w.
double window_integral(double w) { return 16.0 * w / 15.0; }

template <class Model>
Trajectory constant_trajectory(const FiniteVolume<Model>& fv, const Field& u, const std::vector<double>& times) {
  Trajectory tr;
  tr.n_vars = Model::kVars;
  tr.mesh_hash = fv.mesh().hash();
  for (std::size_t k = 0; k < times.size(); ++k) {
    StepRecord r;
    r.t = times[k];
    r.dt = k == 0 ? 0.0 : times[k] - times[k - 1];
    r.field = u;
    tr.records.push_back(r);
  }
  return tr;
}

FiniteVolume<Burgers1D> burgers_fv(const Mesh& mesh) {
  BoundarySpec<1> bc;
  bc.set_constant(BoundaryTag::kInflow, State<1>(1.0));
  bc.set_constant(BoundaryTag::kOutflow, State<1>(1.0));
  return FiniteVolume<Burgers1D>(mesh, Burgers1D{}, bc);
}

}  // namespace

TEST(PressureWindow, ShapeAndSupport) {
  EXPECT_DOUBLE_EQ(pressure_window(1.0, 1.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(pressure_window(1.5, 1.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(pressure_window(0.2, 1.0, 0.5), 0.0);
  // s = 1/2: (1 - 1/4)^2.
  EXPECT_NEAR(pressure_window(1.25, 1.0, 0.5), 0.5625, 1e-15);
}

TEST(IntervalFunctional, ConstantStateGivesWindowIntegral) {
  const Mesh mesh = build_interval_mesh(-1.0, 1.0, 37);
  const auto fv = burgers_fv(mesh);
  const TargetFunctional<1> func = interval_bump_functional(0.1, 0.3, 0.0, 10.0);
  const Trajectory tr = constant_trajectory(fv, Field::Constant(37, 2.5), {0.0, 0.4, 1.0});
  EXPECT_NEAR(evaluate_functional(fv, tr, func), 2.5 * 1.0 * window_integral(0.3), 1e-13);
}

TEST(IntervalFunctional, HalfOpenTimeWindow) {
  const Mesh mesh = build_interval_mesh(-1.0, 1.0, 20);
  const auto fv = burgers_fv(mesh);
  const TargetFunctional<1> func = interval_bump_functional(0.0, 0.5, 1.0, 1.5);
  EXPECT_TRUE(func.interior_active(1.0));
  EXPECT_FALSE(func.interior_active(1.5));
  const Field u = Field::Constant(20, 1.0);
  FunctionalAccumulator<Burgers1D> acc(fv, func);
  EXPECT_EQ(acc.slab_value(0.0, 1.0, u), 0.0);
  EXPECT_NEAR(acc.slab_value(0.9, 1.1, u), 0.1 * window_integral(0.5), 1e-14);
  EXPECT_NEAR(acc.slab_value(1.4, 1.6, u), 0.1 * window_integral(0.5), 1e-14);
}

TEST(IntervalFunctional, UsesTheSlabEndState) {
  const Mesh mesh = build_interval_mesh(-1.0, 1.0, 10);
  const auto fv = burgers_fv(mesh);
  const TargetFunctional<1> func = interval_bump_functional(0.0, 1.0, 0.0, 1.0);
  Trajectory tr = constant_trajectory(fv, Field::Constant(10, 1.0), {0.0, 0.5, 1.0});
  tr.records[2].field.setConstant(3.0);
  EXPECT_NEAR(evaluate_functional(fv, tr, func), (0.5 * 1.0 + 0.5 * 3.0) * window_integral(1.0), 1e-13);
}

TEST(BumpFunctional, FreestreamPressureIntegral) {
  const BumpScenario s = bump_channel_scenario();
  const Mesh mesh = s.mesh(0);
  FiniteVolume<Euler2D> fv(mesh, s.model(), s.boundary());
  const double w = 0.25, T = 0.02;
  // Windows on the flat part of the wall, split by the face grid at non-nodal points.
  const TargetFunctional<4> func = bump_pressure_functional({-2.1, 1.9}, w, T);
  const Field u = uniform_field<4>(mesh.num_cells(), s.freestream());
  const double p = s.p_inf;
  EXPECT_NEAR(snapshot_boundary_integral(fv, u, func), -p * 2.0 * window_integral(w), 1e-9 * p);
  const Trajectory tr = constant_trajectory(fv, u, {0.0, 0.005, 0.0125, 0.02});
  EXPECT_NEAR(evaluate_functional(fv, tr, func), T * p * 2.0 * window_integral(w), 1e-9 * p * T);
}

TEST(BumpFunctional, InactiveOffTheBottomWall) {
  const BumpScenario s = bump_channel_scenario();
  const TargetFunctional<4> func = bump_pressure_functional({0.0}, 0.25, 1.0);
  Face top;
  top.patch = Patch::kTop;
  top.normal = Vec2(0.0, 1.0);
  EXPECT_EQ(func.boundary(Vec2(0.0, 2.0), top).norm(), 0.0);
  Face bottom;
  bottom.patch = Patch::kBottom;
  bottom.normal = Vec2(0.0, -1.0);
  EXPECT_DOUBLE_EQ(func.boundary(Vec2(0.0, 0.0), bottom)[2], 1.0);
}

TEST(Functional, TraceAccumulatesToValue) {
  const BurgersScenario s = burgers_perturbed_shock(0);
  const Mesh mesh = s.mesh();
  FiniteVolume<Burgers1D> fv(mesh, s.model(), s.boundary());
  const Trajectory tr =
      fv.run(s.initial(mesh), StepSchedule::uniform(0.5, StepMode::kExplicit, s.final_time), SchemeConfig{});
  const TargetFunctional<1> func = s.functional();
  const double j = evaluate_functional(fv, tr, func);
  const std::vector<TracePoint> trace = functional_trace(fv, tr, func);
  ASSERT_EQ(static_cast<int>(trace.size()), tr.num_steps());
  EXPECT_NEAR(trace.back().cumulative, j, 1e-14 * std::abs(j));
  double sum = 0.0;
  for (const TracePoint& p : trace) sum += p.integrand * p.dt;
  EXPECT_NEAR(sum, j, 1e-12 * std::abs(j));
  EXPECT_NEAR(evaluate_functional(fv, tr, func.scaled(-2.0)), -2.0 * j, 1e-13 * std::abs(j));
}

TEST(Functional, WeightsIntegrateTheWindow) {
  const Mesh mesh = build_interval_mesh(-1.0, 1.0, 13);
  const FunctionalWeights<1> w = functional_weights(interval_bump_functional(0.2, 0.4, 0.0, 1.0), mesh);
  double total = 0.0;
  for (const State<1>& c : w.cell) total += c[0];
  EXPECT_NEAR(total, window_integral(0.4), 1e-14);
  EXPECT_TRUE(w.has_interior);
  EXPECT_FALSE(w.has_boundary);
}
