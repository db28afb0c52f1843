#include "adjstep/adjoint.hpp"
#include "adjstep/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adjstep;

namespace {

constexpr double kSpeed = 1.0, kCenter = 0.3, kHalf = 0.2, kT0 = 0.5, kT = 1.0;

double psi(double x) {
  const double s = (x - kCenter) / kHalf;
  return std::abs(s) >= 1.0 ? 0.0 : (1.0 - s * s) * (1.0 - s * s);
}

// w = ∂φ/∂x for φ_t + a φ_x = ψ χ_[t0,T), φ(T) = 0, integrated along characteristics.
double w_exact(double x, double t) {
  const double ts = std::max(t, kT0);
  if (ts >= kT) return 0.0;
  return -(psi(x + kSpeed * (kT - t)) - psi(x + kSpeed * (ts - t))) / kSpeed;
}

struct AdvectionCase {
  Mesh mesh;
  FiniteVolume<LinearAdvection1D> fv;
  explicit AdvectionCase(int n) : mesh(build_interval_mesh(-1.0, 1.0, n)), fv(mesh, LinearAdvection1D{kSpeed}, bc()) {}
  static BoundarySpec<1> bc() {
    BoundarySpec<1> b;
    b.set_constant(BoundaryTag::kInflow, State<1>(0.0));
    b.set_constant(BoundaryTag::kOutflow, State<1>(0.0));
    return b;
  }
};

double dual_error_at_start(int n) {
  AdvectionCase c(n);
  const Trajectory tr = c.fv.run(Field::Zero(n), StepSchedule::uniform(0.5, StepMode::kExplicit, kT), SchemeConfig{});
  const DualSolution d = run_adjoint(c.fv, tr, interval_bump_functional(kCenter, kHalf, kT0, kT));
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const Cell& cell = c.mesh.cell(i);
    err += cell.volume * std::abs(d.w[0][i] - w_exact(cell.centroid.x(), 0.0));
  }
  return err;
}

}  // namespace

TEST(Adjoint, AdvectionMatchesCharacteristicsToFirstOrder) {
  // The quartic window spans only a few cells below N = 200; the rate is asymptotic from there.
  const double e1 = dual_error_at_start(400), e2 = dual_error_at_start(800), e3 = dual_error_at_start(1600);
  EXPECT_GT(std::log2(e1 / e2), 0.8);
  EXPECT_GT(std::log2(e2 / e3), 0.8);
  // Relative to ||w||_1 = 2·max|ψ'|-scale quantities of order 1.
  EXPECT_LT(e3, 0.02);
}

TEST(Adjoint, ZeroFunctionalGivesZeroDual) {
  AdvectionCase c(20);
  const Trajectory tr = c.fv.run(Field::Zero(20), StepSchedule::uniform(0.5, StepMode::kExplicit, 0.5), SchemeConfig{});
  const DualSolution d = run_adjoint(c.fv, tr, interval_bump_functional(0.0, 0.2, 2.0, 3.0));
  ASSERT_EQ(d.num_levels(), tr.num_steps() + 1);
  for (const Field& w : d.w) EXPECT_EQ(w.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(d.t.front(), 0.0);
  EXPECT_EQ(d.t.back(), tr.final_time());
}

TEST(Adjoint, TerminalDataIsTransported) {
  // Without a source, w is advected backward: w(x, 0) = w_T(x + a T) away from the boundaries.
  AdvectionCase c(200);
  const double T = 0.5;
  const Trajectory tr = c.fv.run(Field::Zero(200), StepSchedule::uniform(0.9, StepMode::kExplicit, T), SchemeConfig{});
  DualOptions opts;
  Field wt(200);
  for (int i = 0; i < 200; ++i) wt[i] = psi(c.mesh.cell(i).centroid.x());
  opts.terminal = wt;
  const DualSolution d = run_adjoint(c.fv, tr, interval_bump_functional(0.0, 0.2, 2.0, 3.0), opts);
  double err = 0.0;
  for (int i = 0; i < 200; ++i) err += 0.01 * std::abs(d.w[0][i] - psi(c.mesh.cell(i).centroid.x() + kSpeed * T));
  EXPECT_LT(err, 0.05);
  EXPECT_NEAR(d.w.back()[100], wt[100], 0.0);
}

TEST(Adjoint, SourceIsGradientOfWeight) {
  const Mesh mesh = build_interval_mesh(-1.0, 1.0, 400);
  const Field g = dual_source(interval_bump_functional(kCenter, kHalf, 0.0, 1.0), mesh);
  ASSERT_EQ(g.size(), 400);
  for (int i = 0; i < 400; i += 9) {
    const double x = mesh.cell(i).centroid.x();
    const double h = 1e-6;
    EXPECT_NEAR(g[i], (psi(x + h) - psi(x - h)) / (2.0 * h), 0.05);
  }
}

TEST(Adjoint, WallTraceRemovesNormalMotion) {
  const Euler2D m{1.4};
  const State<4> u = m.from_primitive(1.2, 100.0, 50.0, 9e4);
  const Vec2 n(0.6, 0.8);
  const State<4> s = wall_trace_state(m, u, n);
  EXPECT_NEAR(s[1] * n.x() + s[2] * n.y(), 0.0, 1e-10);
  EXPECT_NEAR(m.pressure(s), 9e4, 1e-6);
  EXPECT_EQ(s[0], u[0]);
  EXPECT_EQ(wall_trace_state(Burgers1D{}, State<1>(2.0), n)[0], 2.0);
}

TEST(Adjoint, BumpDualIsFiniteAndNonTrivial) {
  const BumpScenario s = bump_channel_scenario();
  const Mesh mesh = s.mesh(0);
  FiniteVolume<Euler2D> fv(mesh, s.model(), s.boundary());
  const Field u0 = uniform_field<4>(mesh.num_cells(), s.freestream());
  std::vector<PlannedStep> steps(6, PlannedStep{s.final_time / 6, StepMode::kImplicit});
  const Trajectory tr = fv.run(u0, StepSchedule::planned(steps), SchemeConfig{});
  const DualSolution d = run_adjoint(fv, tr, s.functional());
  EXPECT_EQ(d.dim, 2);
  EXPECT_EQ(d.n_vars, 4);
  const std::vector<double> norms = dual_norms(d, mesh);
  EXPECT_EQ(norms.back(), 0.0);
  EXPECT_GT(norms.front(), 0.0);
  for (const Field& w : d.w) EXPECT_TRUE(w.allFinite());
}
