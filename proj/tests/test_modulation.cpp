#include <gtest/gtest.h>

#include <cmath>

#include "gplab/modulation.hpp"

using namespace gplab;

namespace {

const Grid& grid() {
  static const Grid g(60.0, 1024);
  return g;
}

HydroState with_even_bump(double amplitude) {
  const Grid& g = grid();
  HydroState s = soliton_state(SolitonParams(1.0), g);
  for (int j = 0; j < g.size(); ++j) s.eta[j] += amplitude * std::exp(-g.node(j) * g.node(j) / 4.0);
  return s;
}

}  // namespace

TEST(Orthogonality, VanishesOnTheFamily) {
  const Grid& g = grid();
  const auto r = orthogonality_residual(g, soliton_state(SolitonParams(0.8, 1.5), g), 1.5, 0.8);
  EXPECT_LT(r.max_abs(), 1e-14);
}

TEST(Orthogonality, ShiftMismatchSign) {
  const Grid& g = grid();
  const SolitonProfile q = eval_hydro(SolitonParams(1.0), g);
  const double dq2 = inner_l2(g, q.d_pair(), q.d_pair());
  const auto r = orthogonality_residual(g, soliton_state(SolitonParams(1.0), g), 0.1, 1.0);
  EXPECT_GT(r.r1, 0.0);
  EXPECT_NEAR(r.r1 / (0.1 * dq2), 1.0, 0.02);
  const auto rm = orthogonality_residual(g, soliton_state(SolitonParams(1.0), g), -0.1, 1.0);
  EXPECT_LT(rm.r1, 0.0);
}

TEST(Orthogonality, SpeedMismatchFirstOrder) {
  const Grid& g = grid();
  const auto r = orthogonality_residual(g, soliton_state(SolitonParams(1.0), g), 0.0, 1.05);
  EXPECT_NEAR(r.r2, 0.05, 0.005);
  EXPECT_NEAR(r.r1, 0.0, 1e-13);
  EXPECT_THROW(orthogonality_residual(g, soliton_state(SolitonParams(1.0), g), 0.0, 1.41), DomainError);
}

TEST(InitialGuess, PeakLocation) {
  const Grid& g = grid();
  const auto [a, c] = initial_guess(g, soliton_state(SolitonParams(1.0, 3.0), g));
  EXPECT_NEAR(a, 3.0, 2 * g.dx());
  EXPECT_NEAR(c, 1.0, 1e-3);
  const auto [a2, c2] = initial_guess(g, soliton_state(SolitonParams(0.7, -5.0), g));
  EXPECT_NEAR(a2, -5.0, 2 * g.dx());
  EXPECT_NEAR(c2, 0.7, 1e-3);
  const auto [a3, c3] = initial_guess(g, soliton_state(SolitonParams(-1.2, 7.3), g));
  EXPECT_NEAR(a3, 7.3, 2 * g.dx());
  EXPECT_NEAR(c3, -1.2, 1e-3);
  EXPECT_THROW(initial_guess(g, HydroState(Field::Zero(g.size()), Field::Zero(g.size()))), ModulationError);
}

TEST(ModulationSolve, ExactRoot) {
  const Grid& g = grid();
  const ModulationPoint p = solve(g, soliton_state(SolitonParams(1.0, 2.0), g));
  EXPECT_NEAR(p.a, 2.0, 1e-10);
  EXPECT_NEAR(p.c, 1.0, 1e-10);
  EXPECT_LE(std::max(std::abs(p.r1), std::abs(p.r2)), 1e-12);
  EXPECT_LT(p.eps_norm_X, 1e-9);
}

TEST(ModulationSolve, RecoversParameterGrid) {
  // Slow solitons need a finer grid: v_c has complex poles near the real axis.
  const Grid g(60.0, 2048);
  for (double c0 : {-1.2, 0.5, 0.8, 1.0, 1.3}) {
    for (double a0 : {-10.0, -2.5, 0.0, 1.37, 12.0}) {
      const ModulationPoint p = solve(g, soliton_state(SolitonParams(c0, a0), g));
      EXPECT_NEAR(p.a, a0, 1e-10) << c0 << " " << a0;
      EXPECT_NEAR(p.c, c0, 1e-10) << c0 << " " << a0;
      EXPECT_LE(std::max(std::abs(p.r1), std::abs(p.r2)), 1e-12);
    }
  }
}

TEST(ModulationSolve, PerturbedSolitonAndLinearResponse) {
  const Grid& g = grid();
  const ModulationPoint p1 = solve(g, with_even_bump(0.01));
  const ModulationPoint p2 = solve(g, with_even_bump(0.005));
  EXPECT_LE(std::max(std::abs(p1.r1), std::abs(p1.r2)), 1e-12);
  EXPECT_LE(std::abs(p1.c - 1.0), 5.0 * 0.01);
  // Even bump: no shift by symmetry.
  EXPECT_NEAR(p1.a, 0.0, 1e-10);
  EXPECT_NEAR(p1.eps_norm_X / p2.eps_norm_X, 2.0, 0.4);
}

TEST(ModulationSolve, TranslationEquivariance) {
  const Grid& g = grid();
  const HydroState s = with_even_bump(0.01);
  const ModulationPoint p = solve(g, s);
  const double h = 3.7;
  const HydroState shifted(translate(g, s.eta, -h), translate(g, s.vee, -h));
  const ModulationPoint q = solve(g, shifted);
  EXPECT_NEAR(q.a, p.a + h, 1e-10);
  EXPECT_NEAR(q.c, p.c, 1e-10);
}

TEST(ModulationSolve, Errors) {
  const Grid& g = grid();
  const HydroState s = with_even_bump(0.01);
  EXPECT_THROW(solve(g, s, std::make_pair(20.0, 1.0)), ModulationError);
  ModulationOptions strict;
  strict.max_condition = 1.0;
  EXPECT_THROW(solve(g, s, strict), ModulationError);
  ModulationOptions short_run;
  short_run.max_iterations = 1;
  EXPECT_THROW(solve(g, s, std::make_pair(0.3, 1.1), short_run), ModulationError);
  EXPECT_THROW(solve(g, s, std::make_pair(0.0, 0.01)), DomainError);
}

TEST(FiniteDifference, ExactOnPolynomials) {
  std::vector<double> t, f;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.1 * i);
    f.push_back(std::pow(0.1 * i, 2) - 3.0 * 0.1 * i);
  }
  t.push_back(2.05);
  f.push_back(2.05 * 2.05 - 3.0 * 2.05);
  const auto d = finite_difference_derivative(t, f);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(d[i], 2.0 * t[i] - 3.0, 1e-11) << i;
}

TEST(Track, ExactSolitonOrbit) {
  const Grid& g = grid();
  const Trajectory traj = integrate(g, soliton_state(SolitonParams(1.0), g), 3.0);
  ASSERT_TRUE(traj.ok());
  const ModulationTrack tr = track(g, traj.states);
  ASSERT_EQ(tr.points.size(), traj.states.size());
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    EXPECT_NEAR(tr.points[i].c, 1.0, 1e-8);
    EXPECT_NEAR(tr.a_prime[i], 1.0, 1e-6);
  }
  EXPECT_LT(tr.sup_eps_norm(), 1e-7);
}

TEST(Track, QuadraticSpeedResponse) {
  const Grid& g = grid();
  auto run = [&](double alpha) {
    HydroState s = soliton_state(SolitonParams(1.0), g);
    PairField bump = PairField::zero(g.size());
    for (int j = 0; j < g.size(); ++j) bump.first[j] = std::exp(-std::pow(g.node(j) - 3.0, 2) / 4.0);
    bump *= alpha / norm_X(g, bump);
    const Trajectory traj = integrate(g, HydroState(s.pair() + bump), 5.0);
    return track(g, traj.states);
  };
  const ModulationTrack big = run(0.02);
  const ModulationTrack small = run(0.01);
  const double ratio = big.sup_c_prime() / small.sup_c_prime();
  EXPECT_GT(ratio, 3.2);
  EXPECT_LT(ratio, 4.8);
  const double A = big.sup_c_prime() / std::pow(big.sup_eps_norm(), 2);
  EXPECT_TRUE(std::isfinite(A));
  EXPECT_GT(A, 0.0);
}
