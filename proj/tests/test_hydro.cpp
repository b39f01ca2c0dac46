#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gplab/hydro.hpp"

using namespace gplab;

namespace {

constexpr double kPi = std::numbers::pi;

// Q_1 plus a Gaussian bump in eta scaled to X-norm alpha.
HydroState perturbed_soliton(const Grid& g, double alpha) {
  HydroState s = soliton_state(SolitonParams(1.0), g);
  PairField bump = PairField::zero(g.size());
  for (int j = 0; j < g.size(); ++j) bump.first[j] = std::exp(-std::pow(g.node(j) - 3.0, 2) / 4.0);
  bump *= alpha / norm_X(g, bump);
  return HydroState(s.pair() + bump, 0.0);
}

double interior_X(const Grid& g, const PairField& d) { return norm_X_window(g, d, 0.0, g.half_length() / 2); }

}  // namespace

TEST(HydroRhs, TravellingWaveRelation) {
  const Grid g(60.0, 1024);
  const SolitonProfile q = eval_hydro(SolitonParams(1.0), g);
  const PairField r = hgp_rhs(g, HydroState(q.eta, q.vee));
  EXPECT_LT((r.first + q.d_eta).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((r.second + q.d_vee).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(HydroRhs, VacuumIsFixed) {
  const Grid g(20.0, 64);
  const PairField r = hgp_rhs(g, HydroState(Field::Zero(64), Field::Zero(64)));
  EXPECT_EQ(r.first.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.second.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HydroRhs, GuardRejectsNearCavitation) {
  const Grid g(20.0, 64);
  Field eta = Field::Zero(64);
  eta[10] = 0.9995;
  EXPECT_THROW(hgp_rhs(g, HydroState(eta, Field::Zero(64))), GuardError);
  EXPECT_NO_THROW(hgp_rhs(g, HydroState(eta, Field::Zero(64)), 1e-4));
}

TEST(HydroRhs, LinearDispersionRelation) {
  // Applying the rhs twice to a tiny cosine in eta returns -omega^2 times it.
  const double L = 20.0;
  const Grid g(L, 256);
  for (int m : {1, 5, 20}) {
    const double k = kPi * m / L;
    Field eta(g.size());
    for (int j = 0; j < g.size(); ++j) eta[j] = 1e-8 * std::cos(k * g.node(j));
    const PairField first = hgp_rhs(g, HydroState(eta, Field::Zero(g.size())));
    const PairField second = hgp_rhs(g, HydroState(Field::Zero(g.size()), first.second));
    const double ratio = -second.first.dot(eta) / eta.squaredNorm();
    EXPECT_NEAR(ratio, 2.0 * k * k + std::pow(k, 4), 1e-6 * (2.0 * k * k + std::pow(k, 4)));
  }
}

TEST(HydroIntegrate, LinearModeOscillatesAtDispersionFrequency) {
  const double L = 20.0;
  const Grid g(L, 256);
  const double k = kPi * 4 / L;
  const double omega = dispersion_omega(k);
  Field eta(g.size());
  for (int j = 0; j < g.size(); ++j) eta[j] = 1e-8 * std::cos(k * g.node(j));
  // omega T = 6 pi + pi/2 keeps the read-out sensitive to the frequency.
  const double T = (6.5 * kPi) / omega;
  const Trajectory tr = integrate(g, HydroState(eta, Field::Zero(g.size())), T);
  ASSERT_TRUE(tr.ok());
  const Field& e = tr.final_state().eta;
  const double amp = e.dot(eta) / eta.squaredNorm();
  const double est = (std::acos(amp) + 6.0 * kPi) / T;
  EXPECT_NEAR(est / omega, 1.0, 1e-4);
}

TEST(HydroIntegrate, ZeroHorizonReturnsInitialState) {
  const Grid g(60.0, 512);
  const HydroState s0 = soliton_state(SolitonParams(1.0), g);
  const Trajectory tr = integrate(g, s0, 0.0);
  ASSERT_EQ(tr.states.size(), 1u);
  EXPECT_EQ(tr.states[0].eta, s0.eta);
  EXPECT_EQ(tr.states[0].vee, s0.vee);
  EXPECT_THROW(integrate(g, s0, -1.0), DomainError);
}

TEST(HydroIntegrate, DefaultStepFromDispersion) {
  const Grid g(60.0, 1024);
  const double kmax = kPi * 512 / 60.0;
  EXPECT_DOUBLE_EQ(default_time_step(g), 1.4 / (kmax * std::sqrt(2.0 + kmax * kmax)));
}

TEST(HydroIntegrate, SolitonIsTransported) {
  const Grid g(60.0, 1024);
  const Trajectory tr = integrate(g, soliton_state(SolitonParams(1.0), g), 10.0);
  ASSERT_TRUE(tr.ok());
  ASSERT_EQ(tr.states.size(), 101u);
  EXPECT_DOUBLE_EQ(tr.final_state().t, 10.0);
  double prev = 0.0;
  for (std::size_t i = 10; i < tr.states.size(); i += 10) {
    const HydroState& s = tr.states[i];
    const PairField exact = soliton_state(SolitonParams(1.0, s.t), g).pair();
    const double dev = norm_X(g, s.pair() - exact);
    EXPECT_LE(dev - prev, 1e-7) << "t = " << s.t;
    prev = dev;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(HydroIntegrate, ConservationOnPerturbedSoliton) {
  const Grid g(60.0, 1024);
  const Trajectory tr = integrate(g, perturbed_soliton(g, 0.02), 20.0);
  ASSERT_TRUE(tr.ok());
  EXPECT_LT(tr.max_drift_E(), 1e-8);
  EXPECT_LT(tr.max_drift_P(), 1e-8);
  const DriftRecord& last = tr.drift.back();
  EXPECT_LT(std::abs(last.P - tr.drift.front().P), 1e-8);
}

TEST(HydroIntegrate, TimeReversal) {
  const Grid g(60.0, 1024);
  const HydroState s0 = perturbed_soliton(g, 0.02);
  const Trajectory fwd = integrate(g, s0, 3.0);
  ASSERT_TRUE(fwd.ok());
  const HydroState flipped(fwd.final_state().eta, -fwd.final_state().vee);
  const Trajectory back = integrate(g, flipped, 3.0);
  ASSERT_TRUE(back.ok());
  const PairField returned{back.final_state().eta, -back.final_state().vee};
  EXPECT_LT(norm_X(g, returned - s0.pair()), 1e-7);
}

TEST(HydroIntegrate, GuardTripGivesPartialTrajectory) {
  // A converging flow piles eta up at the origin.
  const Grid g(20.0, 256);
  Field vee(g.size());
  for (int j = 0; j < g.size(); ++j) vee[j] = -3.0 * g.node(j) * std::exp(-g.node(j) * g.node(j));
  IntegrateOptions opts;
  opts.sigma_guard = 0.5;
  const Trajectory tr = integrate(g, HydroState(Field::Zero(g.size()), vee), 5.0, opts);
  ASSERT_FALSE(tr.ok());
  EXPECT_EQ(tr.error->kind, RunError::Kind::guard);
  EXPECT_GT(tr.error->t, 0.0);
  EXPECT_GE(tr.states.size(), 1u);
  EXPECT_LT(tr.states.back().t, 5.0);
}

TEST(HydroIntegrate, UnstableStepIsReported) {
  const Grid g(60.0, 1024);
  IntegrateOptions opts;
  opts.dt = 0.05;
  const Trajectory tr = integrate(g, perturbed_soliton(g, 0.02), 5.0, opts);
  ASSERT_FALSE(tr.ok());
  EXPECT_GT(tr.error->step, 0);
}

TEST(Conserved, SolitonValues) {
  const Grid g(60.0, 1024);
  const Conserved c = conserved(g, soliton_state(SolitonParams(1.0), g));
  EXPECT_NEAR(c.E, 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(c.P, 0.2853982, 1e-7);
  const Conserved z = conserved(g, HydroState(Field::Zero(1024), Field::Zero(1024)));
  EXPECT_EQ(z.E, 0.0);
  EXPECT_EQ(z.P, 0.0);
}

TEST(Madelung, RoundTripAndModulus) {
  const Grid g(60.0, 1024);
  const HydroState s = soliton_state(SolitonParams(1.0), g);
  const WaveState w = madelung_to_wave(g, s, 0.3);
  for (int j = 0; j < g.size(); ++j) EXPECT_NEAR(std::abs(w.psi[j]), std::sqrt(1.0 - s.eta[j]), 1e-15);
  EXPECT_NEAR(w.wrap_phase, -kPi / 2.0, 1e-12);
  const HydroState back = wave_to_madelung(g, w);
  EXPECT_LT((back.eta - s.eta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((back.vee - s.vee).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Madelung, ConstantFieldIsVacuum) {
  const Grid g(10.0, 64);
  WaveState w;
  w.psi = ComplexField::Constant(64, 1.0);
  const HydroState s = wave_to_madelung(g, w);
  EXPECT_LT(s.eta.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(s.vee.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Madelung, VanishingModulusIsRejected) {
  const Grid g(10.0, 64);
  WaveState w;
  w.psi = ComplexField::Constant(64, 1.0);
  w.psi[5] = 0.0;
  EXPECT_THROW(wave_to_madelung(g, w), LiftingError);
  Field eta = Field::Zero(64);
  eta[3] = 1.0;
  EXPECT_THROW(madelung_to_wave(g, HydroState(eta, Field::Zero(64))), LiftingError);
}

TEST(Madelung, SolitonWaveStateAgreesWithLift) {
  const Grid g(60.0, 1024);
  const SolitonParams p(1.0);
  const WaveState w = soliton_wave_state(p, g);
  const HydroState s = wave_to_madelung(g, w);
  const HydroState q = soliton_state(p, g);
  EXPECT_LT((s.eta - q.eta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((s.vee - q.vee).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GpSolver, SolitonTranslatesInInterior) {
  const Grid g(60.0, 1024);
  const SolitonParams p(1.0);
  const GpTrajectory tr = gp_integrate(g, soliton_wave_state(p, g), 5.0);
  const WaveState& w = tr.states.back();
  EXPECT_DOUBLE_EQ(w.t, 5.0);
  double err = 0.0;
  for (int j = 0; j < g.size(); ++j)
    if (std::abs(g.node(j)) <= 30.0) err = std::max(err, std::abs(w.psi[j] - eval_wave(p.moved_to(5.0), g.node(j))));
  EXPECT_LT(err, 1e-5);
  EXPECT_TRUE(tr.warnings.empty());
}

TEST(GpSolver, StrangSplittingIsSecondOrder) {
  const Grid g(60.0, 1024);
  const SolitonParams p(1.0);
  auto interior_error = [&](double dt) {
    GpOptions o;
    o.dt = dt;
    const WaveState w = gp_integrate(g, soliton_wave_state(p, g), 2.0, o).states.back();
    double err = 0.0;
    for (int j = 0; j < g.size(); ++j)
      if (std::abs(g.node(j)) <= 30.0) err = std::max(err, std::abs(w.psi[j] - eval_wave(p.moved_to(2.0), g.node(j))));
    return err;
  };
  const double e1 = interior_error(0.01);
  const double e2 = interior_error(0.005);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}

TEST(GpSolver, CrossCheckAgainstHydroSolver) {
  const Grid g(60.0, 1024);
  const HydroState s0 = perturbed_soliton(g, 0.02);
  const Trajectory hydro = integrate(g, s0, 5.0);
  ASSERT_TRUE(hydro.ok());
  const GpTrajectory wave = gp_integrate(g, madelung_to_wave(g, s0), 5.0);
  const HydroState lifted = wave_to_madelung(g, wave.states.back());
  EXPECT_LT(interior_X(g, lifted.pair() - hydro.final_state().pair()), 1e-5);
}
