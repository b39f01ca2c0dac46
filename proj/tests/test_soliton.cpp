#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gplab/soliton.hpp"

using namespace gplab;

// Values of the closed forms at c = 1, x = 2, computed independently at 30 digits.
constexpr double kEta1At2 = 0.209987170807;
constexpr double kVee1At2 = 0.132901114417;

TEST(Soliton, RejectsInvalidSpeeds) {
  EXPECT_THROW(SolitonParams{0.0}, DomainError);
  EXPECT_THROW(SolitonParams{kSqrt2}, DomainError);
  EXPECT_THROW(SolitonParams{-1.5}, DomainError);
  EXPECT_THROW(SolitonParams{NAN}, DomainError);
  EXPECT_NO_THROW(SolitonParams(-1.0, 3.0).c());
}

TEST(Soliton, PointValues) {
  const SolitonPoint q0 = soliton_point(1.0, 0.0);
  EXPECT_DOUBLE_EQ(q0.eta, 0.5);
  EXPECT_DOUBLE_EQ(q0.vee, 0.5);
  const SolitonPoint q2 = soliton_point(1.0, 2.0);
  EXPECT_NEAR(q2.eta, kEta1At2, 1e-12);
  EXPECT_NEAR(q2.vee, kVee1At2, 1e-12);
  // Peak curvature.
  EXPECT_NEAR(q0.dd_eta, 1.0 * 0.5 - 3.0 * 0.25, 1e-15);
}

TEST(Soliton, VanishingAmplitudeLimit) {
  const double c = kSqrt2 * (1.0 - 1e-12);
  for (double y : {-3.0, 0.0, 5.0}) {
    const SolitonPoint q = soliton_point(c, y);
    EXPECT_LT(q.eta, 1e-11);
    EXPECT_LT(std::abs(q.vee), 1e-11);
  }
}

TEST(Soliton, WaveForm) {
  const SolitonParams p(1.0);
  const auto u0 = eval_wave(p, 0.0);
  EXPECT_NEAR(u0.real(), 0.0, 1e-16);
  EXPECT_NEAR(u0.imag(), 1.0 / kSqrt2, 1e-15);
  const auto uinf = eval_wave(p, 80.0);
  EXPECT_NEAR(uinf.real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(uinf.imag(), 1.0 / kSqrt2, 1e-15);
  for (double c : {-1.2, 0.4, 1.0}) {
    const SolitonParams pc(c, 0.7);
    for (double x = -10.0; x <= 10.0; x += 0.37)
      EXPECT_NEAR(std::norm(eval_wave(pc, x)) + soliton_point(c, x - 0.7).eta, 1.0, 1e-14);
  }
}

TEST(Soliton, SpeedDerivative) {
  const Grid g(60.0, 1024);
  const SolitonParams p(1.0);
  const PairField d = d_dc_profile(p, g);
  EXPECT_NEAR(d.first[g.size() / 2], -1.0, 1e-14);
  // Central difference in c.
  const double h = 1e-4;
  const SolitonProfile qp = eval_hydro(SolitonParams(1.0 + h), g);
  const SolitonProfile qm = eval_hydro(SolitonParams(1.0 - h), g);
  const Field fd_eta = (qp.eta - qm.eta) / (2.0 * h);
  const Field fd_vee = (qp.vee - qm.vee) / (2.0 * h);
  EXPECT_LT((fd_eta - d.first).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((fd_vee - d.second).cwiseAbs().maxCoeff(), 1e-7);
  // Even in x on the symmetric grid (node j and N - j).
  for (int j = 1; j < g.size() / 2; ++j) EXPECT_NEAR(d.first[j], d.first[g.size() - j], 1e-13);
}

TEST(Soliton, ConservedClosedForms) {
  const SolitonConserved s = conserved_closed(1.0);
  EXPECT_DOUBLE_EQ(s.energy, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.dmomentum_dc, -1.0);
  EXPECT_NEAR(s.momentum, std::numbers::pi / 4.0 - 0.5, 1e-12);
  EXPECT_NEAR(momentum_closed(1.0), 0.2853981634, 1e-10);
  for (double c : {-1.1, 0.3, 0.8, 1.3}) {
    EXPECT_NEAR(conserved_closed(c).momentum, momentum_closed(c), 1e-11);
    const double h = 1e-4;
    const double dp = (conserved_closed(c + h).momentum - conserved_closed(c - h).momentum) / (2.0 * h);
    EXPECT_NEAR(dp, -std::sqrt(2.0 - c * c), 1e-6);
  }
}

TEST(Soliton, QuadratureEnergyMatchesClosedForm) {
  for (double c : {0.5, 1.0, 1.3}) {
    const double L = default_half_length(c);
    const Grid g(L, 4096);
    const SolitonProfile q = eval_hydro(SolitonParams(c), g);
    const Field dens = (q.d_eta.array().square() / (8.0 * (1.0 - q.eta.array())) +
                        0.5 * (1.0 - q.eta.array()) * q.vee.array().square() + 0.25 * q.eta.array().square())
                           .matrix();
    EXPECT_NEAR(integrate(g, dens), conserved_closed(c).energy, 1e-10) << "c = " << c;
  }
}

TEST(Soliton, PointwiseInvariants) {
  for (double c : {-1.3, -0.4, 0.2, 0.9, 1.4}) {
    const double s2 = 2.0 - c * c;
    for (double y = -40.0; y <= 40.0; y += 0.173) {
      const SolitonPoint q = soliton_point(c, y);
      EXPECT_GT(q.eta, 0.0);
      EXPECT_LE(q.eta, s2 / 2.0 + 1e-16);
      EXPECT_GE(1.0 - q.eta, c * c / 2.0 - 1e-15);
      EXPECT_GE(q.mu, c * c / 2.0 * q.eta * (1.0 - 1e-14));
      if (std::abs(y) >= 1.0) {
        // The bound is asymptotically sharp, so allow rounding.
        EXPECT_LE(q.eta, 2.0 * s2 * std::exp(-std::sqrt(s2) * std::abs(y)) * (1.0 + 1e-14));
      }
    }
  }
}

TEST(Soliton, ParityOnSymmetricGrid) {
  const Grid g(60.0, 1024);
  const SolitonProfile q = eval_hydro(SolitonParams(0.8), g);
  const int n = g.size();
  for (int j = 1; j < n / 2; ++j) {
    EXPECT_NEAR(q.eta[j], q.eta[n - j], 1e-13);
    EXPECT_NEAR(q.vee[j], q.vee[n - j], 1e-13);
    EXPECT_NEAR(q.d_eta[j], -q.d_eta[n - j], 1e-13);
  }
}

TEST(Soliton, ProfileResiduals) {
  for (double c : {0.5, 1.0, 1.3}) {
    const ProfileResidual r = profile_residual(SolitonParams(c), Grid(60.0, 1024));
    EXPECT_LT(r.second_order, 1e-8) << c;
    EXPECT_LT(r.first_integral, 1e-8) << c;
    EXPECT_LT(r.travelling_wave, 1e-8) << c;
    EXPECT_LT(r.wave_ode, 1e-8) << c;
  }
  // c = 1: the solver's right-hand side is also at the floor.
  EXPECT_LT(profile_residual(SolitonParams(1.0), Grid(60.0, 1024)).solver_rhs, 1e-8);
  const ProfileResidual wide = profile_residual(SolitonParams(0.3), Grid(120.0, 2048));
  EXPECT_LT(std::max({wide.second_order, wide.first_integral, wide.travelling_wave}), 1e-8);
  EXPECT_FALSE(wide.under_resolved);
  // Too small a box for c = 1.3 leaves the profile cut off at the edge.
  EXPECT_TRUE(profile_residual(SolitonParams(1.3), Grid(20.0, 256)).under_resolved);
}
