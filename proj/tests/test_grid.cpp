#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gplab/grid.hpp"
#include "gplab/soliton.hpp"

using namespace gplab;

namespace {

constexpr double kPi = std::numbers::pi;

Field sample(const Grid& g, double (*f)(double)) {
  Field out(g.size());
  for (int j = 0; j < g.size(); ++j) out[j] = f(g.node(j));
  return out;
}

}  // namespace

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(Grid(10.0, 15), DomainError);
  EXPECT_THROW(Grid(10.0, 8), DomainError);
  EXPECT_THROW(Grid(-1.0, 64), DomainError);
  const Grid g(10.0, 64);
  EXPECT_DOUBLE_EQ(g.dx() * g.size(), 20.0);
  EXPECT_DOUBLE_EQ(g.node(0), -10.0);
}

TEST(Grid, DerivativeOfFourierMode) {
  const double L = 7.0;
  const Grid g(L, 128);
  Field f(g.size()), df(g.size());
  for (int j = 0; j < g.size(); ++j) {
    f[j] = std::sin(kPi * g.node(j) / L);
    df[j] = (kPi / L) * std::cos(kPi * g.node(j) / L);
  }
  EXPECT_LT((derivative(g, f, 1) - df).cwiseAbs().maxCoeff(), 1e-12);
  const Field c = Field::Constant(g.size(), 3.5);
  for (int order = 1; order <= 4; ++order) EXPECT_LT(derivative(g, c, order).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_THROW(derivative(g, f, 0), DomainError);
  EXPECT_THROW(derivative(g, f, 5), DomainError);
}

TEST(Grid, DerivativeMatchesClosedFormProfile) {
  const Grid g(60.0, 1024);
  const SolitonProfile q = eval_hydro(SolitonParams(1.0), g);
  EXPECT_LT((derivative(g, q.eta, 1) - q.d_eta).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((derivative(g, q.eta, 2) - q.dd_eta).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Grid, OddDerivativeIsSkewAdjoint) {
  const Grid g(20.0, 256);
  const Field f = sample(g, [](double x) { return std::exp(-x * x / 8.0) * std::cos(x); });
  const Field h = sample(g, [](double x) { return 1.0 / std::cosh(0.7 * (x - 1.0)); });
  const double lhs = inner_l2(g, f, derivative(g, h, 1)) + inner_l2(g, derivative(g, f, 1), h);
  EXPECT_LE(std::abs(lhs), 1e-12 * std::sqrt(inner_l2(g, f, f) * inner_l2(g, h, h)));
  // Nyquist handling: d(d f) and d^2 f agree for resolved fields.
  const Field dd = derivative(g, derivative(g, f, 1), 1);
  const Field d2 = derivative(g, f, 2);
  EXPECT_LT((dd - d2).norm(), 1e-11 * d2.norm());
}

TEST(Grid, Parseval) {
  const Grid g(15.0, 200);
  const Field f = sample(g, [](double x) { return std::exp(-0.3 * x * x) * (1.0 + x); });
  const Spectrum s = g.forward(f);
  double spec = std::norm(s[0]) + std::norm(s[g.size() / 2]);
  for (int m = 1; m < g.size() / 2; ++m) spec += 2.0 * std::norm(s[m]);
  spec *= g.dx() / g.size();
  const double phys = inner_l2(g, f, f);
  EXPECT_NEAR(spec / phys, 1.0, 1e-12);
}

TEST(Grid, TranslateShiftsArgument) {
  const Grid g(30.0, 512);
  const Field f = sample(g, [](double x) { return std::exp(-x * x); });
  const Field t = translate(g, f, 1.3);
  for (int j = 0; j < g.size(); ++j) EXPECT_NEAR(t[j], std::exp(-std::pow(g.node(j) + 1.3, 2)), 1e-13);
}

TEST(Grid, CumulativeIntegral) {
  const Grid g(25.0, 512);
  const Field f = sample(g, [](double x) { return std::exp(-x * x); });
  const Field F = cumulative_integral(g, f);
  for (int j = 0; j < g.size(); j += 7)
    EXPECT_NEAR(F[j], 0.5 * std::sqrt(kPi) * (1.0 + std::erf(g.node(j))), 1e-13);
}

TEST(Grid, UpsampleInterpolates) {
  const double L = 10.0;
  const Grid g(L, 64);
  ComplexField f(g.size());
  for (int j = 0; j < g.size(); ++j) f[j] = std::polar(1.0, 3.0 * kPi * g.node(j) / L);
  const ComplexField up = upsample(g, f, 4);
  const Grid fine(L, 256);
  for (int j = 0; j < fine.size(); ++j)
    EXPECT_NEAR(std::abs(up[j] - std::polar(1.0, 3.0 * kPi * fine.node(j) / L)), 0.0, 1e-13);
}

TEST(Grid, InnerProductParityAndAngle) {
  const Grid g(60.0, 1024);
  const SolitonParams p(1.0);
  const SolitonProfile q = eval_hydro(p, g);
  const PairField dq = q.d_pair();
  const PairField swapped{q.vee, q.eta};
  EXPECT_NEAR(inner_l2(g, dq, swapped), 0.0, 1e-10);
  const PairField dc = d_dc_profile(p, g);
  const PairField s_dc{dc.second, dc.first};
  EXPECT_NEAR(inner_l2(g, q.pair(), s_dc), -2.0, 1e-8);
  const PairField zero = PairField::zero(g.size());
  EXPECT_EQ(inner_l2(g, zero, zero), 0.0);
  EXPECT_GT(inner_l2(g, q.pair(), q.pair()), 0.0);
  EXPECT_THROW(inner_l2(g, q.pair(), PairField::zero(10)), DomainError);
}

TEST(Grid, NormX) {
  const Grid g(60.0, 1024);
  const SolitonProfile q = eval_hydro(SolitonParams(1.0), g);
  EXPECT_EQ(norm_X(g, PairField::zero(g.size())), 0.0);
  const double n = norm_X(g, q.pair());
  const double direct = g.dx() * (q.d_eta.squaredNorm() + q.eta.squaredNorm() + q.vee.squaredNorm());
  EXPECT_NEAR(n * n, direct, 1e-9);
  EXPECT_NEAR(norm_X_window(g, q.pair(), 0.0, 100.0), n, 1e-12);
  EXPECT_THROW(norm_X_window(g, q.pair(), 0.0, 0.0), DomainError);
}

TEST(Grid, WeightedNorm) {
  const SolitonParams p(1.0);
  const Grid g(60.0, 1024);
  const PairField q = eval_hydro(p, g).pair();
  EXPECT_NEAR(weighted_norm(g, q, 0.0, 0.0), std::pow(norm_X(g, q), 2), 1e-12);
  const double w1 = weighted_norm(g, q, 0.125, 0.0);
  const Grid g2(60.0, 2048);
  const double w2 = weighted_norm(g2, eval_hydro(p, g2).pair(), 0.125, 0.0);
  EXPECT_TRUE(std::isfinite(w1));
  EXPECT_LT(std::abs(w1 - w2) / w2, 1e-6);

  // Support in |x| > L/2: the weight is at least e^{L/8} there.
  PairField u = PairField::zero(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    if (std::abs(x) > 35.0 && std::abs(x) < 55.0) u.first[j] = std::exp(-std::pow(std::abs(x) - 45.0, 2));
  }
  EXPECT_GE(weighted_norm(g, u, 0.125, 0.0), std::exp(60.0 / 8.0) * std::pow(norm_X(g, u), 2));
  EXPECT_THROW(weighted_norm(g, q, 10.0, 0.0), DomainError);
}
