#pragma once

// Closed-form dark-soliton family of the 1D Gross-Pitaevskii equation in
// hydrodynamical variables (eta = 1 - |Psi|^2, v = -d_x arg Psi) and in the
// wave form U_c, together with speed derivatives, conserved quantities and
// residual checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/hgp_flux.hpp"

namespace gplab {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// Speed c and center a of the travelling wave Q_{c,a}. Requires 0 < |c| < sqrt(2).
class SolitonParams {
 public:
  explicit SolitonParams(double c, double a = 0.0) : c_(c), a_(a) {
    if (!std::isfinite(c) || !std::isfinite(a))
      throw DomainError("SolitonParams: non-finite parameter");
    if (c == 0.0) throw DomainError("SolitonParams: c = 0 (black soliton) is not admissible");
    if (std::abs(c) >= kSqrt2) throw DomainError("SolitonParams: |c| must be < sqrt(2)");
  }
  double c() const { return c_; }
  double a() const { return a_; }
  SolitonParams moved_to(double a) const { return SolitonParams(c_, a); }

 private:
  double c_;
  double a_;
};

/// Samples of Q_{c,a} and of its closed-form derivatives on a grid.
struct SolitonProfile {
  Field eta;
  Field vee;
  Field d_eta;
  Field d_vee;
  Field dd_eta;
  /// mu_c = eta_c + d_xx eta_c.
  Field mu;
  PairField pair() const { return {eta, vee}; }
  PairField d_pair() const { return {d_eta, d_vee}; }
};

/// Default half-length max(60, 60/sqrt(2 - c^2)).
inline double default_half_length(double c) { return std::max(60.0, 60.0 / std::sqrt(2.0 - c * c)); }

namespace detail {

// sech and tanh without overflow for large arguments.
inline double sech(double z) {
  const double e = std::exp(-std::abs(z));
  return 2.0 * e / (1.0 + e * e);
}

}  // namespace detail

/// Pointwise closed forms in the co-moving coordinate y = x - a.
///
/// With kappa = sqrt(2 - c^2)/2: eta = 2 kappa^2 sech^2(kappa y), and the
/// logarithmic derivative d_x eta / eta = -sqrt(2 - c^2) tanh(kappa y) stays
/// finite where eta underflows.
struct SolitonPoint {
  double eta;
  double vee;
  double d_eta;
  double d_vee;
  double dd_eta;
  double mu;
  /// d_x eta / eta.
  double log_d_eta;
  /// mu / eta = 3 - c^2 - 3 eta.
  double mu_over_eta;
};

inline SolitonPoint soliton_point(double c, double y) {
  const double s2 = 2.0 - c * c;
  const double kappa = 0.5 * std::sqrt(s2);
  const double sh = detail::sech(kappa * y);
  const double th = std::tanh(kappa * y);
  SolitonPoint p{};
  p.eta = 0.5 * s2 * sh * sh;
  const double w = 1.0 - p.eta;
  p.vee = c * p.eta / (2.0 * w);
  p.log_d_eta = -std::sqrt(s2) * th;
  p.d_eta = p.log_d_eta * p.eta;
  p.d_vee = c * p.d_eta / (2.0 * w * w);
  p.dd_eta = s2 * p.eta - 3.0 * p.eta * p.eta;
  p.mu_over_eta = 3.0 - c * c - 3.0 * p.eta;
  p.mu = p.eta * p.mu_over_eta;
  return p;
}

/// Samples Q_{c,a} and its derivatives on the grid (no periodic wrapping of x - a).
inline SolitonProfile eval_hydro(const SolitonParams& p, const Grid& g) {
  const int n = g.size();
  SolitonProfile prof{Field(n), Field(n), Field(n), Field(n), Field(n), Field(n)};
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(p.c(), g.node(j) - p.a());
    prof.eta[j] = q.eta;
    prof.vee[j] = q.vee;
    prof.d_eta[j] = q.d_eta;
    prof.d_vee[j] = q.d_vee;
    prof.dd_eta[j] = q.dd_eta;
    prof.mu[j] = q.mu;
  }
  return prof;
}

/// U_c(x - a) = sqrt((2-c^2)/2) tanh(sqrt(2-c^2)(x-a)/2) + i c/sqrt(2).
inline std::complex<double> eval_wave(const SolitonParams& p, double x) {
  const double s2 = 2.0 - p.c() * p.c();
  return {std::sqrt(0.5 * s2) * std::tanh(0.5 * std::sqrt(s2) * (x - p.a())), p.c() / kSqrt2};
}

/// d_x U_c(x - a).
inline std::complex<double> eval_wave_derivative(const SolitonParams& p, double x) {
  const double s2 = 2.0 - p.c() * p.c();
  const double kappa = 0.5 * std::sqrt(s2);
  const double sh = detail::sech(kappa * (x - p.a()));
  return {std::sqrt(0.5 * s2) * kappa * sh * sh, 0.0};
}

/// Speed derivative d_c Q_c sampled in the co-moving frame of center a.
inline PairField d_dc_profile(const SolitonParams& p, const Grid& g) {
  const double c = p.c();
  const double r = std::sqrt(2.0 - c * c);
  const double kappa = 0.5 * r;
  const int n = g.size();
  PairField out = PairField::zero(n);
  for (int j = 0; j < n; ++j) {
    const double y = g.node(j) - p.a();
    const SolitonPoint q = soliton_point(c, y);
    const double w = 1.0 - q.eta;
    const double de = (c / r) * q.eta * (y * std::tanh(kappa * y) - 2.0 / r);
    out.first[j] = de;
    out.second[j] = q.eta / (2.0 * w) + c * de / (2.0 * w * w);
  }
  return out;
}

/// Closed-form momentum P(Q_c) = sign(c) int_{|c|}^{sqrt 2} sqrt(2 - s^2) ds.
inline double momentum_closed(double c) {
  const double ac = std::abs(c);
  const double anti = 0.5 * (ac * std::sqrt(2.0 - ac * ac) + 2.0 * std::asin(ac / kSqrt2));
  return std::copysign(0.5 * std::numbers::pi - anti, c);
}

struct SolitonConserved {
  double energy;
  double momentum;
  double dmomentum_dc;
};

/// E(Q_c) and dP/dc in closed form; P(Q_c) by quadrature of (1/2) int eta_c v_c
/// on the default box.
inline SolitonConserved conserved_closed(double c) {
  const SolitonParams p(c);
  const double L = default_half_length(c);
  // dx <= 0.05 resolves every admissible profile to machine precision.
  int n = static_cast<int>(std::ceil(2.0 * L / 0.05));
  n += n % 2;
  const Grid g(L, n);
  const SolitonProfile q = eval_hydro(p, g);
  const double s2 = 2.0 - c * c;
  return {std::pow(s2, 1.5) / 3.0, 0.5 * integrate(g, q.eta.cwiseProduct(q.vee)), -std::sqrt(s2)};
}

struct ProfileResidual {
  /// max |d_xx eta - (2 - c^2) eta + 3 eta^2|.
  double second_order;
  /// max |(d_x eta)^2 - (2 - c^2) eta^2 + 2 eta^3|.
  double first_integral;
  /// Travelling-wave relation in flux form: the hydrodynamical fluxes F_eta, F_v
  /// of Q satisfy F + c Q = 0. Only eta is differentiated (spectrally); the
  /// rational terms are expanded pointwise. Max over both components.
  double travelling_wave;
  /// max over both components of |hgp_rhs(Q) + c d_x Q| with the solver's
  /// dealiased right-hand side. For small |c| the factor 1/(1 - eta) has poles
  /// close to the real axis and this floor is set by the grid, not the profile.
  double solver_rhs;
  /// max |-i c U' + U'' + U (1 - |U|^2)|.
  double wave_ode;
  /// Profile not decayed below 1e-12 at the box edge or spectrum not resolved.
  bool under_resolved;
};

/// Residuals of the profile equations computed with spectral differentiation.
inline ProfileResidual profile_residual(const SolitonParams& p, const Grid& g) {
  const double c = p.c();
  const double s2 = 2.0 - c * c;
  const SolitonProfile q = eval_hydro(p, g);
  const Field d1 = derivative(g, q.eta, 1);
  const Field d2 = derivative(g, q.eta, 2);
  ProfileResidual r{};
  const Field eta2 = q.eta.array().square();
  r.second_order = (d2 - s2 * q.eta + 3.0 * eta2).cwiseAbs().maxCoeff();
  r.first_integral =
      (d1.array().square() - s2 * eta2.array() + 2.0 * eta2.array() * q.eta.array()).abs().maxCoeff();

  const auto w = 1.0 - q.eta.array();
  const auto flux_eta = 2.0 * q.eta.array() * q.vee.array() - 2.0 * q.vee.array();
  const auto flux_vee = q.vee.array().square() - q.eta.array() + d2.array() / (2.0 * w) +
                        d1.array().square() / (4.0 * w.square());
  r.travelling_wave = std::max((flux_eta + c * q.eta.array()).abs().maxCoeff(),
                               (flux_vee + c * q.vee.array()).abs().maxCoeff());

  const PairField rhs = hgp_rhs_fields(g, q.eta, q.vee, 0.0);
  r.solver_rhs = std::max((rhs.first + c * d1).cwiseAbs().maxCoeff(), (rhs.second + c * q.d_vee).cwiseAbs().maxCoeff());

  // U' decays, so U'' is obtained by spectral differentiation of the sampled U'.
  const int n = g.size();
  ComplexField u(n), du(n);
  for (int j = 0; j < n; ++j) {
    u[j] = eval_wave(p, g.node(j));
    du[j] = eval_wave_derivative(p, g.node(j));
  }
  const ComplexField ddu = derivative(g, du, 1);
  const std::complex<double> ic(0.0, c);
  double wmax = 0.0;
  for (int j = 0; j < n; ++j)
    wmax = std::max(wmax, std::abs(-ic * du[j] + ddu[j] + u[j] * (1.0 - std::norm(u[j]))));
  r.wave_ode = wmax;

  const double edge = std::max(q.eta[0], q.eta[n - 1]);
  const Spectrum s = g.forward(q.eta);
  const double tail = std::abs(s[n / 2]) / std::max(std::abs(s[0]), 1e-300);
  r.under_resolved = edge > 1e-12 || tail > 1e-12;
  return r;
}

}  // namespace gplab
