#pragma once

// Localized momentum I_R(t) and its monotonicity, the exact time-derivative
// identity, exponentially weighted localization norms, the virial identity for
// the forced linear Schrodinger equation, and phase tracking.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/hydro.hpp"
#include "gplab/modulation.hpp"

namespace gplab {

/// Phi(x) = (1 + tanh(nu x)) / 2 and its derivatives.
struct PhiValues {
  double phi;
  double d1;
  double d2;
  double d3;
};

inline PhiValues phi(double x, double nu) {
  const double t = std::tanh(nu * x);
  const double s = detail::sech(nu * x);
  const double s2 = s * s;
  return {0.5 * (1.0 + t), 0.5 * nu * s2, -nu * nu * s2 * t, nu * nu * nu * s2 * (2.0 * t * t - s2)};
}

struct MonotonicityConfig {
  /// Speed of reference (the orbit's speed) entering all constants.
  double c = 1.0;
  double nu = 0.0;
  double sigma_max = 0.0;
  std::vector<double> R_list{-10.0, -5.0, 0.0, 5.0, 10.0};
  double defect_slack = 1e-6;

  /// nu_c = sqrt(2 - c^2)/8, sigma_c = (2 - c^2)/(4 sqrt 2).
  static MonotonicityConfig for_speed(double c) {
    MonotonicityConfig m;
    m.c = c;
    m.nu = std::sqrt(2.0 - c * c) / 8.0;
    m.sigma_max = (2.0 - c * c) / (4.0 * kSqrt2);
    return m;
  }
};

/// Additive constant of the integrated monotonicity bound:
/// 768 sqrt(2 - c^2) / c^4 e^{-2 nu_c |R|}.
inline double monotonicity_constant(double c, double R) {
  const double nu = std::sqrt(2.0 - c * c) / 8.0;
  return 768.0 * std::sqrt(2.0 - c * c) / std::pow(c, 4) * std::exp(-2.0 * nu * std::abs(R));
}

/// Coefficient (2 - c^2)^2 / 2^11 of the local term in the differential bound.
inline double monotonicity_coefficient(double c) {
  const double s = 2.0 - c * c;
  return s * s / 2048.0;
}

/// Bound 2^21 / (c^4 (2 - c^2)) on the weighted norm of localized limit profiles.
inline double localization_bound(double c) { return std::pow(2.0, 21) / (std::pow(c, 4) * (2.0 - c * c)); }

namespace detail {

// Phi and derivatives sampled at (x - a) - shift, with x - a folded into the box.
inline std::vector<PhiValues> phi_samples(const Grid& g, double a, double shift, double nu) {
  std::vector<PhiValues> out(g.size());
  for (int j = 0; j < g.size(); ++j) out[j] = phi(g.wrapped_offset(g.node(j), a) - shift, nu);
  return out;
}

}  // namespace detail

/// I_R = (1/2) int [eta v](x + a) Phi(x - R) dx.
inline double localized_momentum(const Grid& g, const HydroState& s, double a, double R, double nu) {
  g.require(s.eta, "localized_momentum");
  const auto ph = detail::phi_samples(g, a, R, nu);
  Field f(g.size());
  for (int j = 0; j < g.size(); ++j) f[j] = 0.5 * s.eta[j] * s.vee[j] * ph[j].phi;
  return integrate(g, f);
}

/// Right side of the time-derivative identity for I_{R + sigma t}(t) at one
/// time, given a'(t).
inline double momentum_flux(const Grid& g, const HydroState& s, double a, double a_prime, double R, double sigma,
                            double nu) {
  const auto ph = detail::phi_samples(g, a, R + sigma * s.t, nu);
  const Field d = derivative(g, s.eta);
  Field f(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double e = s.eta[j], v = s.vee[j], w = 1.0 - e;
    const double transport = -0.5 * (a_prime + sigma) * e * v * ph[j].d1;
    const double local = 0.5 * ((1.0 - 2.0 * e) * v * v + 0.5 * e * e + (3.0 - 2.0 * e) * d[j] * d[j] / (4.0 * w * w)) *
                         ph[j].d1;
    const double tail = 0.25 * (e + std::log1p(-e)) * ph[j].d3;
    f[j] = transport + local + tail;
  }
  return integrate(g, f);
}

/// Local term int [(d_x eta)^2 + eta^2 + v^2](x + a) Phi'(x - R - sigma t) dx.
inline double local_energy_flux(const Grid& g, const HydroState& s, double a, double R, double sigma, double nu) {
  const auto ph = detail::phi_samples(g, a, R + sigma * s.t, nu);
  const Field dens = x_density(g, s.pair());
  Field f(g.size());
  for (int j = 0; j < g.size(); ++j) f[j] = dens[j] * ph[j].d1;
  return integrate(g, f);
}

namespace detail {

inline void require_track(const std::vector<HydroState>& states, const ModulationTrack& track, const char* what) {
  if (states.size() != track.points.size() || track.a_prime.size() != track.points.size())
    throw DomainError(std::string(what) + ": modulation track does not cover the trajectory");
  for (std::size_t i = 0; i < states.size(); ++i)
    if (std::abs(states[i].t - track.points[i].t) > 1e-9)
      throw DomainError(std::string(what) + ": modulation track has a gap or misaligned time");
}

}  // namespace detail

struct IdentityDefect {
  std::vector<double> t;
  /// I_{R + sigma t}(t).
  std::vector<double> I;
  /// Finite-difference time derivative of I.
  std::vector<double> lhs;
  /// Right side of the identity.
  std::vector<double> rhs;
  /// Max |lhs - rhs| over samples with a centered fourth-order stencil.
  double max_defect = 0.0;
};

/// Compares the finite-difference derivative of I_{R + sigma t}(t) with the
/// exact flux identity, using a and a' from the modulation track.
inline IdentityDefect didt_identity_check(const Grid& g, const std::vector<HydroState>& states,
                                          const ModulationTrack& track, double R, double sigma, double nu) {
  detail::require_track(states, track, "didt_identity_check");
  IdentityDefect d;
  const std::size_t n = states.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = track.points[i].a;
    d.t.push_back(states[i].t);
    d.I.push_back(localized_momentum(g, states[i], a, R + sigma * states[i].t, nu));
    d.rhs.push_back(momentum_flux(g, states[i], a, track.a_prime[i], R, sigma, nu));
  }
  d.lhs = finite_difference_derivative(d.t, d.I);
  for (std::size_t i = 2; i + 2 < n; ++i) d.max_defect = std::max(d.max_defect, std::abs(d.lhs[i] - d.rhs[i]));
  return d;
}

struct MonotonicityViolation {
  double R;
  double t0;
  double t1;
  /// I_R(t1) - I_R(t0) + constant + slack (negative for a violation).
  double gap;
};

struct MonotonicityReport {
  std::vector<double> t;
  std::vector<double> R;
  /// I[r][i] = I_{R_r}(t_i).
  std::vector<std::vector<double>> I;
  std::vector<MonotonicityViolation> violations;
  long pairs_checked = 0;
  /// Smallest gap over all pairs.
  double min_gap = std::numeric_limits<double>::infinity();
  /// Differential bound along the lines R + sigma t, sigma in {-sigma_c, 0, sigma_c}.
  long differential_checked = 0;
  long differential_violations = 0;
  double min_differential_margin = std::numeric_limits<double>::infinity();

  bool ok() const { return violations.empty() && differential_violations == 0; }
};

/// Integrated monotonicity over all sampled pairs t0 <= t1 and the
/// differential bound evaluated through the exact flux identity.
inline MonotonicityReport monotonicity_check(const Grid& g, const std::vector<HydroState>& states,
                                             const ModulationTrack& track, const MonotonicityConfig& cfg) {
  detail::require_track(states, track, "monotonicity_check");
  if (!(cfg.nu > 0.0)) throw DomainError("monotonicity_check: nu must be positive");
  MonotonicityReport rep;
  const std::size_t n = states.size();
  for (const auto& s : states) rep.t.push_back(s.t);
  rep.R = cfg.R_list;
  for (double R : cfg.R_list) {
    std::vector<double> I(n);
    for (std::size_t i = 0; i < n; ++i) I[i] = localized_momentum(g, states[i], track.points[i].a, R, cfg.nu);
    const double K = monotonicity_constant(cfg.c, R);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double gap = I[j] - I[i] + K + cfg.defect_slack;
        ++rep.pairs_checked;
        rep.min_gap = std::min(rep.min_gap, gap);
        if (gap < 0.0) rep.violations.push_back({R, rep.t[i], rep.t[j], gap});
      }
    rep.I.push_back(std::move(I));

    const double coef = monotonicity_coefficient(cfg.c);
    const double s2 = 2.0 - cfg.c * cfg.c;
    for (double sigma : {-cfg.sigma_max, 0.0, cfg.sigma_max})
      for (std::size_t i = 0; i < n; ++i) {
        const double a = track.points[i].a;
        const double dI = momentum_flux(g, states[i], a, track.a_prime[i], R, sigma, cfg.nu);
        const double Rt = R + sigma * states[i].t;
        const double bound = coef * local_energy_flux(g, states[i], a, R, sigma, cfg.nu) -
                             24.0 * s2 * s2 / std::pow(cfg.c, 4) * std::exp(-2.0 * cfg.nu * std::abs(Rt));
        const double margin = dI - bound + cfg.defect_slack;
        ++rep.differential_checked;
        rep.min_differential_margin = std::min(rep.min_differential_margin, margin);
        if (margin < 0.0) ++rep.differential_violations;
      }
  }
  return rep;
}

/// Series of int [(d_x eta)^2 + eta^2 + v^2](x + a(t)) e^{2 nu |x|} dx.
inline std::vector<double> localization_norm(const Grid& g, const std::vector<HydroState>& states,
                                             const ModulationTrack& track, double nu) {
  detail::require_track(states, track, "localization_norm");
  std::vector<double> out;
  for (std::size_t i = 0; i < states.size(); ++i)
    out.push_back(weighted_norm(g, states[i].pair(), nu, track.points[i].a));
  return out;
}

// Virial identity for i u_t + u_xx = F.

/// Bounded spatial weight with derivatives up to order four.
struct SpatialWeight {
  std::function<std::array<double, 5>(double)> eval;

  /// Phi(x) = tanh(x / ell).
  static SpatialWeight tanh_weight(double ell) {
    return {[ell](double x) {
      const double T = std::tanh(x / ell);
      const double S = 1.0 - T * T;
      const double i1 = 1.0 / ell, i2 = i1 * i1, i4 = i2 * i2;
      return std::array<double, 5>{T, S * i1, -2.0 * T * S * i2, S * (6.0 * T * T - 2.0) * i2 * i1,
                                   S * T * (16.0 - 24.0 * T * T) * i4};
    }};
  }
};

/// Time cut-off chi on [a, b] with chi(a) = chi(b) = 0.
struct TimeCutoff {
  double a = 0.0;
  double b = 1.0;
  std::function<std::array<double, 3>(double)> eval;

  /// chi(t) = (t - a)(b - t).
  static TimeCutoff parabola(double a, double b) {
    return {a, b, [a, b](double t) { return std::array<double, 3>{(t - a) * (b - t), a + b - 2.0 * t, -2.0}; }};
  }
  /// chi(t) = sin^2(pi (t - a) / (b - a)).
  static TimeCutoff sine_squared(double a, double b) {
    return {a, b, [a, b](double t) {
              const double w = std::numbers::pi / (b - a);
              const double s = std::sin(w * (t - a)), c = std::cos(w * (t - a));
              return std::array<double, 3>{s * s, 2.0 * w * s * c, 2.0 * w * w * (c * c - s * s)};
            }};
  }
};

/// Forcing F(x, t) sampled on the grid.
using Forcing = std::function<ComplexField(const Grid&, double)>;

struct VirialOptions {
  double dt = 2e-3;
  /// Spectral tail (relative modulus of the top third of modes) above which a warning is issued.
  double tail_threshold = 1e-10;
};

struct VirialResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double defect = 0.0;
  /// The five right-side terms in order: boundary, |u|^2 (Phi chi'' + Phi'''' chi),
  /// <F, iu>, <F, u>, <F, u_x>.
  std::array<double, 5> terms{};
  std::vector<std::string> warnings;
};

namespace detail {

// Relative spectral content above the 2/3 cutoff.
inline double spectral_tail(const Grid& g, const ComplexField& u) {
  const Spectrum s = g.forward(u);
  const Field& k = g.full_wavenumbers();
  const double kc = g.nyquist_wavenumber() * 2.0 / 3.0;
  double hi = 0.0, all = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    all = std::max(all, std::abs(s[j]));
    if (std::abs(k[j]) > kc) hi = std::max(hi, std::abs(s[j]));
  }
  return all > 0.0 ? hi / all : 0.0;
}

// Linear Schrodinger step by the integrating factor e^{-i k^2 t} with RK4 on the forcing.
inline ComplexField ls_step(const Grid& g, const ComplexField& u, double t, double h, const Forcing& F) {
  const Field& k = g.full_wavenumbers();
  auto propagate = [&](const Spectrum& s, double tau) {
    Spectrum o = s;
    for (int j = 0; j < g.size(); ++j) o[j] *= std::exp(std::complex<double>(0.0, -k[j] * k[j] * tau));
    return o;
  };
  // In the interaction picture w = e^{i k^2 t} u_hat, w' = -i e^{i k^2 t} F_hat.
  auto rhs = [&](double tau, const Spectrum& w) {
    const ComplexField f = F(g, t + tau);
    Spectrum fh = g.forward(f);
    for (int j = 0; j < g.size(); ++j) fh[j] *= std::complex<double>(0.0, -1.0) * std::exp(std::complex<double>(0.0, k[j] * k[j] * tau));
    (void)w;
    return fh;
  };
  const Spectrum w0 = g.forward(u);
  const Spectrum k1 = rhs(0.0, w0);
  const Spectrum k2 = rhs(0.5 * h, w0 + 0.5 * h * k1);
  const Spectrum k3 = rhs(0.5 * h, w0 + 0.5 * h * k2);
  const Spectrum k4 = rhs(h, w0 + h * k3);
  const Spectrum w1 = w0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return g.backward_complex(propagate(w1, h));
}

}  // namespace detail

/// Evolves i u_t + u_xx = F from u0 at time chi.a to chi.b and evaluates both
/// sides of the virial identity. Time integrals use the composite Simpson rule
/// on the step grid, space integrals the trapezoidal rule.
inline VirialResult virial_identity_check(const Grid& g, const ComplexField& u0, const Forcing& F,
                                          const SpatialWeight& Phi, const TimeCutoff& chi,
                                          const VirialOptions& opt = {}) {
  if (!(chi.b > chi.a)) throw DomainError("virial_identity_check: empty time interval");
  if (u0.size() != g.size()) throw DomainError("virial_identity_check: field length does not match grid");
  int steps = static_cast<int>(std::ceil((chi.b - chi.a) / opt.dt));
  steps += steps % 2;
  const double h = (chi.b - chi.a) / steps;
  const int n = g.size();
  std::vector<std::array<double, 5>> w(n);
  for (int j = 0; j < n; ++j) w[j] = Phi.eval(g.node(j));

  VirialResult r;
  double lhs = 0.0;
  std::array<double, 5> acc{};
  double max_tail = 0.0;
  ComplexField u = u0;
  auto accumulate = [&](const ComplexField& uu, double t, double weight) {
    const auto c = chi.eval(t);
    const ComplexField ux = derivative(g, uu, 1);
    const ComplexField f = F(g, t);
    double l = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    const std::complex<double> I(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
      const double m = std::norm(uu[j]);
      l += std::norm(ux[j]) * w[j][2];
      t1 += m * (w[j][0] * c[2] + w[j][4] * c[0]);
      t2 += std::real(f[j] * std::conj(I * uu[j])) * w[j][0];
      t3 += std::real(f[j] * std::conj(uu[j])) * w[j][2];
      t4 += std::real(f[j] * std::conj(ux[j])) * w[j][1];
    }
    const double dx = g.dx();
    lhs += weight * 4.0 * l * c[0] * dx;
    acc[1] += weight * t1 * dx;
    acc[2] += weight * 2.0 * t2 * c[1] * dx;
    acc[3] -= weight * 2.0 * t3 * c[0] * dx;
    acc[4] -= weight * 4.0 * t4 * c[0] * dx;
    max_tail = std::max(max_tail, detail::spectral_tail(g, uu));
  };
  auto boundary = [&](const ComplexField& uu) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::norm(uu[j]) * w[j][0];
    return s * g.dx();
  };
  acc[0] += boundary(u) * chi.eval(chi.a)[1];
  for (int i = 0; i <= steps; ++i) {
    const double t = chi.a + i * h;
    const double simpson = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    accumulate(u, t, simpson * h / 3.0);
    if (i < steps) u = detail::ls_step(g, u, t, h, F);
  }
  acc[0] -= boundary(u) * chi.eval(chi.b)[1];
  r.lhs = lhs;
  r.terms = acc;
  r.rhs = acc[0] + acc[1] + acc[2] + acc[3] + acc[4];
  r.defect = std::abs(r.lhs - r.rhs);
  if (max_tail > opt.tail_threshold)
    r.warnings.push_back("virial_identity_check: spectral tail " + std::to_string(max_tail) + " above threshold");
  return r;
}

/// Zero forcing.
inline Forcing no_forcing() {
  return [](const Grid& g, double) { return ComplexField::Zero(g.size()).eval(); };
}

// Phase tracking.

/// C-infinity bump of unit integral supported on [-h, h].
inline double bump(double x, double h = 2.0) {
  // int_{-1}^{1} exp(-1/(1 - y^2)) dy.
  constexpr double kBumpMass = 0.44399381616807943;
  const double y = x / h;
  if (std::abs(y) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - y * y)) / (kBumpMass * h);
}

struct PhaseTrack {
  std::vector<double> t;
  std::vector<double> theta;
  /// |int Psi(x + b) chi(x) dx| at each sample.
  std::vector<double> modulus;
};

/// theta(t) = arg(int Psi(x + b(t), t) chi(x) dx) - arg(i sign(c*)), continued
/// to the nearest branch. chi must vanish outside [-chi_halfwidth, chi_halfwidth].
/// Errors when the modulus falls below |c*|/(2 sqrt 2) or a branch step
/// exceeds pi/2.
///
/// A smooth bump has slowly decaying Fourier coefficients, so sampling it on the
/// field grid is inaccurate when b falls between nodes. The integral is instead
/// taken exactly against the band-limited interpolant of the periodically
/// embedded field: (1/N) sum_m psi_hat_m e^{i k_m (b + L)} chi_hat(k_m), with
/// chi_hat from a fine trapezoidal rule.
inline PhaseTrack phase_track(const Grid& g, const std::vector<WaveState>& states, const std::vector<double>& b,
                              double c_star, const std::function<double(double)>& chi = [](double x) {
                                return bump(x);
                              }, double chi_halfwidth = 2.0) {
  if (b.size() != states.size()) throw DomainError("phase_track: b series does not match the trajectory");
  if (c_star == 0.0) throw DomainError("phase_track: c* must be nonzero");
  const int n = g.size();
  const double L = g.half_length();
  const Field& k = g.full_wavenumbers();

  constexpr int kFine = 4000;
  const double hq = 2.0 * chi_halfwidth / kFine;
  std::vector<double> ys(kFine + 1), cs(kFine + 1);
  for (int i = 0; i <= kFine; ++i) {
    ys[i] = -chi_halfwidth + i * hq;
    cs[i] = chi(ys[i]) * ((i == 0 || i == kFine) ? 0.5 : 1.0) * hq;
  }
  ComplexField chi_hat(n);
  for (int m = 0; m < n; ++m) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i <= kFine; ++i) acc += cs[i] * std::polar(1.0, k[m] * ys[i]);
    chi_hat[m] = acc;
  }

  const double floor = std::abs(c_star) / (2.0 * kSqrt2);
  const double ref = std::copysign(0.5 * std::numbers::pi, c_star);
  const double x_ramp = 0.85 * L;
  PhaseTrack pt;
  double prev = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double delta = detail::principal_angle(states[i].wrap_phase);
    ComplexField emb(n);
    for (int j = 0; j < n; ++j)
      emb[j] = states[i].psi[j] * std::polar(1.0, -delta * detail::ramp_profile(g.node(j), L, x_ramp));
    const Spectrum s = g.forward(emb);
    std::complex<double> z = 0.0;
    for (int m = 0; m < n; ++m) z += s[m] * std::polar(1.0, k[m] * (b[i] + L)) * chi_hat[m];
    z /= static_cast<double>(n);
    if (std::abs(z) < floor)
      throw ModulationError("phase_track: tracking lost at t = " + std::to_string(states[i].t) +
                            " (modulus below |c*|/(2 sqrt 2))");
    double th = std::arg(z) - ref;
    if (i == 0) {
      th = std::remainder(th, 2.0 * std::numbers::pi);
    } else {
      th = prev + std::remainder(th - prev, 2.0 * std::numbers::pi);
      if (std::abs(th - prev) > 0.5 * std::numbers::pi)
        throw ModulationError("phase_track: phase jump above pi/2 at t = " + std::to_string(states[i].t));
    }
    pt.t.push_back(states[i].t);
    pt.theta.push_back(th);
    pt.modulus.push_back(std::abs(z));
    prev = th;
  }
  return pt;
}

}  // namespace gplab
