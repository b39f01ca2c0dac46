#pragma once

// Time integration of the hydrodynamical system in (eta, v), the Psi-form
// Gross-Pitaevskii solver used for cross-validation, the Madelung maps between
// the two, and the conserved energy and momentum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/hgp_flux.hpp"
#include "gplab/soliton.hpp"

namespace gplab {

inline constexpr double kDefaultGuard = 1e-3;
inline constexpr double kDefaultCadence = 0.1;

struct HydroState {
  Field eta;
  Field vee;
  double t = 0.0;

  HydroState() = default;
  HydroState(Field e, Field v, double time = 0.0) : eta(std::move(e)), vee(std::move(v)), t(time) {}
  HydroState(const PairField& u, double time = 0.0) : eta(u.first), vee(u.second), t(time) {}
  PairField pair() const { return {eta, vee}; }
};

/// Complex field on the grid. The lift of a hydrodynamical state is generally not
/// periodic: psi(L) = e^{i wrap_phase} psi(-L) in the sense of the continuous limit.
struct WaveState {
  ComplexField psi;
  double t = 0.0;
  double wrap_phase = 0.0;
};

struct Conserved {
  double E;
  double P;
};

inline HydroState soliton_state(const SolitonParams& p, const Grid& g, double t = 0.0) {
  const SolitonProfile q = eval_hydro(p, g);
  return {q.eta, q.vee, t};
}

/// Samples of U_c(x - a) with the phase jump across the box recorded as wrap_phase.
inline WaveState soliton_wave_state(const SolitonParams& p, const Grid& g, double t = 0.0) {
  WaveState w;
  w.t = t;
  w.psi.resize(g.size());
  for (int j = 0; j < g.size(); ++j) w.psi[j] = eval_wave(p, g.node(j));
  const double s = std::sqrt(2.0 - p.c() * p.c());
  w.wrap_phase = 2.0 * std::atan2(p.c(), s) - std::numbers::pi;
  return w;
}

inline PairField hgp_rhs(const Grid& g, const HydroState& s, double sigma_guard = kDefaultGuard) {
  return hgp_rhs_fields(g, s.eta, s.vee, sigma_guard);
}

/// Linear dispersion relation of the vacuum, omega^2 = 2k^2 + k^4.
inline double dispersion_omega(double k) { return std::abs(k) * std::sqrt(2.0 + k * k); }

/// E = 1/8 int (d_x eta)^2/(1-eta) + 1/2 int (1-eta) v^2 + 1/4 int eta^2, P = 1/2 int eta v.
inline Conserved conserved(const Grid& g, const HydroState& s, double sigma_guard = kDefaultGuard) {
  g.require(s.eta, "conserved");
  g.require(s.vee, "conserved");
  const double max_eta = s.eta.maxCoeff();
  if (!(max_eta < 1.0 - sigma_guard))
    throw GuardError("conserved: max eta = " + std::to_string(max_eta) + " violates the guard", max_eta);
  const Field d = derivative(g, s.eta, 1);
  const Field w = (1.0 - s.eta.array()).matrix();
  const Field dens = (d.array().square() / (8.0 * w.array()) + 0.5 * w.array() * s.vee.array().square() +
                      0.25 * s.eta.array().square())
                         .matrix();
  return {integrate(g, dens), 0.5 * integrate(g, s.eta.cwiseProduct(s.vee))};
}

// ---------------------------------------------------------------------------
// HGP time stepping

struct IntegrateOptions {
  std::optional<double> dt;
  double cadence = kDefaultCadence;
  double sigma_guard = kDefaultGuard;
};

/// Conserved quantities at an output time. drift_E is relative to |E0|, drift_P
/// is relative to max(|P0|, 1) so it also bounds the absolute change.
struct DriftRecord {
  double t;
  double E;
  double P;
  double drift_E;
  double drift_P;
};

struct RunError {
  enum class Kind { guard, non_finite };
  Kind kind;
  std::string message;
  double t;
  long step;
};

struct Trajectory {
  std::vector<HydroState> states;
  std::vector<DriftRecord> drift;
  std::optional<RunError> error;
  double dt = 0.0;
  long steps = 0;

  bool ok() const { return !error.has_value(); }
  const HydroState& final_state() const { return states.back(); }
  double max_drift_E() const {
    double m = 0.0;
    for (const auto& d : drift) m = std::max(m, d.drift_E);
    return m;
  }
  double max_drift_P() const {
    double m = 0.0;
    for (const auto& d : drift) m = std::max(m, d.drift_P);
    return m;
  }
};

/// 0.5 * 2.8 / omega_max with omega_max taken at the Nyquist wavenumber.
inline double default_time_step(const Grid& g) {
  return 0.5 * 2.8 / dispersion_omega(g.nyquist_wavenumber());
}

namespace detail {

inline DriftRecord drift_record(const Grid& g, const HydroState& s, const Conserved& c0, double guard) {
  const Conserved c = conserved(g, s, guard);
  const double dE = std::abs(c.E - c0.E) / (c0.E != 0.0 ? std::abs(c0.E) : 1.0);
  const double dP = std::abs(c.P - c0.P) / std::max(std::abs(c0.P), 1.0);
  return {s.t, c.E, c.P, dE, dP};
}

}  // namespace detail

/// Classical RK4 on the spectral semi-discretization, recording states every
/// `cadence` time units (the last interval may be shorter). Within each output
/// interval the step is shrunk so the interval holds a whole number of steps.
/// A guard trip or a non-finite value ends the run with a partial trajectory and
/// an error record.
inline Trajectory integrate(const Grid& g, const HydroState& s0, double T, const IntegrateOptions& opts = {}) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("integrate: horizon must be finite and >= 0");
  if (!(opts.cadence > 0.0)) throw DomainError("integrate: cadence must be positive");
  if (opts.dt && !(*opts.dt > 0.0)) throw DomainError("integrate: dt must be positive");
  g.require(s0.eta, "integrate");
  g.require(s0.vee, "integrate");

  Trajectory traj;
  const double dt_max = opts.dt.value_or(default_time_step(g));
  traj.dt = dt_max;
  const Conserved c0 = conserved(g, s0, opts.sigma_guard);
  traj.states.push_back(s0);
  traj.drift.push_back({s0.t, c0.E, c0.P, 0.0, 0.0});
  if (T == 0.0) return traj;

  const long intervals = static_cast<long>(std::ceil(T / opts.cadence - 1e-9));
  PairField u = s0.pair();
  long step = 0;
  for (long i = 0; i < intervals; ++i) {
    const double t_begin = s0.t + i * opts.cadence;
    const double span = std::min(opts.cadence, T - i * opts.cadence);
    const long n = std::max(1L, static_cast<long>(std::ceil(span / dt_max - 1e-9)));
    const double h = span / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      try {
        const PairField k1 = hgp_rhs_fields(g, u.first, u.second, opts.sigma_guard);
        const PairField u1 = u + (0.5 * h) * k1;
        const PairField k2 = hgp_rhs_fields(g, u1.first, u1.second, opts.sigma_guard);
        const PairField u2 = u + (0.5 * h) * k2;
        const PairField k3 = hgp_rhs_fields(g, u2.first, u2.second, opts.sigma_guard);
        const PairField u3 = u + h * k3;
        const PairField k4 = hgp_rhs_fields(g, u3.first, u3.second, opts.sigma_guard);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      } catch (const GuardError& e) {
        // A NaN in an intermediate stage also fails the guard comparison.
        const auto kind = std::isfinite(e.max_eta()) ? RunError::Kind::guard : RunError::Kind::non_finite;
        traj.error = RunError{kind, e.what(), t_begin + k * h, step};
        traj.steps = step;
        return traj;
      }
      ++step;
      if (!u.all_finite()) {
        traj.error = RunError{RunError::Kind::non_finite,
                              "integrate: non-finite value at step " + std::to_string(step),
                              t_begin + (k + 1) * h, step};
        traj.steps = step;
        return traj;
      }
    }
    HydroState s(u, i + 1 == intervals ? s0.t + T : t_begin + opts.cadence);
    try {
      traj.drift.push_back(detail::drift_record(g, s, c0, opts.sigma_guard));
    } catch (const GuardError& e) {
      traj.error = RunError{RunError::Kind::guard, e.what(), s.t, step};
      traj.steps = step;
      return traj;
    }
    traj.states.push_back(std::move(s));
  }
  traj.steps = step;
  return traj;
}

// ---------------------------------------------------------------------------
// Madelung maps

/// Psi = sqrt(1 - eta) e^{i phi}, phi(x) = phase0 - int_{-L}^x v. The total phase
/// increment -int v over the box is stored in wrap_phase.
inline WaveState madelung_to_wave(const Grid& g, const HydroState& s, double phase0 = 0.0) {
  g.require(s.eta, "madelung_to_wave");
  g.require(s.vee, "madelung_to_wave");
  if (!(s.eta.maxCoeff() < 1.0)) throw LiftingError("madelung_to_wave: max eta >= 1, modulus vanishes");
  const Field phi = (phase0 - cumulative_integral(g, s.vee).array()).matrix();
  WaveState w;
  w.t = s.t;
  w.wrap_phase = -integrate(g, s.vee);
  w.psi.resize(g.size());
  for (int j = 0; j < g.size(); ++j) w.psi[j] = std::polar(std::sqrt(1.0 - s.eta[j]), phi[j]);
  return w;
}

/// eta = 1 - |psi|^2 and v = -d_x arg psi, with the linear phase ramp implied by
/// wrap_phase removed before spectral differentiation.
inline HydroState wave_to_madelung(const Grid& g, const WaveState& w, double sigma_guard = kDefaultGuard) {
  if (w.psi.size() != g.size()) throw DomainError("wave_to_madelung: field length does not match grid");
  const int n = g.size();
  const double L = g.half_length();
  const double rho2_min = w.psi.cwiseAbs2().minCoeff();
  if (!(rho2_min > sigma_guard))
    throw LiftingError("wave_to_madelung: |psi|^2 = " + std::to_string(rho2_min) + " too small to lift");
  ComplexField tilde(n);
  for (int j = 0; j < n; ++j)
    tilde[j] = w.psi[j] * std::polar(1.0, -w.wrap_phase * (g.node(j) + L) / (2.0 * L));
  const ComplexField d = derivative(g, tilde, 1);
  HydroState s;
  s.t = w.t;
  s.eta.resize(n);
  s.vee.resize(n);
  for (int j = 0; j < n; ++j) {
    const double r2 = std::norm(tilde[j]);
    s.eta[j] = 1.0 - r2;
    s.vee[j] = -std::imag(std::conj(tilde[j]) * d[j]) / r2 - w.wrap_phase / (2.0 * L);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Psi-form solver

struct GpOptions {
  double dt = 1e-3;
  double cadence = kDefaultCadence;
  /// Sponge occupies |x| > (1 - sponge_fraction) L. The damping rate rises over
  /// the first quarter of the layer and the phase ramp lives in the rest, so the
  /// ramp sits where deviations are already strongly damped.
  double sponge_fraction = 0.2;
  double sponge_rate = 80.0;
  /// Deviation from the initial background in the inner band of the sponge that
  /// raises a warning.
  double contamination_threshold = 1e-5;
};

struct GpTrajectory {
  std::vector<WaveState> states;
  /// Ginzburg-Landau energy of the embedded periodic field at each output.
  std::vector<double> energy;
  std::vector<std::string> warnings;
  /// Largest deviation seen in the inner band of the sponge.
  double max_sponge_deviation = 0.0;
  long steps = 0;
};

namespace detail {

// C-infinity step 0 -> 1 on [0, 1].
inline double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

inline double principal_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// Phase ramp: 0 on |x| <= x0, rising smoothly to +1/2 at x = L and -1/2 at x = -L.
inline double ramp_profile(double x, double L, double x0) {
  const double w = L - x0;
  if (x >= x0) return 0.5 * smooth_step((x - x0) / w);
  if (x <= -x0) return -0.5 * smooth_step((-x0 - x) / w);
  return 0.0;
}

inline double gl_energy(const Grid& g, const ComplexField& psi) {
  const ComplexField d = derivative(g, psi, 1);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double m = 1.0 - std::norm(psi[j]);
    acc += 0.5 * std::norm(d[j]) + 0.25 * m * m;
  }
  return g.dx() * acc;
}

}  // namespace detail

/// Strang-split pseudospectral solver for i psi_t + psi_xx + psi(1 - |psi|^2) = 0.
///
/// The input is made periodic by multiplying with e^{-i Delta R(x)}, where Delta
/// is the principal value of wrap_phase and R a smooth ramp confined to the sponge
/// layer. Inside the sponge, deviations from the initial embedded field are damped
/// at each step. Returned states are un-embedded and carry the input wrap_phase;
/// they are meaningful away from the sponge.
inline GpTrajectory gp_integrate(const Grid& g, const WaveState& w0, double T, const GpOptions& opts = {}) {
  if (w0.psi.size() != g.size()) throw DomainError("gp_integrate: field length does not match grid");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("gp_integrate: horizon must be finite and >= 0");
  if (!(opts.dt > 0.0) || !(opts.cadence > 0.0)) throw DomainError("gp_integrate: dt and cadence must be positive");
  if (!(opts.sponge_fraction > 0.0 && opts.sponge_fraction < 0.5))
    throw DomainError("gp_integrate: sponge fraction must lie in (0, 0.5)");
  const int n = g.size();
  const double L = g.half_length();
  const double delta = detail::principal_angle(w0.wrap_phase);

  ComplexField ramp(n);
  Field gamma(n);
  std::vector<int> sponge_nodes;
  // Inner band of the sponge, free of the ramp: outgoing radiation shows up here first.
  std::vector<int> watch_nodes;
  const double x_sponge = (1.0 - opts.sponge_fraction) * L;
  const double x_ramp = (1.0 - 0.75 * opts.sponge_fraction) * L;
  for (int j = 0; j < n; ++j) {
    const double x = g.node(j);
    ramp[j] = std::polar(1.0, -delta * detail::ramp_profile(x, L, x_ramp));
    const double depth = (std::abs(x) - x_sponge) / (x_ramp - x_sponge);
    gamma[j] = opts.sponge_rate * detail::smooth_step(depth);
    if (depth > 0.0) sponge_nodes.push_back(j);
    if (depth > 0.0 && depth < 1.0) watch_nodes.push_back(j);
  }
  ComplexField psi = w0.psi.cwiseProduct(ramp);
  const ComplexField background = psi;

  const Field& k = g.full_wavenumbers();
  auto run_chunk = [&](double h, long count) {
    ComplexField lin(n);
    for (int j = 0; j < n; ++j) lin[j] = std::polar(1.0, -k[j] * k[j] * h);
    Field damp(n);
    for (int j = 0; j < n; ++j) damp[j] = std::exp(-gamma[j] * h);
    for (long s = 0; s < count; ++s) {
      for (int j = 0; j < n; ++j) psi[j] *= std::polar(1.0, 0.5 * h * (1.0 - std::norm(psi[j])));
      Spectrum sp = g.forward(psi);
      sp = sp.cwiseProduct(lin);
      psi = g.backward_complex(sp);
      for (int j = 0; j < n; ++j) psi[j] *= std::polar(1.0, 0.5 * h * (1.0 - std::norm(psi[j])));
      for (int j : sponge_nodes) psi[j] = background[j] + (psi[j] - background[j]) * damp[j];
    }
  };

  GpTrajectory out;
  auto record = [&](double t) {
    WaveState w;
    w.t = t;
    w.wrap_phase = w0.wrap_phase;
    w.psi = psi.cwiseQuotient(ramp);
    out.states.push_back(std::move(w));
    out.energy.push_back(detail::gl_energy(g, psi));
  };
  record(w0.t);
  if (T == 0.0) return out;

  const long intervals = static_cast<long>(std::ceil(T / opts.cadence - 1e-9));
  bool warned = false;
  for (long i = 0; i < intervals; ++i) {
    const double span = std::min(opts.cadence, T - i * opts.cadence);
    const long m = std::max(1L, static_cast<long>(std::ceil(span / opts.dt - 1e-9)));
    run_chunk(span / static_cast<double>(m), m);
    out.steps += m;
    if (!psi.allFinite())
      throw NonFiniteError("gp_integrate: non-finite value at step " + std::to_string(out.steps), out.steps);
    double dev = 0.0;
    for (int j : watch_nodes) dev = std::max(dev, std::abs(psi[j] - background[j]));
    out.max_sponge_deviation = std::max(out.max_sponge_deviation, dev);
    if (!warned && dev > opts.contamination_threshold) {
      out.warnings.push_back("sponge contamination " + std::to_string(dev) + " at t = " +
                             std::to_string(w0.t + (i + 1) * opts.cadence));
      warned = true;
    }
    record(i + 1 == intervals ? w0.t + T : w0.t + (i + 1) * opts.cadence);
  }
  return out;
}

}  // namespace gplab
