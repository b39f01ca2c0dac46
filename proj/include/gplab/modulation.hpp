#pragma once

// Modulation parameters (a, c) of a state near the soliton family: the shift and
// speed for which eps = (eta(. + a) - eta_c, v(. + a) - v_c) is L^2-orthogonal to
// d_x Q_c and to the momentum gradient P'(Q_c) = (v_c, eta_c) / 2.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/hydro.hpp"
#include "gplab/soliton.hpp"

namespace gplab {

struct ModulationOptions {
  /// Admissible speeds: c_floor < |c| < sqrt(2) - c_margin.
  double c_floor = 0.05;
  double c_margin = 0.01;
  double tolerance = 1e-12;
  int max_iterations = 50;
  double fd_step = 1e-6;
  /// Largest ||eps||_X accepted at the initial guess.
  double basin = 0.5;
  double max_condition = 1e12;
};

struct OrthogonalityResidual {
  double r1;
  double r2;
  double max_abs() const { return std::max(std::abs(r1), std::abs(r2)); }
};

struct ModulationPoint {
  double t = 0.0;
  double a = 0.0;
  double c = 0.0;
  PairField eps;
  double eps_norm_X = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  int iterations = 0;
};

struct ModulationTrack {
  std::vector<ModulationPoint> points;
  std::vector<double> a_prime;
  std::vector<double> c_prime;

  double sup_eps_norm() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.eps_norm_X);
    return m;
  }
  double sup_c_prime() const {
    double m = 0.0;
    for (double v : c_prime) m = std::max(m, std::abs(v));
    return m;
  }
  double sup_a_prime_minus_c() const {
    double m = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) m = std::max(m, std::abs(a_prime[i] - points[i].c));
    return m;
  }
};

namespace detail {

inline void require_speed(double c, const ModulationOptions& o, const char* what) {
  if (!std::isfinite(c) || !(std::abs(c) > o.c_floor) || !(std::abs(c) < kSqrt2 - o.c_margin))
    throw DomainError(std::string(what) + ": speed " + std::to_string(c) + " outside the admissible interval");
}

inline PairField perturbation(const Grid& g, const HydroState& s, double a, double c) {
  const SolitonProfile q = eval_hydro(SolitonParams(c), g);
  return {translate(g, s.eta, a) - q.eta, translate(g, s.vee, a) - q.vee};
}

inline OrthogonalityResidual residual_of(const Grid& g, const PairField& eps, const SolitonProfile& q) {
  return {inner_l2(g, eps, q.d_pair()), 0.5 * inner_l2(g, eps, PairField{q.vee, q.eta})};
}

inline OrthogonalityResidual residual_at(const Grid& g, const HydroState& s, double a, double c) {
  const SolitonProfile q = eval_hydro(SolitonParams(c), g);
  const PairField eps{translate(g, s.eta, a) - q.eta, translate(g, s.vee, a) - q.vee};
  return residual_of(g, eps, q);
}

}  // namespace detail

/// (r1, r2) = (<eps, d_x Q_c>, (1/2) int (eta_c eps_v + v_c eps_eta)), with the
/// shift realized by Fourier-phase translation.
inline OrthogonalityResidual orthogonality_residual(const Grid& g, const HydroState& s, double a, double c,
                                                    const ModulationOptions& o = {}) {
  g.require(s.eta, "orthogonality_residual");
  g.require(s.vee, "orthogonality_residual");
  detail::require_speed(c, o, "orthogonality_residual");
  return detail::residual_at(g, s, a, c);
}

/// a from the parabola through the three nodes around max eta, c from the peak
/// value max eta_c = (2 - c^2)/2 with the sign of v at the peak.
inline std::pair<double, double> initial_guess(const Grid& g, const HydroState& s, const ModulationOptions& o = {}) {
  g.require(s.eta, "initial_guess");
  const int n = g.size();
  Eigen::Index jmax = 0;
  const double top = s.eta.maxCoeff(&jmax);
  if (!(top >= 1e-6)) throw ModulationError("initial_guess: no soliton (max eta below 1e-6)");
  if (!(top < 1.0)) throw ModulationError("initial_guess: max eta >= 1");
  const int j = static_cast<int>(jmax);
  const double fm = s.eta[(j - 1 + n) % n];
  const double f0 = s.eta[j];
  const double fp = s.eta[(j + 1) % n];
  const double curv = fm - 2.0 * f0 + fp;
  double a = g.node(j);
  double peak = f0;
  if (curv < 0.0) {
    const double off = 0.5 * (fm - fp) / curv;
    a += off * g.dx();
    peak = f0 - 0.125 * (fm - fp) * (fm - fp) / curv;
  }
  double mag = std::sqrt(std::max(0.0, 2.0 - 2.0 * peak));
  mag = std::clamp(mag, o.c_floor * (1.0 + 1e-9) + 1e-12, kSqrt2 - o.c_margin * (1.0 + 1e-9));
  const double sign = s.vee[j] < 0.0 ? -1.0 : 1.0;
  return {a, sign * mag};
}

/// Damped Newton on (r1, r2) in (a, c) with a central finite-difference Jacobian.
inline ModulationPoint solve(const Grid& g, const HydroState& s, std::pair<double, double> guess,
                             const ModulationOptions& o = {}) {
  g.require(s.eta, "modulation solve");
  g.require(s.vee, "modulation solve");
  double a = guess.first;
  double c = guess.second;
  detail::require_speed(c, o, "modulation solve");

  const double basin = norm_X(g, detail::perturbation(g, s, a, c));
  if (basin > o.basin)
    throw ModulationError("modulation solve: ||eps||_X = " + std::to_string(basin) + " at the guess exceeds " +
                          std::to_string(o.basin));

  auto admissible = [&](double cc) { return std::abs(cc) > o.c_floor && std::abs(cc) < kSqrt2 - o.c_margin; };
  OrthogonalityResidual r = detail::residual_at(g, s, a, c);
  std::vector<double> history{r.max_abs()};
  int it = 0;
  while (r.max_abs() > o.tolerance) {
    if (it == o.max_iterations) {
      std::string msg = "modulation solve: no convergence in " + std::to_string(o.max_iterations) +
                        " iterations; residual history:";
      for (double h : history) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.3e", h);
        msg += buf;
      }
      throw ModulationError(msg);
    }
    const double h = o.fd_step;
    const auto ra_p = detail::residual_at(g, s, a + h, c);
    const auto ra_m = detail::residual_at(g, s, a - h, c);
    const auto rc_p = detail::residual_at(g, s, a, c + h);
    const auto rc_m = detail::residual_at(g, s, a, c - h);
    Eigen::Matrix2d J;
    J << (ra_p.r1 - ra_m.r1) / (2 * h), (rc_p.r1 - rc_m.r1) / (2 * h), (ra_p.r2 - ra_m.r2) / (2 * h),
        (rc_p.r2 - rc_m.r2) / (2 * h);
    const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix2d>(J).singularValues();
    const double cond = sv[1] > 0.0 ? sv[0] / sv[1] : INFINITY;
    if (!(cond <= o.max_condition))
      throw ModulationError("modulation solve: degenerate Jacobian (condition number " + std::to_string(cond) + ")");
    const Eigen::Vector2d step = J.partialPivLu().solve(Eigen::Vector2d(-r.r1, -r.r2));

    // Backtrack until the residual decreases and c stays admissible.
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      const double an = a + lambda * step[0];
      const double cn = c + lambda * step[1];
      if (!admissible(cn)) continue;
      const auto rn = detail::residual_at(g, s, an, cn);
      if (rn.max_abs() < r.max_abs()) {
        a = an;
        c = cn;
        r = rn;
        accepted = true;
        break;
      }
    }
    ++it;
    history.push_back(r.max_abs());
    if (!accepted) {
      // Residual is at its rounding floor; accept if already close, otherwise fail.
      if (r.max_abs() <= 1e3 * o.tolerance) break;
      throw ModulationError("modulation solve: line search failed at residual " + std::to_string(r.max_abs()));
    }
  }

  ModulationPoint p;
  p.t = s.t;
  p.a = a;
  p.c = c;
  p.eps = detail::perturbation(g, s, a, c);
  p.eps_norm_X = norm_X(g, p.eps);
  p.r1 = r.r1;
  p.r2 = r.r2;
  p.iterations = it;
  return p;
}

inline ModulationPoint solve(const Grid& g, const HydroState& s, const ModulationOptions& o = {}) {
  return solve(g, s, initial_guess(g, s, o), o);
}

/// Derivative of samples f(t_i): fourth-order centered differences where five
/// equally spaced points are available, second order (non-uniform) elsewhere.
inline std::vector<double> finite_difference_derivative(const std::vector<double>& t, const std::vector<double>& f) {
  const std::size_t n = t.size();
  if (f.size() != n) throw DomainError("finite_difference_derivative: size mismatch");
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / (t[1] - t[0]);
    return d;
  }
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    const double h = t[lo + 1] - t[lo];
    for (std::size_t i = lo + 1; i < hi; ++i)
      if (std::abs((t[i + 1] - t[i]) - h) > 1e-9 * std::abs(h)) return false;
    return true;
  };
  // Three-point derivative at t[i] using nodes i0 < i1 < i2.
  auto three = [&](std::size_t i, std::size_t i0, std::size_t i1, std::size_t i2) {
    const double x = t[i];
    const double x0 = t[i0], x1 = t[i1], x2 = t[i2];
    const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return l0 * f[i0] + l1 * f[i1] + l2 * f[i2];
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 2 && i + 2 < n && uniform(i - 2, i + 2)) {
      const double h = t[i + 1] - t[i];
      d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    } else if (i == 0) {
      d[i] = three(i, 0, 1, 2);
    } else if (i + 1 == n) {
      d[i] = three(i, n - 3, n - 2, n - 1);
    } else {
      d[i] = three(i, i - 1, i, i + 1);
    }
  }
  return d;
}

/// Modulation along a trajectory, warm-started from the previous point with the
/// center advanced by c dt.
inline ModulationTrack track(const Grid& g, const std::vector<HydroState>& states, const ModulationOptions& o = {}) {
  ModulationTrack tr;
  tr.points.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const HydroState& s = states[i];
    if (i > 0 && !(s.t > states[i - 1].t)) throw DomainError("track: times must be strictly increasing");
    try {
      if (i == 0) {
        tr.points.push_back(solve(g, s, o));
      } else {
        const ModulationPoint& prev = tr.points.back();
        tr.points.push_back(solve(g, s, {prev.a + prev.c * (s.t - prev.t), prev.c}, o));
      }
    } catch (const ModulationError& e) {
      throw ModulationError("track at t = " + std::to_string(s.t) + ": " + e.what());
    }
  }
  std::vector<double> t, a, c;
  for (const auto& p : tr.points) {
    t.push_back(p.t);
    a.push_back(p.a);
    c.push_back(p.c);
  }
  tr.a_prime = finite_difference_derivative(t, a);
  tr.c_prime = finite_difference_derivative(t, c);
  return tr;
}

}  // namespace gplab
