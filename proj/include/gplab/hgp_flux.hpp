#pragma once

#include <limits>
#include <string>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"

namespace gplab {

/// Right-hand side of the hydrodynamical system
///
///   d_t eta = d_x(2 eta v - 2 v),
///   d_t v   = d_x(v^2 - eta + d_x(d_x eta / (2(1 - eta))) - (d_x eta)^2 / (4 (1 - eta)^2)),
///
/// with spectral derivatives and 2/3-rule truncation of every flux before it is
/// differentiated. The rational terms are evaluated pointwise.
/// Throws GuardError when max eta >= 1 - sigma_guard.
inline PairField hgp_rhs_fields(const Grid& g, const Field& eta, const Field& vee, double sigma_guard) {
  g.require(eta, "hgp_rhs");
  g.require(vee, "hgp_rhs");
  const bool finite = eta.allFinite() && vee.allFinite();
  const double max_eta = finite ? eta.maxCoeff() : std::numeric_limits<double>::quiet_NaN();
  if (!(max_eta < 1.0 - sigma_guard))
    throw GuardError("hgp_rhs: max eta = " + std::to_string(max_eta) + " reached the guard 1 - " +
                         std::to_string(sigma_guard),
                     max_eta);
  const Field d_eta = derivative(g, eta, 1);
  const Field one_minus = (1.0 - eta.array()).matrix();
  const Field q = (d_eta.array() / (2.0 * one_minus.array())).matrix();
  const Field dq = dealiased_derivative(g, q, 1);
  const Field flux_eta = (2.0 * eta.array() * vee.array() - 2.0 * vee.array()).matrix();
  const Field flux_vee = (vee.array().square() - eta.array() + dq.array() -
                          d_eta.array().square() / (4.0 * one_minus.array().square()))
                             .matrix();
  return {dealiased_derivative(g, flux_eta, 1), dealiased_derivative(g, flux_vee, 1)};
}

}  // namespace gplab
