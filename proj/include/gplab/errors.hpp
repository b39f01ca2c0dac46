#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

/// Invalid argument, parameter out of range, or mismatched grids.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The hydrodynamical state left the admissible set max(eta) < 1 - sigma_guard.
class GuardError : public std::runtime_error {
 public:
  GuardError(const std::string& what, double max_eta)
      : std::runtime_error(what), max_eta_(max_eta) {}
  double max_eta() const noexcept { return max_eta_; }

 private:
  double max_eta_;
};

/// A Madelung lift was requested for a field whose modulus vanishes.
class LiftingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared during time stepping.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Modulation could not be computed (no soliton, degenerate Jacobian, no convergence).
class ModulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A spectral computation produced an internally inconsistent result.
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gplab
