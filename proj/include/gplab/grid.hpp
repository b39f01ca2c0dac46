#pragma once

// Uniform periodic grid on [-L, L) with FFT-based spectral calculus, quadrature,
// and the pair-field norms (L^2 x L^2 inner product, X = H^1 x L^2 norm and its
// windowed and exponentially weighted variants).

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "gplab/errors.hpp"

namespace gplab {

using Field = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;
using Spectrum = Eigen::VectorXcd;

/// (eta-type, v-type) pair of real fields on a common grid.
struct PairField {
  Field first;
  Field second;

  PairField() = default;
  PairField(Field a, Field b) : first(std::move(a)), second(std::move(b)) {}
  static PairField zero(Eigen::Index n) { return {Field::Zero(n), Field::Zero(n)}; }

  Eigen::Index size() const { return first.size(); }

  PairField& operator+=(const PairField& o) {
    first += o.first;
    second += o.second;
    return *this;
  }
  PairField& operator-=(const PairField& o) {
    first -= o.first;
    second -= o.second;
    return *this;
  }
  PairField& operator*=(double s) {
    first *= s;
    second *= s;
    return *this;
  }
  friend PairField operator+(PairField a, const PairField& b) { return a += b; }
  friend PairField operator-(PairField a, const PairField& b) { return a -= b; }
  friend PairField operator*(PairField a, double s) { return a *= s; }
  friend PairField operator*(double s, PairField a) { return a *= s; }

  bool all_finite() const { return first.allFinite() && second.allFinite(); }
};

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// FFTW planning is not thread-safe; execution through the new-array interface
// is. Plans are made with FFTW_ESTIMATE so the chosen algorithm (and hence the
// floating-point result) is deterministic from run to run.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* in = fftw_alloc_real(static_cast<size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    fwd_ = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys `in`.
  void backward(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out);
  }
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan fwd_{};
  fftw_plan bwd_{};
};

class ComplexFft {
 public:
  explicit ComplexFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_complex* a = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_complex* b = fftw_alloc_complex(static_cast<size_t>(n));
    fwd_ = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
  }
  ~ComplexFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  void forward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  void backward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  int n_;
  fftw_plan fwd_{};
  fftw_plan bwd_{};
};

}  // namespace detail

/// Uniform periodic discretization of [-L, L) with N (even) nodes.
///
/// Nodes are x_j = -L + j dx, dx = 2L/N. Wavenumbers are k_m = pi m / L. Real
/// fields use the half spectrum m = 0..N/2; complex fields use the full FFT
/// ordering m = 0..N/2-1, -N/2..-1. Copies share the FFT plans.
class Grid {
 public:
  Grid(double half_length, int n) : L_(half_length), n_(n) {
    if (!(half_length > 0.0) || !std::isfinite(half_length))
      throw DomainError("Grid: half-length must be positive and finite");
    if (n < 16 || n % 2 != 0) throw DomainError("Grid: N must be even and >= 16");
    dx_ = 2.0 * L_ / n_;
    x_.resize(n_);
    for (int j = 0; j < n_; ++j) x_[j] = -L_ + j * dx_;
    k_half_.resize(n_ / 2 + 1);
    for (int m = 0; m <= n_ / 2; ++m) k_half_[m] = std::numbers::pi * m / L_;
    k_full_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      const int m = j < n_ / 2 ? j : j - n_;
      k_full_[j] = std::numbers::pi * m / L_;
    }
    rfft_ = std::make_shared<const detail::RealFft>(n_);
    cfft_ = std::make_shared<const detail::ComplexFft>(n_);
  }

  double half_length() const { return L_; }
  int size() const { return n_; }
  double dx() const { return dx_; }
  double node(int j) const { return x_[j]; }
  const Field& nodes() const { return x_; }
  /// k_m for m = 0..N/2.
  const Field& half_wavenumbers() const { return k_half_; }
  /// k in FFT order for complex transforms.
  const Field& full_wavenumbers() const { return k_full_; }
  double nyquist_wavenumber() const { return k_half_[n_ / 2]; }

  bool same_as(const Grid& o) const { return n_ == o.n_ && L_ == o.L_; }

  void require(const Field& f, const char* what) const {
    if (f.size() != n_) throw DomainError(std::string(what) + ": field length does not match grid");
  }
  void require(const PairField& u, const char* what) const {
    require(u.first, what);
    require(u.second, what);
  }

  Spectrum forward(const Field& f) const {
    require(f, "forward");
    Spectrum s(n_ / 2 + 1);
    rfft_->forward(f.data(), s.data());
    return s;
  }
  /// Inverse of forward (includes the 1/N normalization).
  Field backward(Spectrum s) const {
    Field f(n_);
    rfft_->backward(s.data(), f.data());
    f /= static_cast<double>(n_);
    return f;
  }
  Spectrum forward(const ComplexField& f) const {
    Spectrum s(n_);
    cfft_->forward(f.data(), s.data());
    return s;
  }
  ComplexField backward_complex(const Spectrum& s) const {
    ComplexField f(n_);
    cfft_->backward(s.data(), f.data());
    f /= static_cast<double>(n_);
    return f;
  }

  /// Signed offset x - center folded into [-L, L).
  double wrapped_offset(double x, double center) const {
    const double period = 2.0 * L_;
    double d = std::fmod(x - center + L_, period);
    if (d < 0.0) d += period;
    return d - L_;
  }

 private:
  double L_;
  int n_;
  double dx_;
  Field x_;
  Field k_half_;
  Field k_full_;
  std::shared_ptr<const detail::RealFft> rfft_;
  std::shared_ptr<const detail::ComplexFft> cfft_;
};

/// Largest retained index under the 2/3 rule: modes with |m| > N/3 are removed.
inline int dealias_cutoff(const Grid& g) { return g.size() / 3; }

namespace detail {

inline std::complex<double> ik_power(double k, int order) {
  std::complex<double> r(1.0, 0.0);
  const std::complex<double> ik(0.0, k);
  for (int p = 0; p < order; ++p) r *= ik;
  return r;
}

inline Field spectral_derivative(const Grid& g, const Field& f, int order, int cutoff) {
  if (order < 1 || order > 4) throw DomainError("derivative: order must be in {1,2,3,4}");
  Spectrum s = g.forward(f);
  const Field& k = g.half_wavenumbers();
  const int half = g.size() / 2;
  for (int m = 0; m <= half; ++m) {
    if (m > cutoff) {
      s[m] = 0.0;
      continue;
    }
    s[m] *= ik_power(k[m], order);
  }
  // Odd derivatives zero the Nyquist mode (skew-symmetric differentiation matrix).
  if (order % 2 == 1) s[half] = 0.0;
  return g.backward(std::move(s));
}

}  // namespace detail

/// Spectral derivative d^order f / dx^order, order in {1,2,3,4}.
inline Field derivative(const Grid& g, const Field& f, int order = 1) {
  return detail::spectral_derivative(g, f, order, g.size() / 2);
}

/// Spectral derivative with the 2/3-rule truncation applied to the input.
inline Field dealiased_derivative(const Grid& g, const Field& f, int order = 1) {
  return detail::spectral_derivative(g, f, order, dealias_cutoff(g));
}

/// 2/3-rule projection of a real field.
inline Field dealias(const Grid& g, const Field& f) {
  Spectrum s = g.forward(f);
  for (int m = dealias_cutoff(g) + 1; m <= g.size() / 2; ++m) s[m] = 0.0;
  return g.backward(std::move(s));
}

/// Component-wise first derivative of a pair.
inline PairField derivative(const Grid& g, const PairField& u, int order = 1) {
  return {derivative(g, u.first, order), derivative(g, u.second, order)};
}

/// Returns f(x + a) by Fourier-phase translation (periodic).
inline Field translate(const Grid& g, const Field& f, double a) {
  Spectrum s = g.forward(f);
  const Field& k = g.half_wavenumbers();
  const int half = g.size() / 2;
  for (int m = 0; m < half; ++m) s[m] *= std::polar(1.0, k[m] * a);
  // Real part of the Nyquist phase keeps the result real.
  s[half] *= std::cos(k[half] * a);
  return g.backward(std::move(s));
}

inline PairField translate(const Grid& g, const PairField& u, double a) {
  return {translate(g, u.first, a), translate(g, u.second, a)};
}

/// Spectral derivative of a periodic complex field.
inline ComplexField derivative(const Grid& g, const ComplexField& f, int order = 1) {
  if (order < 1 || order > 4) throw DomainError("derivative: order must be in {1,2,3,4}");
  Spectrum s = g.forward(f);
  const Field& k = g.full_wavenumbers();
  for (int j = 0; j < g.size(); ++j) s[j] *= detail::ik_power(k[j], order);
  if (order % 2 == 1) s[g.size() / 2] = 0.0;
  return g.backward_complex(s);
}

/// Band-limited interpolation of a periodic complex field onto a grid refined by `factor`.
inline ComplexField upsample(const Grid& g, const ComplexField& f, int factor) {
  if (factor < 1) throw DomainError("upsample: factor must be >= 1");
  if (factor == 1) return f;
  const int n = g.size();
  const int nf = n * factor;
  Spectrum s = g.forward(f);
  Spectrum sf = Spectrum::Zero(nf);
  for (int j = 0; j < n / 2; ++j) sf[j] = s[j];
  for (int j = n / 2 + 1; j < n; ++j) sf[nf - (n - j)] = s[j];
  // Split the Nyquist coefficient symmetrically.
  sf[n / 2] = 0.5 * s[n / 2];
  sf[nf - n / 2] = 0.5 * s[n / 2];
  Grid fine(g.half_length(), nf);
  ComplexField out = fine.backward_complex(sf);
  return out * static_cast<double>(factor);
}

/// Rectangle-rule integral (spectrally accurate for periodic or decaying integrands).
inline double integrate(const Grid& g, const Field& f) {
  g.require(f, "integrate");
  return g.dx() * f.sum();
}

/// Cumulative integral F(x_j) = int_{-L}^{x_j} f, exact for band-limited f.
inline Field cumulative_integral(const Grid& g, const Field& f) {
  const int n = g.size();
  Spectrum s = g.forward(f);
  const double mean = s[0].real() / n;
  const Field& k = g.half_wavenumbers();
  s[0] = 0.0;
  s[n / 2] = 0.0;
  for (int m = 1; m < n / 2; ++m) s[m] /= std::complex<double>(0.0, k[m]);
  Field anti = g.backward(std::move(s));
  Field out(n);
  for (int j = 0; j < n; ++j) out[j] = anti[j] - anti[0] + mean * (g.node(j) + g.half_length());
  // The Nyquist component of f is not integrable on the grid; its contribution is dropped.
  return out;
}

/// <u, w>_{L^2 x L^2}.
inline double inner_l2(const Grid& g, const PairField& u, const PairField& w) {
  g.require(u, "inner_l2");
  g.require(w, "inner_l2");
  return g.dx() * (u.first.dot(w.first) + u.second.dot(w.second));
}

inline double inner_l2(const Grid& g, const Field& u, const Field& w) {
  g.require(u, "inner_l2");
  g.require(w, "inner_l2");
  return g.dx() * u.dot(w);
}

/// Squared X-norm density (d_x u1)^2 + u1^2 + u2^2 at each node.
inline Field x_density(const Grid& g, const PairField& u) {
  g.require(u, "x_density");
  const Field du = derivative(g, u.first, 1);
  return du.array().square() + u.first.array().square() + u.second.array().square();
}

/// ||u||_X with ||(f, g)||_X^2 = ||f||_{H^1}^2 + ||g||_{L^2}^2.
inline double norm_X(const Grid& g, const PairField& u) {
  return std::sqrt(integrate(g, x_density(g, u)));
}

/// X-norm restricted to |x - center| <= halfwidth (periodic distance).
inline double norm_X_window(const Grid& g, const PairField& u, double center, double halfwidth) {
  if (!(halfwidth > 0.0)) throw DomainError("norm_X_window: halfwidth must be positive");
  const Field dens = x_density(g, u);
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j)
    if (std::abs(g.wrapped_offset(g.node(j), center)) <= halfwidth) acc += dens[j];
  return std::sqrt(g.dx() * acc);
}

/// int ((d_x u1)^2 + u1^2 + u2^2) e^{2 nu |x - center|}, distance wrapped periodically.
///
/// The weight has a kink at the center, so the rectangle rule would only be second
/// order. Instead the band-limited interpolant of the density is integrated
/// exactly against the weight, one closed-form moment per Fourier mode.
inline double weighted_norm(const Grid& g, const PairField& u, double nu, double center) {
  if (!(nu >= 0.0)) throw DomainError("weighted_norm: rate must be non-negative");
  const double L = g.half_length();
  // Largest admissible exponent keeps e^{2 nu L} well inside double range.
  constexpr double kMaxExponent = 600.0;
  if (2.0 * nu * L > kMaxExponent)
    throw DomainError("weighted_norm: weight overflows on this box; need nu <= " +
                      std::to_string(kMaxExponent / (2.0 * L)));
  const int n = g.size();
  const Spectrum s = g.forward(x_density(g, u));
  const Field& k = g.half_wavenumbers();
  const double a = 2.0 * nu;
  const double ea = std::exp(a * L);
  // int_{-L}^{L} e^{iks} e^{a|s|} ds for k = k_m.
  auto moment = [&](int m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    if (a == 0.0) return m == 0 ? 2.0 * L : 0.0;
    return 2.0 * a * (sign * ea - 1.0) / (a * a + k[m] * k[m]);
  };
  double acc = s[0].real() * moment(0);
  for (int m = 1; m < n / 2; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    acc += 2.0 * sign * moment(m) * std::real(s[m] * std::polar(1.0, k[m] * center));
  }
  const int h = n / 2;
  acc += ((h % 2 == 0) ? 1.0 : -1.0) * moment(h) * s[h].real() * std::cos(k[h] * center);
  return acc / n;
}

}  // namespace gplab
