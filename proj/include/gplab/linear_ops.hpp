#pragma once

// Linearized operator H_c around Q_c, the symplectic operators J and S, the
// nonlinear remainder R_c, the weight M_c, the quadratic form G_c and its
// transformed operator T_c, together with dense assembly, spectra and the
// constrained coercivity constant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/soliton.hpp"

namespace gplab {

using Matrix = Eigen::MatrixXd;

inline constexpr int kMaxDenseSize = 2048;
inline constexpr double kNegativeTolerance = 1e-8;

/// Swap of components: S(u1, u2) = (u2, u1).
inline PairField apply_S(const PairField& u) { return {u.second, u.first}; }

/// J = -2 S d_x: (-2 d_x u2, -2 d_x u1).
inline PairField apply_J(const Grid& g, const PairField& u) {
  g.require(u, "apply_J");
  return {-2.0 * derivative(g, u.second), -2.0 * derivative(g, u.first)};
}

namespace detail {

// The first-derivative operator annihilates the Nyquist mode s_j = (-1)^j, so
// -d_x(a d_x .) built from it leaves that mode without stiffness. It is given
// its continuum energy k_N^2 <s, a s> / N instead, otherwise it shows up as a
// spurious low eigenvalue where the potential well of the core is deep.
inline Field nyquist_mode(int n) {
  Field s(n);
  for (int j = 0; j < n; ++j) s[j] = (j % 2 == 0) ? 1.0 : -1.0;
  return s;
}

inline double nyquist_stiffness(const Grid& g, const Field& a) {
  const double k = g.nyquist_wavenumber();
  return k * k * a.mean();
}

// -d_x(a d_x u) including the Nyquist stiffness.
inline Field divergence_form(const Grid& g, const Field& a, const Field& u) {
  const Field s = nyquist_mode(g.size());
  const double un = s.dot(u) / g.size();
  return -derivative(g, Field(a.cwiseProduct(derivative(g, u)))) + nyquist_stiffness(g, a) * un * s;
}

}  // namespace detail

/// Pointwise coefficients of H_c:
/// H_c u = (-d_x(a d_x u1) + V u1 + b u2, b u1 + w u2).
struct HcCoefficients {
  Field a;
  Field V;
  Field b;
  Field w;
};

inline HcCoefficients hc_coefficients(const SolitonParams& p, const Grid& g) {
  const int n = g.size();
  HcCoefficients k{Field(n), Field(n), Field(n), Field(n)};
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(p.c(), g.node(j) - p.a());
    const double w = 1.0 - q.eta;
    k.a[j] = 0.25 / w;
    k.V[j] = 0.25 * (2.0 - q.dd_eta / (w * w) - q.d_eta * q.d_eta / (w * w * w));
    k.b[j] = -(0.5 * p.c() + q.vee);
    k.w[j] = w;
  }
  return k;
}

inline PairField apply_Hc(const SolitonParams& p, const Grid& g, const PairField& u) {
  g.require(u, "apply_Hc");
  const HcCoefficients k = hc_coefficients(p, g);
  PairField out;
  out.first = detail::divergence_form(g, k.a, u.first) + k.V.cwiseProduct(u.first) + k.b.cwiseProduct(u.second);
  out.second = k.b.cwiseProduct(u.first) + k.w.cwiseProduct(u.second);
  return out;
}

/// u* = S H_c(eps).
inline PairField u_star(const SolitonParams& p, const Grid& g, const PairField& eps) {
  return apply_S(apply_Hc(p, g, eps));
}

/// Nonlinear remainder R_c(eps) = E'(Q_c + eps) - E'(Q_c) - E''(Q_c) eps in
/// explicit form. Requires max(eta_c + eps_eta) < 1.
inline PairField remainder_R(const SolitonParams& p, const Grid& g, const PairField& eps) {
  g.require(eps, "remainder_R");
  const SolitonProfile q = eval_hydro(p, g);
  const Field total = q.eta + eps.first;
  const double top = total.maxCoeff();
  if (!(top < 1.0)) throw GuardError("remainder_R: eta_c + eps_eta reaches 1", top);
  const auto e = eps.first.array();
  const Field de_f = derivative(g, eps.first);
  const auto de = de_f.array();
  const auto w0 = 1.0 - q.eta.array();
  const auto w = 1.0 - total.array();
  const auto dq = q.d_eta.array();
  const Field bracket = (e * de / (4.0 * w0 * w) + dq * e.square() / (4.0 * w0.square() * w)).matrix();
  PairField out;
  out.first = (dq.square() * e.square() * (3.0 - q.eta.array() - 2.0 * total.array()) / (8.0 * w0.cube() * w.square()) +
               dq * e * de * (2.0 - q.eta.array() - total.array()) / (4.0 * w0.square() * w.square()) +
               de.square() / (8.0 * w.square()) - 0.5 * eps.second.array().square())
                  .matrix() -
              derivative(g, bracket);
  out.second = -eps.first.cwiseProduct(eps.second);
  return out;
}

/// Entries of M_c = [[m11, m12], [m12, 0]].
struct McCoefficients {
  Field m11;
  Field m12;
};

inline McCoefficients mc_coefficients(const SolitonParams& p, const Grid& g) {
  const int n = g.size();
  McCoefficients m{Field(n), Field(n)};
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(p.c(), g.node(j) - p.a());
    const double w = 1.0 - q.eta;
    m.m11[j] = -p.c() * q.d_eta / (2.0 * w * w);
    m.m12[j] = -q.log_d_eta;
  }
  return m;
}

inline PairField apply_Mc(const SolitonParams& p, const Grid& g, const PairField& u) {
  g.require(u, "apply_Mc");
  const McCoefficients m = mc_coefficients(p, g);
  return {m.m11.cwiseProduct(u.first) + m.m12.cwiseProduct(u.second), m.m12.cwiseProduct(u.first)};
}

struct GcValues {
  /// 2 <S M_c u, H_c(J S u)>.
  double bilinear;
  /// Sum-of-squares form.
  double explicit_form;
};

inline GcValues Gc_form(const SolitonParams& p, const Grid& g, const PairField& u) {
  g.require(u, "Gc_form");
  const PairField jsu = apply_J(g, apply_S(u));
  const double bil = 2.0 * inner_l2(g, apply_S(apply_Mc(p, g, u)), apply_Hc(p, g, jsu));

  const int n = g.size();
  const Field du1 = derivative(g, u.first);
  Field density(n);
  const double c = p.c();
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(c, g.node(j) - p.a());
    const double w = 1.0 - q.eta;
    const double m = q.mu_over_eta;
    const double r1 = u.second[j] - c / (2.0 * m) * u.first[j] - c * q.log_d_eta / (2.0 * w * m) * du1[j];
    const double r2 = du1[j] - q.log_d_eta * u.first[j];
    density[j] = 2.0 * q.mu * r1 * r1 + 1.5 * (q.eta / m) * r2 * r2;
  }
  return {bil, integrate(g, density)};
}

/// Pointwise coefficients of T_c:
/// T_c w = (-d_x(a d_x w1) + V w1 + b w2, b w1 + d w2).
struct TcCoefficients {
  Field a;
  Field V;
  Field b;
  Field d;
};

inline TcCoefficients tc_coefficients(const SolitonParams& p, const Grid& g) {
  const int n = g.size();
  const double c = p.c();
  const double c3 = c * c * c;
  TcCoefficients k{Field(n), Field(n), Field(n), Field(n)};
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(c, g.node(j) - p.a());
    const double w = 1.0 - q.eta;
    const double m = q.mu_over_eta;
    const double l = q.log_d_eta;
    // d_x(9 eta' / (4 mu)) with (eta'/eta)' = -eta and (mu/eta)' = -3 eta'.
    const double dterm = 2.25 * (-q.eta / m + 3.0 * l * q.d_eta / (m * m));
    k.a[j] = 1.5 / m;
    k.V[j] = 27.0 * l * l / (8.0 * m) + c3 * c3 / (8.0 * m * w * w) + dterm;
    k.b[j] = -c3 / (2.0 * w);
    k.d[j] = 2.0 * m;
  }
  return k;
}

inline PairField apply_Tc(const SolitonParams& p, const Grid& g, const PairField& u) {
  g.require(u, "apply_Tc");
  const TcCoefficients k = tc_coefficients(p, g);
  PairField out;
  out.first = detail::divergence_form(g, k.a, u.first) + k.V.cwiseProduct(u.first) + k.b.cwiseProduct(u.second);
  out.second = k.b.cwiseProduct(u.first) + k.d.cwiseProduct(u.second);
  return out;
}

/// Kernel of T_c: (eta^{3/2}, c^3 eta^{5/2} / (4 mu (1 - eta))).
inline PairField tc_kernel(const SolitonParams& p, const Grid& g) {
  const int n = g.size();
  const double c3 = p.c() * p.c() * p.c();
  PairField k = PairField::zero(n);
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(p.c(), g.node(j) - p.a());
    const double e32 = q.eta * std::sqrt(q.eta);
    k.first[j] = e32;
    k.second[j] = c3 * e32 / (4.0 * q.mu_over_eta * (1.0 - q.eta));
  }
  return k;
}

/// Change of unknowns taking G_c(u) to <T_c w, w>.
inline PairField tc_transform(const SolitonParams& p, const Grid& g, const PairField& u) {
  g.require(u, "tc_transform");
  const int n = g.size();
  const double c = p.c();
  const Field du1 = derivative(g, u.first);
  PairField w = PairField::zero(n);
  for (int j = 0; j < n; ++j) {
    const SolitonPoint q = soliton_point(c, g.node(j) - p.a());
    const double s = std::sqrt(q.eta);
    const double om = 1.0 - q.eta;
    const double m = q.mu_over_eta;
    w.first[j] = s * u.first[j];
    w.second[j] = s * (u.second[j] - c * q.log_d_eta * q.log_d_eta / (4.0 * m * om) * u.first[j] -
                       c * q.log_d_eta / (2.0 * m * om) * du1[j]);
  }
  return w;
}

/// Bottom of the essential spectrum of H_c: (2 - c^2) / (3 + sqrt(1 + 4c^2)).
inline double essential_edge(double c) { return (2.0 - c * c) / (3.0 + std::sqrt(1.0 + 4.0 * c * c)); }

/// Smaller eigenvalue of the far-field symbol [[k^2/4 + 1/2, -c/2], [-c/2, 1]].
inline double hc_symbol_min(double c, double k) {
  const double p = 0.25 * k * k + 0.5;
  const double tr = p + 1.0;
  const double det = p - 0.25 * c * c;
  return 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
}

/// Bottom of the essential spectrum of T_c.
inline double tau_c(double c) {
  const double c2 = c * c;
  const double h = (3.0 - c2) * (22.0 + c2) / 16.0;
  return h - 0.5 * std::sqrt(4.0 * h * h - 27.0 * (2.0 - c2));
}

/// Smaller eigenvalue of the far-field symbol of T_c at wavenumber k.
inline double tc_symbol_min(double c, double k) {
  const double c2 = c * c;
  const double m = 3.0 - c2;
  const double t11 = 1.5 * k * k / m + (27.0 * (2.0 - c2) + c2 * c2 * c2) / (8.0 * m);
  const double t22 = 2.0 * m;
  const double t12 = -0.5 * c2 * c;
  const double tr = t11 + t22;
  const double det = t11 * t22 - t12 * t12;
  return 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
}

/// I*, J* and N = I* + kappa J* for a pair u*.
struct RigidityValues {
  double I;
  double J;
  double N;
};

/// I* = int (x - center) u1 u2 (offset folded into the box), J* = <M_c u, u>.
inline RigidityValues rigidity_functionals(const SolitonParams& p, const Grid& g, const PairField& u, double kappa) {
  g.require(u, "rigidity_functionals");
  const int n = g.size();
  Field y(n);
  for (int j = 0; j < n; ++j) y[j] = g.wrapped_offset(g.node(j), p.a());
  const double I = integrate(g, y.cwiseProduct(u.first).cwiseProduct(u.second));
  const double J = inner_l2(g, apply_Mc(p, g, u), u);
  return {I, J, I + kappa * J};
}

// Dense assembly.

inline void require_dense(const Grid& g) {
  if (g.size() > kMaxDenseSize)
    throw DomainError("dense assembly is limited to N <= " + std::to_string(kMaxDenseSize));
}

/// Box suited to dense spectral work at speed c: the profile decays to
/// ~e^{-24} at the edges and dx puts `resolution` nodes across the distance
/// from the real axis to the complex poles of 1/(1 - eta_c), which approach
/// the axis as c -> 0. The coefficients of T_c need about 12, those of H_c 8.
inline Grid operator_grid(double c, double resolution = 8.0) {
  const double s2 = 2.0 - c * c;
  const double kappa = 0.5 * std::sqrt(s2);
  const double pole = std::acos(std::sqrt(0.5 * s2)) / kappa;
  const double L = std::max(16.0, 12.0 / kappa);
  const double dx = std::min(0.12, pole / resolution);
  int n = static_cast<int>(std::ceil(2.0 * L / dx));
  n += n % 2;
  return Grid(L, n);
}

/// Spectral first-derivative matrix (Nyquist mode removed, skew-symmetric).
inline Matrix derivative_matrix(const Grid& g) {
  require_dense(g);
  const int n = g.size();
  const double scale = std::numbers::pi / g.half_length();
  Matrix D = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      if (j == l) continue;
      const int d = j - l;
      const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      D(j, l) = scale * 0.5 * sgn / std::tan(std::numbers::pi * d / n);
    }
  return D;
}

namespace detail {

// [[D^T diag(a) D + K_N + diag(V), diag(b)], [diag(b), diag(d)]] with the
// Nyquist stiffness K_N.
inline Matrix assemble_block(const Grid& g, const Matrix& D, const Field& a, const Field& V, const Field& b,
                             const Field& d) {
  const Eigen::Index n = D.rows();
  const Field s = nyquist_mode(g.size());
  Matrix A = Matrix::Zero(2 * n, 2 * n);
  A.topLeftCorner(n, n) = D.transpose() * a.asDiagonal() * D;
  A.topLeftCorner(n, n) += (nyquist_stiffness(g, a) / g.size()) * s * s.transpose();
  A.topLeftCorner(n, n).diagonal() += V;
  A.topRightCorner(n, n).diagonal() = b;
  A.bottomLeftCorner(n, n).diagonal() = b;
  A.bottomRightCorner(n, n).diagonal() = d;
  return A;
}

inline double asymmetry(const Matrix& A) { return (A - A.transpose()).cwiseAbs().maxCoeff(); }

inline Matrix symmetrized(const Matrix& A, const char* what) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double asym = asymmetry(A);
  if (asym > 1e-10 * scale) throw SpectralError(std::string(what) + ": assembled matrix is not symmetric");
  return 0.5 * (A + A.transpose());
}

inline Eigen::VectorXd stack(const PairField& u) {
  Eigen::VectorXd v(2 * u.size());
  v << u.first, u.second;
  return v;
}

inline PairField unstack(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size() / 2;
  return {v.head(n), v.tail(n)};
}

inline double sin_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double cs = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::sqrt(std::max(0.0, 1.0 - cs * cs));
}

}  // namespace detail

/// Dense symmetric H_c (2N x 2N) in the stacked basis (u1, u2).
inline Matrix assemble_Hc(const SolitonParams& p, const Grid& g) {
  const Matrix D = derivative_matrix(g);
  const HcCoefficients k = hc_coefficients(p, g);
  return detail::symmetrized(detail::assemble_block(g, D, k.a, k.V, k.b, k.w), "assemble_Hc");
}

/// Dense symmetric T_c (2N x 2N).
inline Matrix assemble_Tc(const SolitonParams& p, const Grid& g) {
  const Matrix D = derivative_matrix(g);
  const TcCoefficients k = tc_coefficients(p, g);
  return detail::symmetrized(detail::assemble_block(g, D, k.a, k.V, k.b, k.d), "assemble_Tc");
}

/// Gram matrix of the X-norm: dx ((D^T D + K_N + I) + I).
inline Matrix x_gram(const Grid& g) {
  const Matrix D = derivative_matrix(g);
  const int n = g.size();
  Matrix G = Matrix::Zero(2 * n, 2 * n);
  G.topLeftCorner(n, n) = D.transpose() * D;
  const Field s = detail::nyquist_mode(n);
  G.topLeftCorner(n, n) += (detail::nyquist_stiffness(g, Field::Ones(n)) / n) * s * s.transpose();
  G.topLeftCorner(n, n).diagonal().array() += 1.0;
  G.bottomRightCorner(n, n).diagonal().setOnes();
  return g.dx() * G;
}

struct SpectrumReport {
  double c = 0.0;
  /// Sorted ascending.
  Eigen::VectorXd eigenvalues;
  int count_negative = 0;
  /// Eigenvalue of smallest modulus.
  double zero_eigenvalue = 0.0;
  /// Sine of the angle between its eigenvector and the expected kernel vector.
  double kernel_alignment = 0.0;
  /// ||A k|| / ||k|| for the expected kernel vector k, applied matrix-free.
  double kernel_residual = 0.0;
  /// Closed-form bottom of the essential spectrum.
  double essential_edge = 0.0;
  /// Smallest eigenvalue above the zero mode (and above any negative ones).
  double first_positive = 0.0;
  /// essential_edge - first_positive: positive when a discrete eigenvalue lies in the gap.
  double gap = 0.0;
};

namespace detail {

inline SpectrumReport spectrum_of(const Matrix& A, const PairField& kernel, const PairField& applied, double edge,
                                  double c, const Grid& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  if (es.info() != Eigen::Success) throw SpectralError("eigensolver did not converge");
  SpectrumReport r;
  r.c = c;
  r.eigenvalues = es.eigenvalues();
  Eigen::Index iz = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&iz);
  r.zero_eigenvalue = r.eigenvalues[iz];
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
    if (r.eigenvalues[i] < -kNegativeTolerance) ++r.count_negative;
  r.kernel_alignment = sin_angle(es.eigenvectors().col(iz), stack(kernel));
  r.kernel_residual = std::sqrt(inner_l2(g, applied, applied) / inner_l2(g, kernel, kernel));
  r.essential_edge = edge;
  r.first_positive = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
    if (i != iz && r.eigenvalues[i] > -kNegativeTolerance) {
      r.first_positive = r.eigenvalues[i];
      break;
    }
  r.gap = edge - r.first_positive;
  return r;
}

}  // namespace detail

/// Full spectrum of the assembled H_c; expected kernel direction d_x Q_c.
inline SpectrumReport spectrum_Hc(const SolitonParams& p, const Grid& g) {
  const Matrix A = assemble_Hc(p, g);
  const PairField dq = eval_hydro(p, g).d_pair();
  return detail::spectrum_of(A, dq, apply_Hc(p, g, dq), essential_edge(p.c()), p.c(), g);
}

/// Full spectrum of the assembled T_c; expected kernel from tc_kernel.
inline SpectrumReport spectrum_Tc(const SolitonParams& p, const Grid& g) {
  const Matrix A = assemble_Tc(p, g);
  const PairField k = tc_kernel(p, g);
  return detail::spectrum_of(A, k, apply_Tc(p, g, k), tau_c(p.c()), p.c(), g);
}

struct CoercivityReport {
  double c = 0.0;
  /// Minimal X-norm Rayleigh quotient of H_c on the constrained subspace.
  double Lambda = 0.0;
  /// Same quotient without constraints.
  double unconstrained = 0.0;
  /// Smallest A with ||eps||_X <= A ||S H_c eps||_X on the constrained subspace.
  std::optional<double> inverse_bound;
  bool positive = false;
  /// Minimizer of the constrained quotient (the offending direction when Lambda <= 0).
  PairField minimizer;
};

namespace detail {

// Orthonormal basis of the Euclidean complement of the columns of C.
inline Matrix complement_basis(const Matrix& C) {
  Eigen::HouseholderQR<Matrix> qr(C);
  Matrix Q = qr.householderQ();
  return Q.rightCols(C.rows() - C.cols());
}

inline std::pair<double, Eigen::VectorXd> min_generalized(const Matrix& A, const Matrix& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, B);
  if (es.info() != Eigen::Success) throw SpectralError("generalized eigensolver did not converge");
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

}  // namespace detail

/// Constrained coercivity of H_c in the X-norm on the L^2-orthogonal complement
/// of {d_x Q_c, (1/2)(v_c, eta_c)}. With with_inverse_bound the constant A of
/// the inverse estimate is computed as well (one extra dense product).
inline CoercivityReport coercivity_Lambda(const SolitonParams& p, const Grid& g, bool with_inverse_bound = false) {
  const Matrix H = assemble_Hc(p, g);
  const Matrix G = x_gram(g);
  const SolitonProfile q = eval_hydro(p, g);
  const int n = g.size();
  Matrix C(2 * n, 2);
  C.col(0) = detail::stack(q.d_pair());
  C.col(1) = 0.5 * detail::stack({q.vee, q.eta});
  const Matrix Z = detail::complement_basis(C);

  CoercivityReport r;
  r.c = p.c();
  // Quadratic forms carry the quadrature weight dx, like the Gram matrix.
  const Matrix Hr = g.dx() * (Z.transpose() * H * Z);
  const Matrix Gr = Z.transpose() * G * Z;
  const auto [lam, y] = detail::min_generalized(0.5 * (Hr + Hr.transpose()), 0.5 * (Gr + Gr.transpose()));
  r.Lambda = lam;
  r.minimizer = detail::unstack(Z * y);
  r.positive = lam > 0.0;
  r.unconstrained = detail::min_generalized(g.dx() * H, G).first;

  if (with_inverse_bound) {
    // ||S H eps||_X^2 = eps^T (S H)^T G (S H) eps.
    Matrix SH(2 * n, 2 * n);
    SH.topRows(n) = H.bottomRows(n);
    SH.bottomRows(n) = H.topRows(n);
    const Matrix SHZ = SH * Z;
    const Matrix Kr = SHZ.transpose() * G * SHZ;
    const double m = detail::min_generalized(0.5 * (Kr + Kr.transpose()), 0.5 * (Gr + Gr.transpose())).first;
    if (m > 0.0) r.inverse_bound = 1.0 / std::sqrt(m);
  }
  return r;
}

}  // namespace gplab
