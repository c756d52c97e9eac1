// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlp {

/// Real trigonometric polynomial on the unit torus, stored as a constant
/// term plus a list of (wave vector, cosine amplitude, sine amplitude)
/// modes. Wave vectors are integer; the field is 1-periodic by construction.
struct TrigPoly {
  struct Mode {
    Eigen::Vector3i k = Eigen::Vector3i::Zero();  // only first d entries used
    double cos_amp = 0.0;
    double sin_amp = 0.0;
  };

  int d = 2;
  double c0 = 0.0;
  std::vector<Mode> modes;

  TrigPoly() = default;
  explicit TrigPoly(int dim, double constant = 0.0) : d(dim), c0(constant) {}

  double operator()(const Eigen::Vector3d& y) const;
  Eigen::Vector3d gradient(const Eigen::Vector3d& y) const;

  TrigPoly& add_mode(const Eigen::Vector3i& k, double cos_amp, double sin_amp);

  bool is_constant() const { return modes.empty(); }
  bool is_zero() const { return modes.empty() && c0 == 0.0; }
  int bandwidth() const;  // max over modes of max_i |k_i|

  /// Samples on the uniform n^d lattice y_j = j/n, flattened with the first
  /// axis fastest. `scale` multiplies the lattice coordinate (used to sample
  /// f(x/eps) on physical lattices); `origin` shifts it.
  Eigen::VectorXd sample_lattice(int n, double scale = 1.0,
                                 const Eigen::Vector3d& origin =
                                     Eigen::Vector3d::Zero()) const;
};

/// Coefficient fields (A, V, B, c) of the operator
///   -div(A(y) grad + V(y)) + B(y) grad + c(y) + lambda
/// together with the structural constants. All entries are trigonometric
/// polynomials, so periodicity and Hoelder regularity hold exactly.
struct PeriodicCoefficients {
  int d = 2;  // spatial dimension, 2 or 3
  int m = 1;  // system size
  double mu = 1.0;
  double kappa = 0.0;
  double tau = 0.5;

  std::vector<TrigPoly> A;  // (i,j,alpha,beta), size d*d*m*m
  std::vector<TrigPoly> V;  // (i,alpha,beta), size d*m*m
  std::vector<TrigPoly> B;  // (i,alpha,beta)
  std::vector<TrigPoly> c;  // (alpha,beta), size m*m

  PeriodicCoefficients() = default;
  PeriodicCoefficients(int dim, int msize);

  TrigPoly& a(int i, int j, int alpha, int beta);
  const TrigPoly& a(int i, int j, int alpha, int beta) const;
  TrigPoly& v(int i, int alpha, int beta);
  const TrigPoly& v(int i, int alpha, int beta) const;
  TrigPoly& b(int i, int alpha, int beta);
  const TrigPoly& b(int i, int alpha, int beta) const;
  TrigPoly& c_entry(int alpha, int beta);
  const TrigPoly& c_entry(int alpha, int beta) const;

  /// Leading tensor at y as an (m*d) x (m*d) matrix, row index alpha*d+i,
  /// column index beta*d+j.
  Eigen::MatrixXd eval_A(const Eigen::Vector3d& y) const;

  int bandwidth() const;      // max over all entries
  bool is_symmetric() const;  // a_ij^{ab} == a_ji^{ba} as mode tables

  /// Coefficients of the formal adjoint: A* = (a_ji^{ba}), V* = B^t, B* = V^t,
  /// c* = c^t.
  PeriodicCoefficients adjoint() const;

  /// Sup norms on the sampling lattice (4x the highest Fourier mode per
  /// axis); Frobenius norm over tensor indices at each point.
  double sup_norm_V() const;
  double sup_norm_B() const;
  double sup_norm_c() const;

  void validate() const;  // throws std::invalid_argument on malformed input
};

/// Operator parameters: the zero-order shift and oscillation scale.
struct OperatorParams {
  double lambda = 1.0;
  double epsilon = 1.0;
  double lambda0 = 0.0;

  /// Throws unless lambda >= max(lambda0, mu), the coercivity hypothesis.
  void require_coercive(double mu) const;
};

/// lambda0 = c_md / mu * (|V|_inf^2 + |B|_inf^2 + |c|_inf). The constant
/// c_md = 4 suffices for the Cauchy-Schwarz absorption in the coercivity
/// bound; it is exposed for experimentation.
double compute_lambda0(const PeriodicCoefficients& coeffs, double c_md = 4.0);

/// Extreme Rayleigh quotients of the symmetrized leading tensor over a
/// deterministic sampling lattice with at least n_samples points (and at
/// least 4x the coefficient bandwidth per axis). The extremizing xi are the
/// eigenvectors, so the result matches a dense eigenvalue scan.
std::pair<double, double> check_ellipticity(const PeriodicCoefficients& coeffs,
                                            int n_samples);

// Named presets. d must be 2 or 3.
PeriodicCoefficients preset_identity(int d);
PeriodicCoefficients preset_laminate_2sin(int d);
PeriodicCoefficients preset_checkerboard_smooth(int d);

/// Resolves "identity" | "laminate-2sin" | "checkerboard-smooth" or a path
/// to a JSON coefficient file.
PeriodicCoefficients load_coefficients(const std::string& name_or_path, int d);

PeriodicCoefficients coefficients_from_json(const std::string& json_text);
std::string coefficients_to_json(const PeriodicCoefficients& coeffs);

}  // namespace hlp
