// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/cell.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

namespace hlp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd compute_residuals(const CorrectorSet& set,
                                  const PeriodicCoefficients& coeffs);

using SpectrumVec = std::vector<Eigen::VectorXcd>;  // m component spectra

double re_dot(const SpectrumVec& x, const SpectrumVec& y) {
  double s = 0.0;
  for (size_t c = 0; c < x.size(); ++c) s += x[c].dot(y[c]).real();
  return s;
}

double vec_norm(const SpectrumVec& x) { return std::sqrt(re_dot(x, x)); }

void axpy(double a, const SpectrumVec& x, SpectrumVec& y) {
  for (size_t c = 0; c < x.size(); ++c) y[c] += a * x[c];
}

SpectrumVec zero_like(int m, long total) {
  SpectrumVec v(m);
  for (int c = 0; c < m; ++c) v[c] = Eigen::VectorXcd::Zero(total);
  return v;
}

// Collocation operator T(u) = -div(A grad u) with 3/2-rule dealiasing,
// plus the constant-symbol preconditioner.
class CellOperator {
 public:
  CellOperator(const PeriodicCoefficients& coeffs, int N)
      : coeffs_(coeffs), d_(coeffs.d), m_(coeffs.m), grid_(coeffs.d, N) {
    int M = 3 * N / 2;
    const int bw = coeffs.bandwidth();
    if (M < N + 2 * bw + 2) M = N + 2 * bw + 2;
    if (M % 2) ++M;
    pad_ = TorusGrid(d_, M);
    a_samples_.resize(d_ * d_ * m_ * m_);
    a_nonzero_.assign(d_ * d_ * m_ * m_, false);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        for (int al = 0; al < m_; ++al)
          for (int be = 0; be < m_; ++be) {
            const TrigPoly& entry = coeffs.a(i, j, al, be);
            if (entry.is_zero()) continue;
            const int q = idx(i, j, al, be);
            a_nonzero_[q] = true;
            a_samples_[q] = entry.sample_lattice(M);
          }
    mean_A_.resize(d_ * d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        Eigen::MatrixXd mean(m_, m_);
        for (int al = 0; al < m_; ++al)
          for (int be = 0; be < m_; ++be)
            mean(al, be) = 0.5 * (coeffs.a(i, j, al, be).c0 +
                                  coeffs.a(j, i, be, al).c0);
        mean_A_[i * d_ + j] = mean;
      }
  }

  const TorusGrid& grid() const { return grid_; }
  const TorusGrid& padded_grid() const { return pad_; }

  // v = -div(A grad u), zero mode cleared.
  void apply(const SpectrumVec& u, SpectrumVec& v) const {
    // Gradients on the padded grid, in real space.
    std::vector<Eigen::VectorXd> grads(m_ * d_);
    Eigen::VectorXcd work;
    for (int ga = 0; ga < m_; ++ga)
      for (int j = 0; j < d_; ++j) {
        spectral_derivative(grid_, u[ga], j, work);
        Eigen::VectorXcd padded = pad_spectrum(grid_, pad_, work);
        from_spectrum(pad_, padded);
        grads[ga * d_ + j] = padded.real();
      }
    for (int al = 0; al < m_; ++al) v[al].setZero(grid_.total);
    Eigen::VectorXd flux(pad_.total);
    for (int al = 0; al < m_; ++al) {
      for (int i = 0; i < d_; ++i) {
        flux.setZero();
        bool any = false;
        for (int j = 0; j < d_; ++j)
          for (int ga = 0; ga < m_; ++ga) {
            const int q = idx(i, j, al, ga);
            if (!a_nonzero_[q]) continue;
            flux.array() += a_samples_[q].array() * grads[ga * d_ + j].array();
            any = true;
          }
        if (!any) continue;
        Eigen::VectorXcd fhat = real_to_complex(flux);
        to_spectrum(pad_, fhat);
        Eigen::VectorXcd trunc = pad_spectrum(pad_, grid_, fhat);
        spectral_derivative(grid_, trunc, i, work);
        v[al] -= work;
      }
      v[al][0] = 0.0;
    }
  }

  // z = P^{-1} r with the mean-coefficient symbol.
  void precondition(const SpectrumVec& r, SpectrumVec& z) const {
    for (int al = 0; al < m_; ++al) z[al].resize(grid_.total);
    Eigen::MatrixXd S(m_, m_);
    for (long p = 0; p < grid_.total; ++p) {
      if (p == 0) {
        for (int al = 0; al < m_; ++al) z[al][0] = 0.0;
        continue;
      }
      Eigen::Vector3i tidx = grid_.unflatten(p);
      Eigen::Vector3d k = Eigen::Vector3d::Zero();
      for (int a = 0; a < d_; ++a)
        k[a] = kTwoPi * grid_.wavenumber(tidx[a]);
      S.setZero();
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) S += mean_A_[i * d_ + j] * (k[i] * k[j]);
      if (m_ == 1) {
        const double s = std::max(S(0, 0), 1e-300);
        z[0][p] = r[0][p] / s;
      } else {
        Eigen::MatrixXd rhs(m_, 2);
        for (int al = 0; al < m_; ++al) {
          rhs(al, 0) = r[al][p].real();
          rhs(al, 1) = r[al][p].imag();
        }
        Eigen::MatrixXd sol = S.ldlt().solve(rhs);
        for (int al = 0; al < m_; ++al)
          z[al][p] = std::complex<double>(sol(al, 0), sol(al, 1));
      }
    }
  }

 private:
  int idx(int i, int j, int al, int be) const {
    return ((i * d_ + j) * m_ + al) * m_ + be;
  }

  const PeriodicCoefficients& coeffs_;
  int d_, m_;
  TorusGrid grid_, pad_;
  std::vector<Eigen::VectorXd> a_samples_;
  std::vector<bool> a_nonzero_;
  std::vector<Eigen::MatrixXd> mean_A_;
};

// Right-hand side spectra for column (k, beta).
SpectrumVec cell_rhs(const PeriodicCoefficients& coeffs, const TorusGrid& grid,
                     int k, int beta) {
  const int m = coeffs.m;
  SpectrumVec rhs = zero_like(m, grid.total);
  Eigen::VectorXcd work;
  for (int al = 0; al < m; ++al) {
    for (int i = 0; i < coeffs.d; ++i) {
      const TrigPoly& entry =
          (k == 0) ? coeffs.v(i, al, beta) : coeffs.a(i, k - 1, al, beta);
      if (entry.is_zero()) continue;
      Eigen::VectorXcd spec = real_to_complex(entry.sample_lattice(grid.N));
      to_spectrum(grid, spec);
      spectral_derivative(grid, spec, i, work);
      rhs[al] += work;
    }
    rhs[al][0] = 0.0;
  }
  return rhs;
}

// Preconditioned CG on the mean-zero subspace.
int solve_pcg(const CellOperator& op, const SpectrumVec& b, SpectrumVec& x,
              double tol, int max_iters, double& final_rel) {
  const int m = static_cast<int>(b.size());
  const long total = b[0].size();
  const double bnorm = vec_norm(b);
  if (bnorm == 0.0) {
    x = zero_like(m, total);
    final_rel = 0.0;
    return 0;
  }
  x = zero_like(m, total);
  SpectrumVec r = b, z = zero_like(m, total), p, Ap = zero_like(m, total);
  op.precondition(r, z);
  p = z;
  double rz = re_dot(r, z);
  int it = 0;
  for (; it < max_iters; ++it) {
    op.apply(p, Ap);
    const double pAp = re_dot(p, Ap);
    if (pAp <= 0.0) break;
    const double alpha = rz / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    final_rel = vec_norm(r) / bnorm;
    if (final_rel <= tol) break;
    op.precondition(r, z);
    const double rz_new = re_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int c = 0; c < m; ++c) p[c] = z[c] + beta * p[c];
  }
  return it;
}

// Preconditioned BiCGStab for nonsymmetric leading tensors.
int solve_bicgstab(const CellOperator& op, const SpectrumVec& b,
                   SpectrumVec& x, double tol, int max_iters,
                   double& final_rel) {
  const int m = static_cast<int>(b.size());
  const long total = b[0].size();
  const double bnorm = vec_norm(b);
  if (bnorm == 0.0) {
    x = zero_like(m, total);
    final_rel = 0.0;
    return 0;
  }
  x = zero_like(m, total);
  SpectrumVec r = b;
  SpectrumVec rhat = r, p = zero_like(m, total), v = zero_like(m, total);
  SpectrumVec s = zero_like(m, total), t = zero_like(m, total);
  SpectrumVec y = zero_like(m, total), z = zero_like(m, total);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  for (; it < max_iters; ++it) {
    const double rho_new = re_dot(rhat, r);
    if (std::abs(rho_new) < 1e-300) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int c = 0; c < m; ++c) p[c] = r[c] + beta * (p[c] - omega * v[c]);
    op.precondition(p, y);
    op.apply(y, v);
    alpha = rho / re_dot(rhat, v);
    for (int c = 0; c < m; ++c) s[c] = r[c] - alpha * v[c];
    axpy(alpha, y, x);
    final_rel = vec_norm(s) / bnorm;
    if (final_rel <= tol) break;
    op.precondition(s, z);
    op.apply(z, t);
    omega = re_dot(t, s) / re_dot(t, t);
    axpy(omega, z, x);
    for (int c = 0; c < m; ++c) r[c] = s[c] - omega * t[c];
    final_rel = vec_norm(r) / bnorm;
    if (final_rel <= tol) break;
  }
  return it;
}

}  // namespace

const Eigen::VectorXcd& CorrectorSet::spectrum(int k, int alpha,
                                               int beta) const {
  return chi_hat[(k * m + alpha) * m + beta];
}
Eigen::VectorXcd& CorrectorSet::spectrum(int k, int alpha, int beta) {
  return chi_hat[(k * m + alpha) * m + beta];
}

double CorrectorSet::eval(int k, int alpha, int beta,
                          const Eigen::Vector3d& y) const {
  return eval_spectrum(grid, spectrum(k, alpha, beta), y);
}

double CorrectorSet::eval_deriv(int k, int axis, int alpha, int beta,
                                const Eigen::Vector3d& y) const {
  Eigen::VectorXcd dspec;
  spectral_derivative(grid, spectrum(k, alpha, beta), axis, dspec);
  return eval_spectrum(grid, dspec, y);
}

void CorrectorSet::build_sampler(int upsample) const {
  if (upsample <= 0) {
    const int target = d == 2 ? 512 : 128;
    upsample = std::max(1, target / N);
  }
  const int n = N * upsample;
  TorusGrid fine(d, n);
  sampler_n_ = n;
  sampler_values_.assign(chi_hat.size(), Eigen::VectorXd());
  for (size_t q = 0; q < chi_hat.size(); ++q) {
    Eigen::VectorXcd spec = pad_spectrum(grid, fine, chi_hat[q]);
    from_spectrum(fine, spec);
    sampler_values_[q] = spec.real();
  }
}

double CorrectorSet::sample(int k, int alpha, int beta,
                            const Eigen::Vector3d& y) const {
  if (sampler_n_ == 0) build_sampler();
  const int n = sampler_n_;
  const Eigen::VectorXd& vals = sampler_values_[(k * m + alpha) * m + beta];
  // Periodic uniform cubic Lagrange interpolation per axis.
  int base[3] = {0, 0, 0};
  double wts[3][4];
  for (int a = 0; a < d; ++a) {
    double u = y[a] * n;
    double fl = std::floor(u);
    double t = u - fl;
    base[a] = static_cast<int>(fl) - 1;
    wts[a][0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    wts[a][1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    wts[a][2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    wts[a][3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  }
  auto wrap = [n](int i) {
    i %= n;
    return i < 0 ? i + n : i;
  };
  double acc = 0.0;
  const int nk = (d == 3) ? 4 : 1;
  for (int ck = 0; ck < nk; ++ck)
    for (int cj = 0; cj < 4; ++cj)
      for (int ci = 0; ci < 4; ++ci) {
        long idx = wrap(base[0] + ci);
        idx += static_cast<long>(wrap(base[1] + cj)) * n;
        double w = wts[0][ci] * wts[1][cj];
        if (d == 3) {
          idx += static_cast<long>(wrap(base[2] + ck)) * n * n;
          w *= wts[2][ck];
        }
        acc += w * vals[idx];
      }
  return acc;
}

CorrectorSet solve_correctors(const PeriodicCoefficients& coeffs, int N,
                              bool adjoint, const CellSolveOptions& opts) {
  coeffs.validate();
  if (N < 2 || (N & (N - 1)) != 0)
    throw std::invalid_argument("grid resolution must be a power of two");
  if (N < 2 * coeffs.bandwidth())
    throw std::invalid_argument(
        "grid resolution must be >= 2x coefficient bandwidth");
  const PeriodicCoefficients eff = adjoint ? coeffs.adjoint() : coeffs;
  CellOperator op(eff, N);
  const bool symmetric = eff.is_symmetric();

  CorrectorSet set;
  set.d = coeffs.d;
  set.m = coeffs.m;
  set.N = N;
  set.adjoint = adjoint;
  set.grid = op.grid();
  set.chi_hat.assign((coeffs.d + 1) * coeffs.m * coeffs.m,
                     Eigen::VectorXcd::Zero(op.grid().total));
  set.residuals.setZero(coeffs.d + 1);

  for (int k = 0; k <= coeffs.d; ++k)
    for (int beta = 0; beta < coeffs.m; ++beta) {
      SpectrumVec b = cell_rhs(eff, op.grid(), k, beta);
      SpectrumVec x;
      double rel = 0.0;
      const int iters =
          symmetric ? solve_pcg(op, b, x, opts.tol, opts.max_iters, rel)
                    : solve_bicgstab(op, b, x, opts.tol, opts.max_iters, rel);
      if (rel > opts.tol * 50 && rel > 1e-10)
        throw CellSolveError("corrector solve did not converge (k=" +
                                 std::to_string(k) + ", rel=" +
                                 std::to_string(rel) + ", iters=" +
                                 std::to_string(iters) + ")",
                             rel);
      for (int al = 0; al < coeffs.m; ++al)
        set.spectrum(k, al, beta) = x[al];
    }

  // Certify with an independent pass over the assembled fluxes.
  set.residuals = compute_residuals(set, coeffs);
  double mean_abs = 0.0;
  for (const auto& spec : set.chi_hat)
    mean_abs = std::max(mean_abs, std::abs(spec[0]));
  set.max_mean_abs = mean_abs;
  return set;
}

namespace {

Eigen::VectorXd compute_residuals(const CorrectorSet& set,
                                  const PeriodicCoefficients& coeffs) {
  const PeriodicCoefficients eff =
      set.adjoint ? coeffs.adjoint() : coeffs;
  const int d = set.d, m = set.m;
  int M = 3 * set.N / 2;
  const int bw = eff.bandwidth();
  if (M < set.N + 2 * bw + 2) M = set.N + 2 * bw + 2;
  if (M % 2) ++M;
  TorusGrid pad(d, M);
  Eigen::VectorXd residuals(d + 1);
  Eigen::VectorXcd work;
  for (int k = 0; k <= d; ++k) {
    double res2 = 0.0;
    for (int beta = 0; beta < m; ++beta) {
      // flux_i^al = sum_j,ga a_ij^{al,ga} d_j chi^{ga,beta} + rhs-field
      std::vector<Eigen::VectorXd> grads(m * d);
      for (int ga = 0; ga < m; ++ga)
        for (int j = 0; j < d; ++j) {
          spectral_derivative(set.grid, set.spectrum(k, ga, beta), j, work);
          Eigen::VectorXcd padded = pad_spectrum(set.grid, pad, work);
          from_spectrum(pad, padded);
          grads[ga * d + j] = padded.real();
        }
      Eigen::VectorXcd div = Eigen::VectorXcd::Zero(pad.total);
      for (int al = 0; al < m; ++al) {
        Eigen::VectorXcd div_al = Eigen::VectorXcd::Zero(pad.total);
        for (int i = 0; i < d; ++i) {
          Eigen::VectorXd flux = Eigen::VectorXd::Zero(pad.total);
          for (int j = 0; j < d; ++j)
            for (int ga = 0; ga < m; ++ga) {
              const TrigPoly& entry = eff.a(i, j, al, ga);
              if (entry.is_zero()) continue;
              flux.array() +=
                  entry.sample_lattice(M).array() * grads[ga * d + j].array();
            }
          const TrigPoly& rhs_entry =
              (k == 0) ? eff.v(i, al, beta) : eff.a(i, k - 1, al, beta);
          if (!rhs_entry.is_zero()) flux += rhs_entry.sample_lattice(M);
          Eigen::VectorXcd fhat = real_to_complex(flux);
          to_spectrum(pad, fhat);
          spectral_derivative(pad, fhat, i, work);
          div_al += work;
        }
        res2 += div_al.squaredNorm();
      }
    }
    residuals[k] = std::sqrt(res2);
  }
  return residuals;
}

}  // namespace

double corrector_residual(const CorrectorSet& set,
                          const PeriodicCoefficients& coeffs) {
  return compute_residuals(set, coeffs).maxCoeff();
}

void export_correctors(const CorrectorSet& set, const std::string& prefix,
                       bool csv) {
  const int fields = (set.d + 1) * set.m * set.m;
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  std::vector<Eigen::VectorXd> values(fields);
  for (int q = 0; q < fields; ++q) {
    Eigen::VectorXcd spec = set.chi_hat[q];
    from_spectrum(set.grid, spec);
    values[q] = spec.real();
    bin.write(reinterpret_cast<const char*>(values[q].data()),
              values[q].size() * sizeof(double));
  }
  bin.close();

  nlohmann::json header;
  header["d"] = set.d;
  header["m"] = set.m;
  header["grid"] = set.N;
  header["adjoint"] = set.adjoint;
  header["fields"] = fields;
  header["layout"] = "field-major, first axis fastest; field index "
                     "(k*m+alpha)*m+beta";
  std::vector<double> res(set.residuals.data(),
                          set.residuals.data() + set.residuals.size());
  header["residuals"] = res;
  header["max_mean_abs"] = set.max_mean_abs;
  std::ofstream js(prefix + ".json");
  js << header.dump(2) << "\n";

  if (csv) {
    std::ofstream out(prefix + ".csv");
    out << "field,point,value\n";
    for (int q = 0; q < fields; ++q)
      for (long p = 0; p < set.grid.total; ++p)
        out << q << "," << p << "," << values[q][p] << "\n";
  }
}

}  // namespace hlp
