// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/coeffs.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hlp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double TrigPoly::operator()(const Eigen::Vector3d& y) const {
  double v = c0;
  for (const Mode& mode : modes) {
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += mode.k[a] * y[a];
    phase *= kTwoPi;
    v += mode.cos_amp * std::cos(phase) + mode.sin_amp * std::sin(phase);
  }
  return v;
}

Eigen::Vector3d TrigPoly::gradient(const Eigen::Vector3d& y) const {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const Mode& mode : modes) {
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += mode.k[a] * y[a];
    phase *= kTwoPi;
    const double dc = -mode.cos_amp * std::sin(phase);
    const double ds = mode.sin_amp * std::cos(phase);
    for (int a = 0; a < d; ++a) g[a] += kTwoPi * mode.k[a] * (dc + ds);
  }
  return g;
}

TrigPoly& TrigPoly::add_mode(const Eigen::Vector3i& k, double cos_amp,
                             double sin_amp) {
  Mode mode;
  mode.k = k;
  mode.cos_amp = cos_amp;
  mode.sin_amp = sin_amp;
  modes.push_back(mode);
  return *this;
}

int TrigPoly::bandwidth() const {
  int bw = 0;
  for (const Mode& mode : modes)
    for (int a = 0; a < d; ++a) bw = std::max(bw, std::abs(mode.k[a]));
  return bw;
}

Eigen::VectorXd TrigPoly::sample_lattice(int n, double scale,
                                         const Eigen::Vector3d& origin) const {
  const int total = static_cast<int>(std::pow(n, d) + 0.5);
  Eigen::VectorXd out = Eigen::VectorXd::Constant(total, c0);
  // Per-mode complex rotation recurrence along the fastest axis.
  for (const Mode& mode : modes) {
    const std::complex<double> amp(mode.cos_amp, -mode.sin_amp);
    // value += Re(amp * e^{i phase}), phase = 2 pi k . (origin + scale*j/n)
    const double dphase0 = kTwoPi * mode.k[0] * scale / n;
    const std::complex<double> rot0(std::cos(dphase0), std::sin(dphase0));
    const int n_outer = total / n;
    for (int outer = 0; outer < n_outer; ++outer) {
      double phase = kTwoPi * mode.k[0] * origin[0];
      int rem = outer;
      for (int a = 1; a < d; ++a) {
        const int ja = rem % n;
        rem /= n;
        phase += kTwoPi * mode.k[a] * (origin[a] + scale * ja / n);
      }
      std::complex<double> z(std::cos(phase), std::sin(phase));
      double* row = out.data() + static_cast<long>(outer) * n;
      for (int j0 = 0; j0 < n; ++j0) {
        row[j0] += (amp * z).real();
        z *= rot0;
        if ((j0 & 1023) == 1023) z /= std::abs(z);
      }
    }
  }
  return out;
}

PeriodicCoefficients::PeriodicCoefficients(int dim, int msize)
    : d(dim), m(msize) {
  A.assign(d * d * m * m, TrigPoly(d));
  V.assign(d * m * m, TrigPoly(d));
  B.assign(d * m * m, TrigPoly(d));
  c.assign(m * m, TrigPoly(d));
}

TrigPoly& PeriodicCoefficients::a(int i, int j, int alpha, int beta) {
  return A[((i * d + j) * m + alpha) * m + beta];
}
const TrigPoly& PeriodicCoefficients::a(int i, int j, int alpha,
                                        int beta) const {
  return A[((i * d + j) * m + alpha) * m + beta];
}
TrigPoly& PeriodicCoefficients::v(int i, int alpha, int beta) {
  return V[(i * m + alpha) * m + beta];
}
const TrigPoly& PeriodicCoefficients::v(int i, int alpha, int beta) const {
  return V[(i * m + alpha) * m + beta];
}
TrigPoly& PeriodicCoefficients::b(int i, int alpha, int beta) {
  return B[(i * m + alpha) * m + beta];
}
const TrigPoly& PeriodicCoefficients::b(int i, int alpha, int beta) const {
  return B[(i * m + alpha) * m + beta];
}
TrigPoly& PeriodicCoefficients::c_entry(int alpha, int beta) {
  return c[alpha * m + beta];
}
const TrigPoly& PeriodicCoefficients::c_entry(int alpha, int beta) const {
  return c[alpha * m + beta];
}

Eigen::MatrixXd PeriodicCoefficients::eval_A(const Eigen::Vector3d& y) const {
  Eigen::MatrixXd Q(m * d, m * d);
  for (int alpha = 0; alpha < m; ++alpha)
    for (int i = 0; i < d; ++i)
      for (int beta = 0; beta < m; ++beta)
        for (int j = 0; j < d; ++j)
          Q(alpha * d + i, beta * d + j) = a(i, j, alpha, beta)(y);
  return Q;
}

int PeriodicCoefficients::bandwidth() const {
  int bw = 0;
  for (const auto& t : A) bw = std::max(bw, t.bandwidth());
  for (const auto& t : V) bw = std::max(bw, t.bandwidth());
  for (const auto& t : B) bw = std::max(bw, t.bandwidth());
  for (const auto& t : c) bw = std::max(bw, t.bandwidth());
  return bw;
}

namespace {

bool same_poly(const TrigPoly& p, const TrigPoly& q) {
  const double tol = 1e-14;
  if (std::abs(p.c0 - q.c0) > tol) return false;
  // Compare by evaluating on a lattice; mode tables may be permuted.
  const int n = 4 * std::max(1, std::max(p.bandwidth(), q.bandwidth())) + 1;
  Eigen::VectorXd ps = p.sample_lattice(n), qs = q.sample_lattice(n);
  return (ps - qs).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

bool PeriodicCoefficients::is_symmetric() const {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int alpha = 0; alpha < m; ++alpha)
        for (int beta = 0; beta < m; ++beta)
          if (!same_poly(a(i, j, alpha, beta), a(j, i, beta, alpha)))
            return false;
  return true;
}

PeriodicCoefficients PeriodicCoefficients::adjoint() const {
  PeriodicCoefficients adj(d, m);
  adj.mu = mu;
  adj.kappa = kappa;
  adj.tau = tau;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int alpha = 0; alpha < m; ++alpha)
        for (int beta = 0; beta < m; ++beta)
          adj.a(i, j, alpha, beta) = a(j, i, beta, alpha);
  for (int i = 0; i < d; ++i)
    for (int alpha = 0; alpha < m; ++alpha)
      for (int beta = 0; beta < m; ++beta) {
        adj.v(i, alpha, beta) = b(i, beta, alpha);
        adj.b(i, alpha, beta) = v(i, beta, alpha);
      }
  for (int alpha = 0; alpha < m; ++alpha)
    for (int beta = 0; beta < m; ++beta)
      adj.c_entry(alpha, beta) = c_entry(beta, alpha);
  return adj;
}

namespace {

// Frobenius sup norm of a tensor family over the 4*bandwidth lattice.
double sup_norm(const std::vector<TrigPoly>& entries, int d) {
  int bw = 0;
  for (const auto& t : entries) bw = std::max(bw, t.bandwidth());
  const int n = 4 * std::max(1, bw);
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(entries.size());
  for (const auto& t : entries) samples.push_back(t.sample_lattice(n));
  const long total = samples.empty() ? 0 : samples[0].size();
  double best = 0.0;
  for (long p = 0; p < total; ++p) {
    double frob2 = 0.0;
    for (const auto& s : samples) frob2 += s[p] * s[p];
    best = std::max(best, frob2);
  }
  return std::sqrt(best);
}

}  // namespace

double PeriodicCoefficients::sup_norm_V() const { return sup_norm(V, d); }
double PeriodicCoefficients::sup_norm_B() const { return sup_norm(B, d); }
double PeriodicCoefficients::sup_norm_c() const { return sup_norm(c, d); }

void PeriodicCoefficients::validate() const {
  if (d != 2 && d != 3) throw std::invalid_argument("d must be 2 or 3");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (mu <= 0.0) throw std::invalid_argument("mu must be positive");
  if (tau <= 0.0 || tau >= 1.0)
    throw std::invalid_argument("tau must lie in (0,1)");
  if (static_cast<int>(A.size()) != d * d * m * m ||
      static_cast<int>(V.size()) != d * m * m ||
      static_cast<int>(B.size()) != d * m * m ||
      static_cast<int>(c.size()) != m * m)
    throw std::invalid_argument("coefficient table sizes inconsistent");
}

void OperatorParams::require_coercive(double mu) const {
  if (lambda < std::max(lambda0, mu))
    throw std::invalid_argument("lambda must be >= max(lambda0, mu)");
}

double compute_lambda0(const PeriodicCoefficients& coeffs, double c_md) {
  if (coeffs.mu <= 0.0) throw std::invalid_argument("mu must be positive");
  const double nv = coeffs.sup_norm_V();
  const double nb = coeffs.sup_norm_B();
  const double nc = coeffs.sup_norm_c();
  return c_md / coeffs.mu * (nv * nv + nb * nb + nc);
}

std::pair<double, double> check_ellipticity(const PeriodicCoefficients& coeffs,
                                            int n_samples) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const int bw = std::max(1, coeffs.bandwidth());
  // Multiples of 4x the bandwidth keep the extrema of band-limited entries
  // on the lattice.
  int n = 4 * bw;
  while (std::pow(n, coeffs.d) < n_samples) n += 4 * bw;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  const int total = static_cast<int>(std::pow(n, coeffs.d) + 0.5);
  for (int p = 0; p < total; ++p) {
    int rem = p;
    for (int a = 0; a < coeffs.d; ++a) {
      y[a] = static_cast<double>(rem % n) / n;
      rem /= n;
    }
    Eigen::MatrixXd Q = coeffs.eval_A(y);
    es.compute(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return {lo, hi};
}

PeriodicCoefficients preset_identity(int d) {
  PeriodicCoefficients coeffs(d, 1);
  coeffs.mu = 1.0;
  coeffs.kappa = 0.0;
  coeffs.tau = 0.5;
  for (int i = 0; i < d; ++i) coeffs.a(i, i, 0, 0).c0 = 1.0;
  return coeffs;
}

PeriodicCoefficients preset_laminate_2sin(int d) {
  PeriodicCoefficients coeffs(d, 1);
  coeffs.mu = 1.0 / 3.0;  // a(y) = 2 + sin(2 pi y_1) lies in [1,3]
  coeffs.kappa = 0.0;
  coeffs.tau = 0.5;
  for (int i = 0; i < d; ++i) {
    coeffs.a(i, i, 0, 0).c0 = 2.0;
    coeffs.a(i, i, 0, 0).add_mode(Eigen::Vector3i(1, 0, 0), 0.0, 1.0);
  }
  return coeffs;
}

PeriodicCoefficients preset_checkerboard_smooth(int d) {
  PeriodicCoefficients coeffs(d, 1);
  coeffs.tau = 0.5;
  // Smooth checkerboard contrast in the leading tensor plus mild
  // lower-order fields to exercise V, B and c paths.
  for (int i = 0; i < d; ++i) {
    coeffs.a(i, i, 0, 0).c0 = 2.0;
    coeffs.a(i, i, 0, 0).add_mode(Eigen::Vector3i(1, 1, 0), 0.8, 0.0);
  }
  coeffs.v(0, 0, 0).add_mode(Eigen::Vector3i(1, 0, 0), 0.4, 0.0);
  coeffs.v(1, 0, 0).add_mode(Eigen::Vector3i(0, 1, 0), 0.0, 0.3);
  coeffs.b(0, 0, 0).add_mode(Eigen::Vector3i(0, 1, 0), 0.0, 0.35);
  coeffs.b(1, 0, 0).add_mode(Eigen::Vector3i(1, 0, 0), -0.25, 0.0);
  coeffs.c_entry(0, 0).c0 = 0.5;
  coeffs.c_entry(0, 0).add_mode(Eigen::Vector3i(1, 1, 0), 0.0, 0.2);
  const auto [lo, hi] = check_ellipticity(coeffs, 1);
  coeffs.mu = std::min(lo, 1.0 / hi);
  coeffs.kappa = std::max({coeffs.sup_norm_V(), coeffs.sup_norm_B(),
                           coeffs.sup_norm_c()});
  return coeffs;
}

namespace {

using nlohmann::json;

json poly_to_json(const TrigPoly& p) {
  json j;
  j["const"] = p.c0;
  json modes = json::array();
  for (const auto& mode : p.modes) {
    json jm;
    std::vector<int> k(p.d);
    for (int a = 0; a < p.d; ++a) k[a] = mode.k[a];
    jm["k"] = k;
    jm["cos"] = mode.cos_amp;
    jm["sin"] = mode.sin_amp;
    modes.push_back(jm);
  }
  if (!modes.empty()) j["modes"] = modes;
  return j;
}

TrigPoly poly_from_json(const json& j, int d) {
  TrigPoly p(d, j.value("const", 0.0));
  if (j.contains("modes")) {
    for (const auto& jm : j["modes"]) {
      Eigen::Vector3i k = Eigen::Vector3i::Zero();
      const auto& kv = jm["k"];
      for (int a = 0; a < d && a < static_cast<int>(kv.size()); ++a)
        k[a] = kv[a].get<int>();
      p.add_mode(k, jm.value("cos", 0.0), jm.value("sin", 0.0));
    }
  }
  return p;
}

}  // namespace

std::string coefficients_to_json(const PeriodicCoefficients& coeffs) {
  json j;
  j["d"] = coeffs.d;
  j["m"] = coeffs.m;
  j["mu"] = coeffs.mu;
  j["kappa"] = coeffs.kappa;
  j["tau"] = coeffs.tau;
  auto dump = [&](const std::vector<TrigPoly>& entries) {
    json arr = json::array();
    for (const auto& t : entries) arr.push_back(poly_to_json(t));
    return arr;
  };
  j["A"] = dump(coeffs.A);
  j["V"] = dump(coeffs.V);
  j["B"] = dump(coeffs.B);
  j["c"] = dump(coeffs.c);
  return j.dump(2);
}

PeriodicCoefficients coefficients_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  const int d = j.at("d").get<int>();
  const int m = j.value("m", 1);
  PeriodicCoefficients coeffs(d, m);
  coeffs.mu = j.value("mu", 1.0);
  coeffs.kappa = j.value("kappa", 0.0);
  coeffs.tau = j.value("tau", 0.5);
  auto load = [&](const json& arr, std::vector<TrigPoly>& entries) {
    if (static_cast<int>(arr.size()) != static_cast<int>(entries.size()))
      throw std::invalid_argument("coefficient array size mismatch");
    for (size_t q = 0; q < entries.size(); ++q)
      entries[q] = poly_from_json(arr[q], d);
  };
  load(j.at("A"), coeffs.A);
  load(j.at("V"), coeffs.V);
  load(j.at("B"), coeffs.B);
  load(j.at("c"), coeffs.c);
  coeffs.validate();
  return coeffs;
}

PeriodicCoefficients load_coefficients(const std::string& name_or_path,
                                       int d) {
  if (name_or_path == "identity") return preset_identity(d);
  if (name_or_path == "laminate-2sin") return preset_laminate_2sin(d);
  if (name_or_path == "checkerboard-smooth")
    return preset_checkerboard_smooth(d);
  std::ifstream in(name_or_path);
  if (!in) throw std::invalid_argument("cannot open " + name_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return coefficients_from_json(ss.str());
}

}  // namespace hlp
