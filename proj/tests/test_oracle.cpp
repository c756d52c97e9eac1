// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hlp/kernels.hpp"
#include "hlp/oracle.hpp"

using namespace hlp;

namespace {

// Manufactured solution u*(x) = sin(pi x1) sin(pi x2) (m=1, d=2) and the
// forcing F = L_eps u* computed from analytic coefficient derivatives.
double ustar(const Eigen::Vector3d& x) {
  return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
}

Eigen::Vector3d ustar_grad(const Eigen::Vector3d& x) {
  return Eigen::Vector3d(
      M_PI * std::cos(M_PI * x[0]) * std::sin(M_PI * x[1]),
      M_PI * std::sin(M_PI * x[0]) * std::cos(M_PI * x[1]), 0.0);
}

double ustar_hess(const Eigen::Vector3d& x, int i, int j) {
  if (i == j) return -M_PI * M_PI * ustar(x);
  return M_PI * M_PI * std::cos(M_PI * x[0]) * std::cos(M_PI * x[1]);
}

FieldFunction manufactured_forcing(const PeriodicCoefficients& coeffs,
                                   double eps, double lambda) {
  return [&coeffs, eps, lambda](const Eigen::Vector3d& x) {
    const Eigen::Vector3d y = x / eps;
    const double u = ustar(x);
    const Eigen::Vector3d g = ustar_grad(x);
    double acc = lambda * u + coeffs.c_entry(0, 0)(y) * u;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const TrigPoly& a = coeffs.a(i, j, 0, 0);
        acc -= a(y) * ustar_hess(x, i, j);
        acc -= a.gradient(y)[i] / eps * g[j];
      }
      const TrigPoly& v = coeffs.v(i, 0, 0);
      acc -= v.gradient(y)[i] / eps * u + v(y) * g[i];
      acc += coeffs.b(i, 0, 0)(y) * g[i];
    }
    return Eigen::VectorXd::Constant(1, acc);
  };
}

double field_l2_error(const GridField& field,
                      const std::function<double(const Eigen::Vector3d&)>& ex) {
  double acc = 0.0;
  long count = 0;
  for (long p = 0; p < field.total(); ++p) {
    if (field.mask_at(p) == kExterior) continue;
    const double e = field.value(p) - ex(field.point(p));
    acc += e * e;
    ++count;
  }
  return std::sqrt(acc * std::pow(field.h, field.d));
}

// Fine periodic 1D oracle for laminate problems: -(a u')' + lambda u = F.
Eigen::VectorXd laminate_1d_periodic(int n, double lambda,
                                     const std::function<double(double)>& F) {
  auto a = [](double y) { return 2.0 + std::sin(2.0 * M_PI * y); };
  const double h = 1.0 / n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double yi = i * h;
    const double ap = 2.0 / (1.0 / a(yi) + 1.0 / a(yi + h));  // harmonic
    const double am = 2.0 / (1.0 / a(yi) + 1.0 / a(yi - h));
    A(i, i) = (ap + am) / (h * h) + lambda;
    A(i, (i + 1) % n) -= ap / (h * h);
    A(i, (i - 1 + n) % n) -= am / (h * h);
    b[i] = F(yi);
  }
  return A.partialPivLu().solve(b);
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  OperatorParams params{1.0, 1.0, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  GridField u = direct_solve_box(coeffs, params, box, BCKind::Dirichlet,
                                 nullptr, nullptr, 17);
  CHECK(u.values.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("manufactured Dirichlet convergence order >= 1.9") {
  PeriodicCoefficients coeffs = preset_checkerboard_smooth(2);
  const double eps = 0.5;
  const double lambda = std::max({compute_lambda0(coeffs), coeffs.mu, 1.0});
  OperatorParams params{lambda, eps, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  auto g = [](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(1, ustar(x));
  };
  FieldFunction forcing = manufactured_forcing(coeffs, eps, lambda);
  std::vector<double> errs;
  for (int n : {17, 33, 65}) {
    GridField u = direct_solve_box(coeffs, params, box, BCKind::Dirichlet, g,
                                   forcing, n);
    errs.push_back(field_l2_error(u, ustar));
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 >= 1.9);
  CHECK(order2 >= 1.9);
}

TEST_CASE("Neumann box data: errors shrink under refinement") {
  PeriodicCoefficients coeffs = preset_identity(2);
  OperatorParams params{1.0, 1.0, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  auto uex = [](const Eigen::Vector3d& x) {
    return std::cos(M_PI * x[0]) * std::cos(M_PI * x[1]);
  };
  auto conormal = [&](const Eigen::Vector3d& x) {
    // n . grad u with the first-hit outward axis convention of the solver.
    Eigen::Vector3d g(-M_PI * std::sin(M_PI * x[0]) * std::cos(M_PI * x[1]),
                      -M_PI * std::cos(M_PI * x[0]) * std::sin(M_PI * x[1]),
                      0.0);
    for (int a = 0; a < 2; ++a) {
      if (std::abs(x[a]) < 1e-12)
        return Eigen::VectorXd::Constant(1, -g[a]);
      if (std::abs(x[a] - 1.0) < 1e-12)
        return Eigen::VectorXd::Constant(1, g[a]);
    }
    return Eigen::VectorXd::Zero(1);
  };
  auto forcing = [&](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(1,
                                     (2.0 * M_PI * M_PI + 1.0) * uex(x));
  };
  double prev = 1e9;
  for (int n : {17, 33, 65}) {
    GridField u = direct_solve_box(coeffs, params, box, BCKind::Neumann,
                                   conormal, forcing, n);
    const double err = field_l2_error(u, uex);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("periodic laminate solve matches a fine 1D oracle") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  OperatorParams params{1.5, 1.0, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  auto F1 = [](double y) { return std::sin(2.0 * M_PI * y) + 0.3; };
  auto forcing = [&](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(1, F1(x[0]));
  };
  Eigen::VectorXd ref = laminate_1d_periodic(4096, params.lambda, F1);
  std::vector<double> errs;
  for (int n : {32, 64}) {
    GridField u = direct_solve_box(coeffs, params, box, BCKind::Periodic,
                                   nullptr, forcing, n);
    double acc = 0.0;
    for (long p = 0; p < u.total(); ++p) {
      const Eigen::Vector3d x = u.point(p);
      const int iref =
          static_cast<int>(std::round(x[0] * 4096)) % 4096;
      const double e = u.value(p) - ref[iref];
      acc += e * e;
    }
    errs.push_back(std::sqrt(acc / u.total()));
  }
  CHECK(errs[1] < errs[0]);
  const double ratio = errs[0] / errs[1];
  CHECK(ratio > 3.0);  // second-order h^2 decay, modulo constants
  CHECK(errs[1] < 2e-4);
}

TEST_CASE("epsilon independence for constant coefficients") {
  PeriodicCoefficients coeffs = preset_identity(2);
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  auto g = [](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(1, x[0] * x[0] - x[1]);
  };
  OperatorParams p1{1.0, 1.0, 0.0}, p2{1.0, 0.25, 0.0};
  GridField u1 = direct_solve_box(coeffs, p1, box, BCKind::Dirichlet, g,
                                  nullptr, 33);
  GridField u2 = direct_solve_box(coeffs, p2, box, BCKind::Dirichlet, g,
                                  nullptr, 33);
  CHECK((u1.values - u2.values).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("discrete Green matches the d=2 kernel at mid-range") {
  PeriodicCoefficients coeffs = preset_identity(2);
  OperatorParams params{1.0, 1.0, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Constant(-4.0), 8.0};
  box.lo[2] = 0.0;
  SolveInfo info;
  GridField G = discrete_green(coeffs, params, Eigen::Vector3d::Zero(), box,
                               257, 0, {}, &info);
  CHECK(info.rel_residual <= 1e-9);
  KernelContext ctx = KernelContext::make(
      2, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
      Eigen::Vector3d::Zero(), 0.0, 1.0);
  for (const Eigen::Vector3d x :
       {Eigen::Vector3d(0.4, 0.0, 0.0), Eigen::Vector3d(0.0, -0.6, 0.0),
        Eigen::Vector3d(0.5, 0.5, 0.0)}) {
    Eigen::Vector3i idx;
    for (int a = 0; a < 2; ++a)
      idx[a] = static_cast<int>(std::round((x[a] - box.lo[a]) / G.h));
    idx[2] = 0;
    const double got = G.value(G.flatten(idx));
    const double expected = gamma_0(x, ctx);
    CHECK(std::abs(got - expected) <= 0.03 * std::abs(expected));
  }
  // Shell maxima decay monotonically.
  double prev = 1e18;
  for (double r : {0.4, 0.8, 1.2, 1.6, 2.0}) {
    double shell = 0.0;
    for (long p = 0; p < G.total(); ++p) {
      const double rr = (G.point(p) - Eigen::Vector3d::Zero()).head(2).norm();
      if (std::abs(rr - r) < G.h) shell = std::max(shell, std::abs(G.value(p)));
    }
    CHECK(shell < prev);
    prev = shell;
  }
}

TEST_CASE("adjoint Green symmetry") {
  PeriodicCoefficients coeffs = preset_checkerboard_smooth(2);
  const double lambda = std::max({compute_lambda0(coeffs), coeffs.mu, 1.0});
  OperatorParams params{lambda, 0.5, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  const Eigen::Vector3d ysrc(0.3, 0.4, 0.0), xsrc(0.7, 0.6, 0.0);
  OracleOptions opts;
  opts.tol = 1e-12;
  GridField Gy = discrete_green(coeffs, params, ysrc, box, 129, 0, opts);
  PeriodicCoefficients adj = coeffs.adjoint();
  GridField Gx = discrete_green(adj, params, xsrc, box, 129, 0, opts);
  auto value_at = [](const GridField& G, const Eigen::Vector3d& x) {
    Eigen::Vector3i idx = Eigen::Vector3i::Zero();
    for (int a = 0; a < 2; ++a)
      idx[a] = static_cast<int>(std::round((x[a] - G.origin[a]) / G.h));
    return G.value(G.flatten(idx));
  };
  const double g_xy = value_at(Gy, xsrc);   // Gamma(x, y)
  const double gs_yx = value_at(Gx, ysrc);  // Gamma*(y, x)
  CHECK(std::abs(g_xy - gs_yx) <= 1e-6 * std::abs(g_xy));
}

TEST_CASE("maximum principle surrogate") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  coeffs.c_entry(0, 0).c0 = 0.3;  // c >= 0, no drift
  OperatorParams params{std::max(compute_lambda0(coeffs), 1.0), 0.5, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  auto g = [](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(
        1, std::sin(3.0 * x[0]) + 0.5 * std::cos(2.0 * x[1]));
  };
  GridField u = direct_solve_box(coeffs, params, box, BCKind::Dirichlet, g,
                                 nullptr, 65);
  double sup_g = 0.0;
  for (long p = 0; p < u.total(); ++p)
    if (u.mask_at(p) == kBoundary)
      sup_g = std::max(sup_g, std::abs(u.value(p)));
  CHECK(u.linf_norm() <= sup_g + 1e-10);
}

TEST_CASE("caccioppoli ratios") {
  PeriodicCoefficients coeffs = preset_identity(2);
  OperatorParams params{1.0, 1.0, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Constant(-2.0), 4.0};
  box.lo[2] = 0.0;
  GridField G = discrete_green(coeffs, params, Eigen::Vector3d(-1.2, -1.2, 0),
                               box, 161);
  // Zero field convention.
  GridField zero = G;
  zero.values.setZero();
  CHECK(caccioppoli_ratio(zero, 1.0, 1.0, Eigen::Vector3d(0.5, 0.5, 0),
                          0.2) == 0.0);
  // Green tail: solution of the homogeneous equation away from the pole.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(0.0, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d center(pos(rng), pos(rng), 0.0);
    const double ratio = caccioppoli_ratio(G, 1.0, 1.0, center, 0.15);
    CHECK(std::isfinite(ratio));
    CHECK(ratio <= 50.0);
  }
  CHECK_THROWS_AS(
      caccioppoli_ratio(G, 1.0, 1.0, Eigen::Vector3d(1.9, 1.9, 0), 0.5),
      std::invalid_argument);
}

TEST_CASE("caccioppoli scale invariance under (x, eps, lambda) rescaling") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  auto g = [](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(1, 1.0 + x[0] - 0.7 * x[1] +
                                            0.4 * std::sin(2.0 * x[0]));
  };
  OperatorParams params{2.0, 0.25, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  GridField u = direct_solve_box(coeffs, params, box, BCKind::Dirichlet, g,
                                 nullptr, 129);
  const double ratio1 =
      caccioppoli_ratio(u, coeffs.mu, params.lambda,
                        Eigen::Vector3d(0.5, 0.5, 0.0), 0.125);

  const double s = 2.0;
  OperatorParams rparams{params.lambda * s * s, params.epsilon / s, 0.0};
  BoxDomain rbox{2, Eigen::Vector3d::Zero(), 1.0 / s};
  auto rg = [&](const Eigen::Vector3d& y) { return g(s * y); };
  // Different resolution so the check is not vacuous.
  GridField v = direct_solve_box(coeffs, rparams, rbox, BCKind::Dirichlet, rg,
                                 nullptr, 97);
  const double ratio2 =
      caccioppoli_ratio(v, coeffs.mu, rparams.lambda,
                        Eigen::Vector3d(0.25, 0.25, 0.0), 0.125 / s);
  CHECK(std::abs(ratio1 / ratio2 - 1.0) <= 0.02);
}

TEST_CASE("field dump round trip") {
  PeriodicCoefficients coeffs = preset_identity(2);
  OperatorParams params{1.0, 1.0, 0.0};
  BoxDomain box{2, Eigen::Vector3d::Zero(), 1.0};
  auto g = [](const Eigen::Vector3d& x) {
    return Eigen::VectorXd::Constant(1, x[0] + x[1]);
  };
  GridField u = direct_solve_box(coeffs, params, box, BCKind::Dirichlet, g,
                                 nullptr, 17);
  write_field(u, "/tmp/hlp_test_field");
  GridField back = read_field("/tmp/hlp_test_field");
  CHECK(back.n == u.n);
  CHECK((back.values - u.values).lpNorm<Eigen::Infinity>() == 0.0);
  const std::string csv =
      field_line_cut_csv(u, 0, Eigen::Vector3i(0, 8, 0));
  CHECK(csv.find("coord,u0") == 0);
}
