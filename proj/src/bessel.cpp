// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/bessel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hlp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 20000;

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = their mean,
// gampl = 1/Gamma(1+mu), gammi = 1/Gamma(1-mu). |mu| <= 1/2.
void temme_gammas(double mu, double* gam1, double* gam2, double* gampl,
                  double* gammi) {
  *gampl = 1.0 / std::tgamma(1.0 + mu);
  *gammi = 1.0 / std::tgamma(1.0 - mu);
  if (std::abs(mu) < 1e-2) {
    // Odd part of 1/Gamma(1+mu): gamma_E + c4 mu^2 + c6 mu^4.
    const double g = 0.57721566490153286;
    const double c4 = -0.04200263503409524;
    const double c6 = -0.00962197152787697;
    *gam1 = -(g + c4 * mu * mu + c6 * mu * mu * mu * mu);
  } else {
    *gam1 = (*gammi - *gampl) / (2.0 * mu);
  }
  *gam2 = 0.5 * (*gammi + *gampl);
}

// Temme's series: K_mu(x), K_{mu+1}(x) for x <= 2, |mu| <= 1/2.
void k_temme(double mu, double x, double* kmu, double* kmu1) {
  const double x2 = 0.5 * x;
  const double d1 = -std::log(x2);
  const double sigma = mu * d1;
  double gam1, gam2, gampl, gammi;
  temme_gammas(mu, &gam1, &gam2, &gampl, &gammi);
  const double fact =
      std::abs(mu) < 1e-14 ? 1.0 : (mu * kPi) / std::sin(mu * kPi);
  const double sinhc =
      std::abs(sigma) < 1e-14 ? 1.0 : std::sinh(sigma) / sigma;
  double f = fact * (gam1 * std::cosh(sigma) + gam2 * d1 * sinhc);
  double p = 0.5 * std::pow(x2, -mu) / gampl;
  double q = 0.5 * std::pow(x2, mu) / gammi;
  double c = 1.0;
  const double dd = x2 * x2;
  double sum = f, sum1 = p;
  for (int i = 1; i <= kMaxIter; ++i) {
    f = (i * f + p + q) / (i * i - mu * mu);
    c *= dd / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * f;
    sum += del;
    const double del1 = c * (p - i * f);
    sum1 += del1;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  *kmu = sum;
  *kmu1 = sum1 * (2.0 / x);
}

// Steed's CF2: K_mu(x), K_{mu+1}(x) for x > 2, |mu| <= 1/2.
void k_steed(double mu, double x, double* kmu, double* kmu1) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  *kmu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  *kmu1 = *kmu * (mu + x + 0.5 - h) / x;
}

}  // namespace

void bessel_k_pair(double nu, double z, double* k_nu, double* k_nup1) {
  if (!(z > 0.0)) throw std::domain_error("bessel_k requires z > 0");
  if (nu < 0.0) throw std::domain_error("bessel_k requires nu >= 0");
  if (z > 740.0) {
    *k_nu = 0.0;
    *k_nup1 = 0.0;
    return;
  }
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;  // in [-1/2, 1/2]
  double kmu, kmu1;
  if (z <= 2.0)
    k_temme(mu, z, &kmu, &kmu1);
  else
    k_steed(mu, z, &kmu, &kmu1);
  double klo = kmu, khi = kmu1;
  double order = mu;
  for (int l = 0; l < nl; ++l) {
    const double knext = klo + 2.0 * (order + 1.0) / z * khi;
    klo = khi;
    khi = knext;
    order += 1.0;
  }
  *k_nu = klo;
  *k_nup1 = khi;
}

double bessel_k(double nu, double z) {
  double a, b;
  bessel_k_pair(nu, z, &a, &b);
  return a;
}

}  // namespace hlp
