// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/mesh.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hlp {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::Vector3d SurfaceShape::normal(double theta, double phi) const {
  Eigen::Vector3d x, a, b;
  frame(theta, phi, &x, &a, &b);
  Eigen::Vector3d n = a.cross(b);
  const double len = n.norm();
  if (len == 0.0) throw std::runtime_error("degenerate surface frame");
  n /= len;
  if (n.dot(x - center()) < 0.0) n = -n;
  return n;
}

double SurfaceShape::jacobian(double theta, double phi) const {
  Eigen::Vector3d x, a, b;
  frame(theta, phi, &x, &a, &b);
  return a.cross(b).norm();
}

Eigen::Vector2d SurfaceShape::project(const Eigen::Vector3d& x, double theta0,
                                      double phi0) const {
  double th = theta0, ph = phi0;
  for (int it = 0; it < 30; ++it) {
    Eigen::Vector3d y, yt, yp;
    frame(th, ph, &y, &yt, &yp);
    const Eigen::Vector3d r = y - x;
    Eigen::Vector2d grad(r.dot(yt), r.dot(yp));
    // Gauss-Newton Hessian (first-order terms only).
    Eigen::Matrix2d H;
    H << yt.dot(yt), yt.dot(yp), yt.dot(yp), yp.dot(yp);
    Eigen::Vector2d step = H.ldlt().solve(grad);
    th -= step[0];
    ph -= step[1];
    th = std::min(std::max(th, 1e-9), kPi - 1e-9);
    if (step.norm() < 1e-14) break;
  }
  return {th, ph};
}

void Sphere::frame(double theta, double phi, Eigen::Vector3d* x,
                   Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  *x = center_ + radius_ * Eigen::Vector3d(st * cp, st * sp, ct);
  *x_th = radius_ * Eigen::Vector3d(ct * cp, ct * sp, -st);
  *x_ph = radius_ * Eigen::Vector3d(-st * sp, st * cp, 0.0);
}

void Ellipsoid::frame(double theta, double phi, Eigen::Vector3d* x,
                      Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  *x = Eigen::Vector3d(semi_[0] * st * cp, semi_[1] * st * sp, semi_[2] * ct);
  *x_th =
      Eigen::Vector3d(semi_[0] * ct * cp, semi_[1] * ct * sp, -semi_[2] * st);
  *x_ph = Eigen::Vector3d(-semi_[0] * st * sp, semi_[1] * st * cp, 0.0);
}

void StarShape::frame(double theta, double phi, Eigen::Vector3d* x,
                      Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const Eigen::Vector3d s(st * cp, st * sp, ct);
  const Eigen::Vector3d s_th(ct * cp, ct * sp, -st);
  const Eigen::Vector3d s_ph(-st * sp, st * cp, 0.0);
  const double rho = 1.0 + alpha_ * s[2] * s[2] + beta_ * s[0] * s[1];
  const double rho_th =
      2.0 * alpha_ * s[2] * s_th[2] + beta_ * (s_th[0] * s[1] + s[0] * s_th[1]);
  const double rho_ph =
      2.0 * alpha_ * s[2] * s_ph[2] + beta_ * (s_ph[0] * s[1] + s[0] * s_ph[1]);
  *x = rho * s;
  *x_th = rho_th * s + rho * s_th;
  *x_ph = rho_ph * s + rho * s_ph;
}

std::shared_ptr<const SurfaceShape> make_shape(const std::string& spec) {
  // "sphere", "sphere:R", "ellipsoid:a,b,c", "star", "star:alpha,beta"
  std::string kind = spec;
  std::string args;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    kind = spec.substr(0, pos);
    args = spec.substr(pos + 1);
  }
  auto parse = [&args]() {
    std::vector<double> vals;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    return vals;
  };
  if (kind == "sphere") {
    auto v = parse();
    return std::make_shared<Sphere>(v.empty() ? 1.0 : v[0]);
  }
  if (kind == "ellipsoid") {
    auto v = parse();
    if (v.size() != 3) throw std::invalid_argument("ellipsoid needs a,b,c");
    return std::make_shared<Ellipsoid>(v[0], v[1], v[2]);
  }
  if (kind == "star") {
    auto v = parse();
    return std::make_shared<StarShape>(v.size() > 0 ? v[0] : 0.3,
                                       v.size() > 1 ? v[1] : 0.15);
  }
  throw std::invalid_argument("unsupported shape id: " + spec);
}

long BoundaryMesh::fold(int kt, int kp) const {
  while (kt < 0 || kt >= n_theta) {
    if (kt < 0) {
      kt = -1 - kt;
      kp += n_phi / 2;
    } else {
      kt = 2 * n_theta - 1 - kt;
      kp += n_phi / 2;
    }
  }
  kp %= n_phi;
  if (kp < 0) kp += n_phi;
  return id(kt, kp);
}

void BoundaryMesh::cover_frame(double theta_t, double phi,
                               Eigen::Vector3d* x, Eigen::Vector3d* n,
                               double* J) const {
  while (theta_t < 0.0 || theta_t > kPi) {
    if (theta_t < 0.0) {
      theta_t = -theta_t;
      phi += kPi;
    } else {
      theta_t = 2.0 * kPi - theta_t;
      phi += kPi;
    }
  }
  Eigen::Vector3d xx, a, b;
  shape->frame(theta_t, phi, &xx, &a, &b);
  *x = xx;
  Eigen::Vector3d nn = a.cross(b);
  const double len = nn.norm();
  *J = len;
  if (len > 0.0) {
    nn /= len;
    if (nn.dot(xx - shape->center()) < 0.0) nn = -nn;
  }
  *n = nn;
}

long BoundaryMesh::nearest_node(const Eigen::Vector3d& x) const {
  long best = 0;
  double best_d = (nodes.row(0).transpose() - x).squaredNorm();
  for (long p = 1; p < size(); ++p) {
    const double dd = (nodes.row(p).transpose() - x).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best = p;
    }
  }
  return best;
}

namespace {

// Fejer's first rule on [-1,1]: the nodes cos((k+1/2) pi/n) are exactly our
// theta lattice in u = cos(theta), and the weights make the product rule
// spectrally accurate for smooth surface integrands.
Eigen::VectorXd fejer1_weights(int n) {
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) {
    const double th = (k + 0.5) * kPi / n;
    double acc = 0.0;
    for (int m = 1; m <= n / 2; ++m)
      acc += std::cos(2.0 * m * th) / (4.0 * m * m - 1.0);
    w[k] = 2.0 / n * (1.0 - 2.0 * acc);
  }
  return w;
}

}  // namespace

BoundaryMesh make_boundary_mesh(std::shared_ptr<const SurfaceShape> shape,
                                int n) {
  if (n < 8) throw std::invalid_argument("mesh refinement n must be >= 8");
  BoundaryMesh mesh;
  mesh.shape = std::move(shape);
  mesh.n_theta = n;
  mesh.n_phi = 2 * n;
  mesh.dth = kPi / n;
  mesh.dph = 2.0 * kPi / mesh.n_phi;
  const Eigen::VectorXd fejer = fejer1_weights(n);
  const long N = static_cast<long>(mesh.n_theta) * mesh.n_phi;
  mesh.nodes.resize(N, 3);
  mesh.normals.resize(N, 3);
  mesh.weights.resize(N);
  mesh.jac.resize(N);
  mesh.theta.resize(N);
  mesh.phi.resize(N);
  double mean_radius = 0.0;
  for (int kt = 0; kt < mesh.n_theta; ++kt) {
    const double th = (kt + 0.5) * mesh.dth;
    const double wth = fejer[kt] / std::sin(th);  // du -> dtheta
    for (int kp = 0; kp < mesh.n_phi; ++kp) {
      const double ph = kp * mesh.dph;
      const long p = mesh.id(kt, kp);
      Eigen::Vector3d x, a, b;
      mesh.shape->frame(th, ph, &x, &a, &b);
      Eigen::Vector3d nn = a.cross(b);
      const double J = nn.norm();
      nn /= J;
      if (nn.dot(x - mesh.shape->center()) < 0.0) nn = -nn;
      mesh.nodes.row(p) = x;
      mesh.normals.row(p) = nn;
      mesh.jac[p] = J;
      mesh.weights[p] = wth * mesh.dph * J;
      mesh.theta[p] = th;
      mesh.phi[p] = ph;
      mean_radius += (x - mesh.shape->center()).norm();
    }
  }
  mean_radius /= N;
  mesh.h = mesh.dth * mean_radius;
  return mesh;
}

}  // namespace hlp
