// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

namespace hlp {

/// Smooth closed surface in R^3 parameterized over (theta, phi) in
/// [0,pi] x [0,2pi).
class SurfaceShape {
 public:
  virtual ~SurfaceShape() = default;
  virtual void frame(double theta, double phi, Eigen::Vector3d* x,
                     Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const = 0;
  virtual std::string name() const = 0;
  virtual Eigen::Vector3d center() const { return Eigen::Vector3d::Zero(); }

  Eigen::Vector3d point(double theta, double phi) const {
    Eigen::Vector3d x, a, b;
    frame(theta, phi, &x, &a, &b);
    return x;
  }
  /// Unit outward normal (orientation fixed against the center).
  Eigen::Vector3d normal(double theta, double phi) const;
  /// Area element |x_th x x_ph|.
  double jacobian(double theta, double phi) const;

  /// Nearest-point projection by damped Newton from a starting guess;
  /// returns the parameter pair. Used for exact boundary distances.
  Eigen::Vector2d project(const Eigen::Vector3d& x, double theta0,
                          double phi0) const;
};

class Sphere : public SurfaceShape {
 public:
  explicit Sphere(double radius = 1.0,
                  const Eigen::Vector3d& center = Eigen::Vector3d::Zero())
      : radius_(radius), center_(center) {}
  void frame(double theta, double phi, Eigen::Vector3d* x,
             Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const override;
  std::string name() const override { return "sphere"; }
  Eigen::Vector3d center() const override { return center_; }
  double radius() const { return radius_; }

 private:
  double radius_;
  Eigen::Vector3d center_;
};

class Ellipsoid : public SurfaceShape {
 public:
  Ellipsoid(double a, double b, double c) : semi_(a, b, c) {}
  void frame(double theta, double phi, Eigen::Vector3d* x,
             Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const override;
  std::string name() const override { return "ellipsoid"; }
  Eigen::Vector3d semi_axes() const { return semi_; }

 private:
  Eigen::Vector3d semi_;
};

/// Star-shaped radial graph rho(s) s with rho a smooth function of the unit
/// direction: rho = 1 + alpha s3^2 + beta s1 s2.
class StarShape : public SurfaceShape {
 public:
  StarShape(double alpha = 0.3, double beta = 0.15)
      : alpha_(alpha), beta_(beta) {}
  void frame(double theta, double phi, Eigen::Vector3d* x,
             Eigen::Vector3d* x_th, Eigen::Vector3d* x_ph) const override;
  std::string name() const override { return "star"; }

 private:
  double alpha_, beta_;
};

std::shared_ptr<const SurfaceShape> make_shape(const std::string& spec);

/// Product quadrature on the midpoint theta grid theta_k = (k+1/2) pi/n
/// and the uniform phi grid phi_l = 2 pi l / (2n); spectrally accurate for
/// smooth integrands. Nodes own parameter cells, which the singular
/// corrections rely on.
struct BoundaryMesh {
  std::shared_ptr<const SurfaceShape> shape;
  int n_theta = 0, n_phi = 0;
  double dth = 0.0, dph = 0.0;
  Eigen::MatrixX3d nodes, normals;
  Eigen::VectorXd weights;  // dth * dph * J
  Eigen::VectorXd jac;
  Eigen::VectorXd theta, phi;
  double h = 0.0;  // nominal geodesic spacing

  long size() const { return nodes.rows(); }
  long id(int kt, int kp) const { return static_cast<long>(kt) * n_phi + kp; }

  /// Double-cover fold: arbitrary integer (kt, kp) to a true node index.
  long fold(int kt, int kp) const;
  /// Parameters of the logical row kt on the double cover.
  double theta_tilde(int kt) const { return (kt + 0.5) * dth; }
  /// Surface data at double-cover parameters (theta_t may lie outside
  /// [0, pi]).
  void cover_frame(double theta_t, double phi, Eigen::Vector3d* x,
                   Eigen::Vector3d* n, double* J) const;

  /// Nearest node to a point (linear scan).
  long nearest_node(const Eigen::Vector3d& x) const;
};

BoundaryMesh make_boundary_mesh(std::shared_ptr<const SurfaceShape> shape,
                                int n);

}  // namespace hlp
