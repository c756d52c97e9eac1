// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hlp {

enum class BCKind { Dirichlet, Neumann, Periodic };

/// Axis-aligned cube domain (all our lattices are cubic).
struct BoxDomain {
  int d = 2;
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  double side = 1.0;
};

struct EmbeddedBall {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
};

// Node classification.
inline constexpr uint8_t kExterior = 0;
inline constexpr uint8_t kInterior = 1;
inline constexpr uint8_t kBoundary = 2;  // Dirichlet node, value fixed

/// Uniform lattice field on a cube, n nodes per axis, m components per node
/// (node-major: values[p*m + comp]).
struct GridField {
  int d = 2, m = 1, n = 0;
  double h = 0.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  BCKind bc = BCKind::Dirichlet;
  Eigen::VectorXd values;
  std::vector<uint8_t> mask;  // empty means all interior

  long total() const {
    long t = 1;
    for (int a = 0; a < d; ++a) t *= n;
    return t;
  }
  long stride(int axis) const {
    long s = 1;
    for (int a = 0; a < axis; ++a) s *= n;
    return s;
  }
  Eigen::Vector3i unflatten(long p) const;
  long flatten(const Eigen::Vector3i& idx) const;
  Eigen::Vector3d point(long p) const;
  uint8_t mask_at(long p) const {
    return mask.empty() ? kInterior : mask[p];
  }
  double value(long p, int comp = 0) const { return values[p * m + comp]; }

  /// Centered gradient component (one-sided at lattice edges); valid for
  /// interior evaluation away from exterior nodes.
  double deriv(long p, int axis, int comp = 0) const;

  /// sqrt( h^d sum |u|^2 ) over nodes where keep(point) holds (interior and
  /// boundary nodes only).
  double l2_norm(
      const std::function<bool(const Eigen::Vector3d&)>& keep = nullptr) const;
  double linf_norm(
      const std::function<bool(const Eigen::Vector3d&)>& keep = nullptr) const;

  /// h^d sum |grad u|^2 restricted by keep; centered differences.
  double h1_seminorm_sq(
      const std::function<bool(const Eigen::Vector3d&)>& keep = nullptr) const;
};

/// Flat binary dump (doubles) plus JSON header: <prefix>.bin, <prefix>.json.
void write_field(const GridField& field, const std::string& prefix);
GridField read_field(const std::string& prefix);

/// CSV line cut along an axis through a lattice point.
std::string field_line_cut_csv(const GridField& field, int axis,
                               const Eigen::Vector3i& through);

}  // namespace hlp
