// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/oracle.hpp"

#include <cmath>
#include <iostream>
#include <unordered_map>

namespace hlp {

namespace {

struct CoeffTable {
  bool zero = true;
  bool constant = true;
  double c0 = 0.0;
  Eigen::VectorXd samples;
  double at(long p) const { return constant ? c0 : samples[p]; }
};

CoeffTable sample_table(const TrigPoly& poly, int n, double scale,
                        const Eigen::Vector3d& origin_scaled) {
  CoeffTable t;
  t.zero = poly.is_zero();
  t.constant = poly.is_constant();
  t.c0 = poly.c0;
  if (!t.constant) t.samples = poly.sample_lattice(n, scale, origin_scaled);
  return t;
}

bool tables_equal(const CoeffTable& a, const CoeffTable& b) {
  if (a.zero && b.zero) return true;
  if (a.constant != b.constant) return false;
  if (std::abs(a.c0 - b.c0) > 1e-14) return false;
  if (a.constant) return true;
  return (a.samples - b.samples).lpNorm<Eigen::Infinity>() <= 1e-14;
}

struct CutArm {
  bool cut = false;
  double frac = 1.0;
  Eigen::VectorXd bval;   // Dirichlet values at the crossing (m)
  Eigen::VectorXd a_mid;  // diagonal a_ii block at mid-arm (m*m)
};

struct CutNode {
  CutArm arm[3][2];  // [axis][0: minus, 1: plus]
};

class FdSystem {
 public:
  FdSystem(const PeriodicCoefficients& coeffs, const OperatorParams& params,
           const BoxDomain& box, BCKind bc, const EmbeddedBall* ball,
           const FieldFunction& bc_data, const FieldFunction& forcing, int n)
      : d_(coeffs.d), m_(coeffs.m), n_(n), bc_(bc), lambda_(params.lambda) {
    field_.d = d_;
    field_.m = m_;
    field_.n = n;
    field_.bc = bc;
    field_.origin = box.lo;
    field_.h = bc == BCKind::Periodic ? box.side / n : box.side / (n - 1);
    h_ = field_.h;
    total_ = field_.total();
    field_.values.setZero(total_ * m_);

    // Coefficient tables at nodes, argument x/eps.
    const double eps = params.epsilon;
    const double scale = n * h_ / eps;
    const Eigen::Vector3d org = box.lo / eps;
    a_node_.resize(d_ * d_ * m_ * m_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        for (int al = 0; al < m_; ++al)
          for (int be = 0; be < m_; ++be)
            a_node_[aidx(i, j, al, be)] =
                sample_table(coeffs.a(i, j, al, be), n, scale, org);
    v_node_.resize(d_ * m_ * m_);
    b_node_.resize(d_ * m_ * m_);
    for (int i = 0; i < d_; ++i)
      for (int al = 0; al < m_; ++al)
        for (int be = 0; be < m_; ++be) {
          v_node_[vidx(i, al, be)] =
              sample_table(coeffs.v(i, al, be), n, scale, org);
          b_node_[vidx(i, al, be)] =
              sample_table(coeffs.b(i, al, be), n, scale, org);
        }
    c_node_.resize(m_ * m_);
    for (int al = 0; al < m_; ++al)
      for (int be = 0; be < m_; ++be)
        c_node_[al * m_ + be] = sample_table(coeffs.c_entry(al, be), n,
                                             scale, org);

    has_offdiag_ = false;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        if (i != j)
          for (int q = 0; q < m_ * m_; ++q)
            if (!a_node_[aidx(i, j, 0, 0) + q].zero) has_offdiag_ = true;
    has_v_ = has_b_ = false;
    for (const auto& t : v_node_)
      if (!t.zero) has_v_ = true;
    for (const auto& t : b_node_)
      if (!t.zero) has_b_ = true;

    // Diagonal face averages (harmonic for m=1, arithmetic for systems).
    a_face_.resize(d_ * m_ * m_);
    for (int i = 0; i < d_; ++i)
      for (int al = 0; al < m_; ++al)
        for (int be = 0; be < m_; ++be) {
          const CoeffTable& node = a_node_[aidx(i, i, al, be)];
          CoeffTable face;
          face.zero = node.zero;
          face.constant = node.constant;
          face.c0 = node.c0;
          if (!node.constant) {
            face.samples.resize(total_);
            const long s = field_.stride(i);
            for (long p = 0; p < total_; ++p) {
              const Eigen::Vector3i idx = field_.unflatten(p);
              long q = p + s;
              if (idx[i] + 1 >= n_) {
                if (bc == BCKind::Periodic)
                  q = p + s - s * n_;
                else
                  q = p;  // unused face
              }
              const double x = node.samples[p], y = node.samples[q];
              face.samples[p] = (m_ == 1) ? 2.0 * x * y / (x + y)
                                          : 0.5 * (x + y);
            }
          }
          a_face_[vidx(i, al, be)] = face;
        }

    // Geometry and boundary data.
    field_.mask.assign(total_, kInterior);
    if (ball) {
      for (long p = 0; p < total_; ++p) {
        const Eigen::Vector3d x = field_.point(p);
        double r2 = 0.0;
        for (int a = 0; a < d_; ++a)
          r2 += (x[a] - ball->center[a]) * (x[a] - ball->center[a]);
        if (r2 >= ball->radius * ball->radius) field_.mask[p] = kExterior;
      }
      // Cut arms via exact sphere crossings.
      for (long p = 0; p < total_; ++p) {
        if (field_.mask[p] != kInterior) continue;
        const Eigen::Vector3i idx = field_.unflatten(p);
        const Eigen::Vector3d x = field_.point(p);
        for (int a = 0; a < d_; ++a)
          for (int dir = 0; dir < 2; ++dir) {
            const int step = dir ? 1 : -1;
            Eigen::Vector3i nidx = idx;
            nidx[a] += step;
            bool outside = nidx[a] < 0 || nidx[a] >= n_;
            long q = outside ? -1 : field_.flatten(nidx);
            if (!outside && field_.mask[q] != kExterior) continue;
            // Crossing fraction along the arm.
            Eigen::Vector3d rel = x - ball->center;
            const double b = rel[a] * step;
            const double cc = rel.squaredNorm() - ball->radius * ball->radius;
            const double t = (-b + std::sqrt(b * b - cc)) / 1.0;  // in units of length
            const double frac = std::min(1.0, std::max(1e-6, t / h_));
            CutArm arm;
            arm.cut = true;
            arm.frac = frac;
            Eigen::Vector3d xb = x;
            xb[a] += step * frac * h_;
            arm.bval = bc_data ? bc_data(xb) : Eigen::VectorXd::Zero(m_);
            arm.a_mid.resize(m_ * m_);
            Eigen::Vector3d xm = x;
            xm[a] += step * 0.5 * frac * h_;
            for (int al = 0; al < m_; ++al)
              for (int be = 0; be < m_; ++be)
                arm.a_mid[al * m_ + be] =
                    coeffs.a(a, a, al, be)(xm / eps);
            cuts_[p].arm[a][dir] = arm;
          }
      }
    } else if (bc == BCKind::Dirichlet) {
      for (long p = 0; p < total_; ++p) {
        const Eigen::Vector3i idx = field_.unflatten(p);
        for (int a = 0; a < d_; ++a)
          if (idx[a] == 0 || idx[a] == n_ - 1) field_.mask[p] = kBoundary;
      }
    }

    // Dof numbering and fixed values.
    node_to_dof_.assign(total_, -1);
    for (long p = 0; p < total_; ++p) {
      if (field_.mask[p] == kInterior ||
          (bc == BCKind::Neumann && field_.mask[p] != kExterior)) {
        node_to_dof_[p] = static_cast<long>(dof_to_node_.size());
        dof_to_node_.push_back(p);
      }
    }
    fixed_.setZero(total_ * m_);
    if (bc == BCKind::Dirichlet && !ball && bc_data) {
      for (long p = 0; p < total_; ++p)
        if (field_.mask[p] == kBoundary) {
          const Eigen::VectorXd g = bc_data(field_.point(p));
          for (int c = 0; c < m_; ++c) fixed_[p * m_ + c] = g[c];
        }
    }

    // Neumann rows: outward axis (first hit) and sign per boundary node.
    if (bc == BCKind::Neumann) {
      neumann_axis_.assign(total_, -1);
      neumann_sign_.assign(total_, 0);
      for (long p = 0; p < total_; ++p) {
        const Eigen::Vector3i idx = field_.unflatten(p);
        for (int a = 0; a < d_; ++a) {
          if (idx[a] == 0) {
            neumann_axis_[p] = a;
            neumann_sign_[p] = -1;
            break;
          }
          if (idx[a] == n_ - 1) {
            neumann_axis_[p] = a;
            neumann_sign_[p] = 1;
            break;
          }
        }
      }
    }

    // Right-hand side.
    rhs_.setZero(n_dofs() * m_);
    for (long dof = 0; dof < n_dofs(); ++dof) {
      const long p = dof_to_node_[dof];
      const Eigen::Vector3d x = field_.point(p);
      if (bc == BCKind::Neumann && neumann_axis_[p] >= 0) {
        const Eigen::VectorXd f =
            bc_data ? bc_data(x) : Eigen::VectorXd::Zero(m_);
        for (int c = 0; c < m_; ++c) rhs_[dof * m_ + c] = f[c];
      } else if (forcing) {
        const Eigen::VectorXd f = forcing(x);
        for (int c = 0; c < m_; ++c) rhs_[dof * m_ + c] = f[c];
      }
    }
    // Move the fixed-value contribution to the right-hand side.
    if (fixed_.lpNorm<Eigen::Infinity>() > 0.0) {
      Eigen::VectorXd contrib(n_dofs() * m_);
      apply_full(fixed_, contrib);
      rhs_ -= contrib;
    }
  }

  long n_dofs() const { return static_cast<long>(dof_to_node_.size()); }
  const GridField& prototype() const { return field_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }

  bool symmetric(const PeriodicCoefficients& coeffs) const {
    if (bc_ == BCKind::Neumann || !cuts_.empty()) return false;
    if (has_b_ != has_v_) return false;
    for (size_t q = 0; q < v_node_.size(); ++q)
      if (!tables_equal(v_node_[q], b_node_[q])) return false;
    for (int al = 0; al < m_; ++al)
      for (int be = 0; be < m_; ++be)
        if (!tables_equal(c_node_[al * m_ + be], c_node_[be * m_ + al]))
          return false;
    return coeffs.is_symmetric();
  }

  // y = A x on the dof space.
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    scatter(x, work_full_);
    apply_full(work_full_, y);
  }

  void scatter(const Eigen::VectorXd& x, Eigen::VectorXd& full) const {
    full.setZero(total_ * m_);
    for (long dof = 0; dof < n_dofs(); ++dof) {
      const long p = dof_to_node_[dof];
      for (int c = 0; c < m_; ++c) full[p * m_ + c] = x[dof * m_ + c];
    }
  }

  GridField make_field(const Eigen::VectorXd& x) const {
    GridField out = field_;
    out.values = fixed_;
    for (long dof = 0; dof < n_dofs(); ++dof) {
      const long p = dof_to_node_[dof];
      for (int c = 0; c < m_; ++c)
        out.values[p * m_ + c] = x[dof * m_ + c];
    }
    // For ball geometry leave exterior values at zero.
    return out;
  }

  Eigen::VectorXd jacobi_inverse() const {
    Eigen::VectorXd diag(n_dofs() * m_);
    for (long dof = 0; dof < n_dofs(); ++dof) {
      const long p = dof_to_node_[dof];
      const CutNode* cut = cut_at(p);
      for (int al = 0; al < m_; ++al) {
        double v;
        if (bc_ == BCKind::Neumann && neumann_axis_[p] >= 0) {
          const int a = neumann_axis_[p];
          const int sign = neumann_sign_[p];
          v = sign * a_node_[aidx(a, a, al, al)].at(p) * (3.0 / (2.0 * h_)) *
              sign;  // leading one-sided weight, both signs cancel
          v += v_node_[vidx(a, al, al)].at(p) * sign;
        } else {
          v = c_node_[al * m_ + al].at(p) + lambda_;
          for (int a = 0; a < d_; ++a) {
            double hp = h_, hm = h_, ap, am;
            if (cut && cut->arm[a][1].cut) {
              hp = cut->arm[a][1].frac * h_;
              ap = cut->arm[a][1].a_mid[al * m_ + al];
            } else {
              ap = a_face_[vidx(a, al, al)].at(p);
            }
            const long sm = field_.stride(a);
            long pm = p - sm;
            if (cut && cut->arm[a][0].cut) {
              hm = cut->arm[a][0].frac * h_;
              am = cut->arm[a][0].a_mid[al * m_ + al];
            } else {
              if (field_.unflatten(p)[a] == 0) pm = p + sm * (n_ - 1);
              am = a_face_[vidx(a, al, al)].at(pm);
            }
            const double hbar = 0.5 * (hp + hm);
            v += (ap / hp + am / hm) / hbar;
          }
        }
        diag[dof * m_ + al] = 1.0 / std::max(std::abs(v), 1e-300);
      }
    }
    return diag;
  }

 private:
  int aidx(int i, int j, int al, int be) const {
    return ((i * d_ + j) * m_ + al) * m_ + be;
  }
  int vidx(int i, int al, int be) const { return (i * m_ + al) * m_ + be; }

  const CutNode* cut_at(long p) const {
    if (cuts_.empty()) return nullptr;
    auto it = cuts_.find(p);
    return it == cuts_.end() ? nullptr : &it->second;
  }

  // Value of u at the neighbor of p along (axis, dir), honoring wraps, cut
  // arms and exterior nodes. Returns the effective spacing in *dist.
  double neighbor_value(const Eigen::VectorXd& u, long p,
                        const Eigen::Vector3i& idx, int axis, int dir,
                        int comp, const CutNode* cut, double* dist) const {
    if (cut && cut->arm[axis][dir].cut) {
      *dist = cut->arm[axis][dir].frac * h_;
      return cut->arm[axis][dir].bval[comp];
    }
    const long s = field_.stride(axis);
    long q;
    if (dir) {
      q = idx[axis] + 1 < n_ ? p + s
                             : (bc_ == BCKind::Periodic ? p + s - s * n_ : -1);
    } else {
      q = idx[axis] > 0 ? p - s
                        : (bc_ == BCKind::Periodic ? p - s + s * n_ : -1);
    }
    *dist = h_;
    if (q < 0) return 0.0;  // only reachable for defensive fallbacks
    return u[q * m_ + comp];
  }

  // Centered first derivatives of all components along all axes, full grid.
  void compute_dcu(const Eigen::VectorXd& u) const {
    dcu_.resize(d_ * m_);
    for (int a = 0; a < d_; ++a)
      for (int c = 0; c < m_; ++c) {
        Eigen::VectorXd& out = dcu_[a * m_ + c];
        out.setZero(total_);
        const long s = field_.stride(a);
#pragma omp parallel for schedule(static)
        for (long p = 0; p < total_; ++p) {
          if (field_.mask[p] == kExterior) continue;
          const Eigen::Vector3i idx = field_.unflatten(p);
          const CutNode* cut = cut_at(p);
          double hp, hm;
          double up, um;
          if ((cut && (cut->arm[a][0].cut || cut->arm[a][1].cut))) {
            up = neighbor_value(u, p, idx, a, 1, c, cut, &hp);
            um = neighbor_value(u, p, idx, a, 0, c, cut, &hm);
            out[p] = (up - um) / (hp + hm);
          } else if (bc_ != BCKind::Periodic && idx[a] == 0) {
            out[p] = (-3.0 * u[p * m_ + c] + 4.0 * u[(p + s) * m_ + c] -
                      u[(p + 2 * s) * m_ + c]) /
                     (2.0 * h_);
          } else if (bc_ != BCKind::Periodic && idx[a] == n_ - 1) {
            out[p] = (3.0 * u[p * m_ + c] - 4.0 * u[(p - s) * m_ + c] +
                      u[(p - 2 * s) * m_ + c]) /
                     (2.0 * h_);
          } else {
            const long qp = idx[a] + 1 < n_ ? p + s : p + s - s * n_;
            const long qm = idx[a] > 0 ? p - s : p - s + s * n_;
            out[p] = (u[qp * m_ + c] - u[qm * m_ + c]) / (2.0 * h_);
          }
        }
      }
  }

  // W_i^alpha = sum_{j != i} a_ij dcu_j + V_i u, full grid.
  void compute_w(const Eigen::VectorXd& u) const {
    w_.resize(d_ * m_);
    for (int i = 0; i < d_; ++i)
      for (int al = 0; al < m_; ++al) {
        Eigen::VectorXd& out = w_[i * m_ + al];
        out.setZero(total_);
#pragma omp parallel for schedule(static)
        for (long p = 0; p < total_; ++p) {
          if (field_.mask[p] == kExterior) continue;
          double acc = 0.0;
          for (int be = 0; be < m_; ++be) {
            for (int j = 0; j < d_; ++j) {
              if (j == i) continue;
              const CoeffTable& t = a_node_[aidx(i, j, al, be)];
              if (!t.zero) acc += t.at(p) * dcu_[j * m_ + be][p];
            }
            const CoeffTable& tv = v_node_[vidx(i, al, be)];
            if (!tv.zero) acc += tv.at(p) * u[p * m_ + be];
          }
          out[p] = acc;
        }
      }
  }

  void apply_full(const Eigen::VectorXd& u, Eigen::VectorXd& y) const {
    const bool need_dcu = has_offdiag_ || has_v_ || has_b_ ||
                          bc_ == BCKind::Neumann;
    if (need_dcu) compute_dcu(u);
    const bool need_w = has_offdiag_ || has_v_;
    if (need_w) compute_w(u);

    y.resize(n_dofs() * m_);
#pragma omp parallel for schedule(static)
    for (long dof = 0; dof < n_dofs(); ++dof) {
      const long p = dof_to_node_[dof];
      const Eigen::Vector3i idx = field_.unflatten(p);
      const CutNode* cut = cut_at(p);

      if (bc_ == BCKind::Neumann && neumann_axis_[p] >= 0) {
        // Collocated conormal: sign * (A grad u + V u) . e_axis = data.
        const int a = neumann_axis_[p];
        const int sign = neumann_sign_[p];
        for (int al = 0; al < m_; ++al) {
          double acc = 0.0;
          for (int be = 0; be < m_; ++be) {
            for (int j = 0; j < d_; ++j) {
              const CoeffTable& t = a_node_[aidx(a, j, al, be)];
              if (!t.zero) acc += t.at(p) * dcu_[j * m_ + be][p];
            }
            const CoeffTable& tv = v_node_[vidx(a, al, be)];
            if (!tv.zero) acc += tv.at(p) * u[p * m_ + be];
          }
          y[dof * m_ + al] = sign * acc;
        }
        continue;
      }

      for (int al = 0; al < m_; ++al) {
        double acc = lambda_ * u[p * m_ + al];
        for (int be = 0; be < m_; ++be) {
          const CoeffTable& tc = c_node_[al * m_ + be];
          if (!tc.zero) acc += tc.at(p) * u[p * m_ + be];
          if (has_b_) {
            for (int i = 0; i < d_; ++i) {
              const CoeffTable& tb = b_node_[vidx(i, al, be)];
              if (!tb.zero) acc += tb.at(p) * dcu_[i * m_ + be][p];
            }
          }
        }

        // -div of the diagonal fluxes.
        for (int a = 0; a < d_; ++a) {
          const long s = field_.stride(a);
          double hp = h_, hm = h_;
          double flux_p = 0.0, flux_m = 0.0;
          const bool cut_p = cut && cut->arm[a][1].cut;
          const bool cut_m = cut && cut->arm[a][0].cut;
          for (int be = 0; be < m_; ++be) {
            if (cut_p) {
              hp = cut->arm[a][1].frac * h_;
              flux_p += cut->arm[a][1].a_mid[al * m_ + be] *
                        (cut->arm[a][1].bval[be] - u[p * m_ + be]) / hp;
            } else {
              const long q = idx[a] + 1 < n_ ? p + s : p + s - s * n_;
              flux_p += a_face_[vidx(a, al, be)].at(p) *
                        (u[q * m_ + be] - u[p * m_ + be]) / h_;
            }
            if (cut_m) {
              hm = cut->arm[a][0].frac * h_;
              flux_m += cut->arm[a][0].a_mid[al * m_ + be] *
                        (u[p * m_ + be] - cut->arm[a][0].bval[be]) / hm;
            } else {
              const long q = idx[a] > 0 ? p - s : p - s + s * n_;
              flux_m += a_face_[vidx(a, al, be)].at(q) *
                        (u[p * m_ + be] - u[q * m_ + be]) / h_;
            }
          }
          acc -= (flux_p - flux_m) / (0.5 * (hp + hm));
        }

        // -d_i W_i with centered differences.
        if (need_w) {
          for (int a = 0; a < d_; ++a) {
            const long s = field_.stride(a);
            const Eigen::VectorXd& wa = w_[a * m_ + al];
            double dv;
            const bool lo_edge = bc_ != BCKind::Periodic && idx[a] == 0;
            const bool hi_edge = bc_ != BCKind::Periodic && idx[a] == n_ - 1;
            long qp = idx[a] + 1 < n_ ? p + s : p + s - s * n_;
            long qm = idx[a] > 0 ? p - s : p - s + s * n_;
            const bool ext_p = !lo_edge && !hi_edge &&
                               field_.mask[qp] == kExterior;
            const bool ext_m = !lo_edge && !hi_edge &&
                               field_.mask[qm] == kExterior;
            if (lo_edge || ext_m) {
              dv = (wa[qp] - wa[p]) / h_;
            } else if (hi_edge || ext_p) {
              dv = (wa[p] - wa[qm]) / h_;
            } else {
              dv = (wa[qp] - wa[qm]) / (2.0 * h_);
            }
            acc -= dv;
          }
        }
        y[dof * m_ + al] = acc;
      }
    }
  }

  int d_, m_, n_;
  BCKind bc_;
  double lambda_, h_;
  long total_ = 0;
  GridField field_;
  std::vector<CoeffTable> a_node_, a_face_, v_node_, b_node_, c_node_;
  bool has_offdiag_ = false, has_v_ = false, has_b_ = false;
  std::unordered_map<long, CutNode> cuts_;
  std::vector<long> dof_to_node_, node_to_dof_;
  std::vector<int> neumann_axis_, neumann_sign_;
  Eigen::VectorXd fixed_, rhs_;
  mutable Eigen::VectorXd work_full_;
  mutable std::vector<Eigen::VectorXd> dcu_, w_;
};

int pcg(const FdSystem& sys, const Eigen::VectorXd& b,
        const Eigen::VectorXd& minv, Eigen::VectorXd& x, double tol,
        int max_iters, double* final_rel) {
  const double bnorm = b.norm();
  x.setZero(b.size());
  if (bnorm == 0.0) {
    *final_rel = 0.0;
    return 0;
  }
  Eigen::VectorXd r = b, z = minv.asDiagonal() * r, p = z, Ap(b.size());
  double rz = r.dot(z);
  int it = 0;
  for (; it < max_iters; ++it) {
    sys.apply(p, Ap);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    *final_rel = r.norm() / bnorm;
    if (*final_rel <= tol) break;
    z = minv.asDiagonal() * r;
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return it;
}

int bicgstab(const FdSystem& sys, const Eigen::VectorXd& b,
             const Eigen::VectorXd& minv, Eigen::VectorXd& x, double tol,
             int max_iters, double* final_rel) {
  const double bnorm = b.norm();
  x.setZero(b.size());
  if (bnorm == 0.0) {
    *final_rel = 0.0;
    return 0;
  }
  Eigen::VectorXd r = b, rhat = r;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(b.size()), v = p, s = p, t = p;
  Eigen::VectorXd y(b.size()), z(b.size());
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  for (; it < max_iters; ++it) {
    const double rho_new = rhat.dot(r);
    if (std::abs(rho_new) < 1e-300) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    p = r + beta * (p - omega * v);
    y = minv.asDiagonal() * p;
    sys.apply(y, v);
    alpha = rho / rhat.dot(v);
    s = r - alpha * v;
    x += alpha * y;
    *final_rel = s.norm() / bnorm;
    if (*final_rel <= tol) break;
    z = minv.asDiagonal() * s;
    sys.apply(z, t);
    omega = t.dot(s) / t.dot(t);
    x += omega * z;
    r = s - omega * t;
    *final_rel = r.norm() / bnorm;
    if (*final_rel <= tol) break;
  }
  return it;
}

GridField run_solve(const PeriodicCoefficients& coeffs,
                    const OperatorParams& params, const BoxDomain& box,
                    BCKind bc, const EmbeddedBall* ball,
                    const FieldFunction& bc_data, const FieldFunction& forcing,
                    int n, const OracleOptions& opts, SolveInfo* info) {
  coeffs.validate();
  OperatorParams checked = params;
  checked.lambda0 = compute_lambda0(coeffs);
  checked.require_coercive(coeffs.mu);
  if (n < 4) throw std::invalid_argument("grid too coarse");

  FdSystem sys(coeffs, checked, box, bc, ball, bc_data, forcing, n);

  const double h = sys.prototype().h;
  const bool under_resolved =
      coeffs.bandwidth() > 0 && h > params.epsilon / 8.0;
  if (under_resolved && !opts.quiet)
    std::cerr << "oracle: grid under-resolves epsilon (h=" << h
              << ", eps=" << params.epsilon << ")\n";

  const Eigen::VectorXd minv = sys.jacobi_inverse();
  const bool sym = sys.symmetric(coeffs);
  Eigen::VectorXd x;
  double rel = 0.0;
  const int iters =
      sym ? pcg(sys, sys.rhs(), minv, x, opts.tol, opts.max_iters, &rel)
          : bicgstab(sys, sys.rhs(), minv, x, opts.tol, opts.max_iters, &rel);
  if (rel > opts.tol * 100 && rel > 1e-8)
    throw OracleSolveError("finite-difference solve did not converge (rel=" +
                               std::to_string(rel) + ")",
                           rel);
  if (info) {
    info->iters = iters;
    info->rel_residual = rel;
    info->symmetric = sym;
    info->unknowns = sys.n_dofs() * coeffs.m;
  }
  return sys.make_field(x);
}

}  // namespace

GridField direct_solve_box(const PeriodicCoefficients& coeffs,
                           const OperatorParams& params, const BoxDomain& box,
                           BCKind bc, const FieldFunction& bc_data,
                           const FieldFunction& forcing, int n,
                           const OracleOptions& opts, SolveInfo* info) {
  return run_solve(coeffs, params, box, bc, nullptr, bc_data, forcing, n,
                   opts, info);
}

GridField direct_solve_ball(const PeriodicCoefficients& coeffs,
                            const OperatorParams& params,
                            const EmbeddedBall& ball, const FieldFunction& g,
                            const FieldFunction& forcing, int n,
                            const OracleOptions& opts, SolveInfo* info) {
  BoxDomain box;
  box.d = coeffs.d;
  const double pad = 2.0 * ball.radius / (n - 3);
  box.lo = ball.center - Eigen::Vector3d::Constant(ball.radius + pad);
  for (int a = coeffs.d; a < 3; ++a) box.lo[a] = 0.0;
  box.side = 2.0 * (ball.radius + pad);
  return run_solve(coeffs, params, box, BCKind::Dirichlet, &ball, g, forcing,
                   n, opts, info);
}

GridField discrete_green(const PeriodicCoefficients& coeffs,
                         const OperatorParams& params,
                         const Eigen::Vector3d& source, const BoxDomain& box,
                         int n, int comp, const OracleOptions& opts,
                         SolveInfo* info) {
  const double h = box.side / (n - 1);
  // Snap the source to the nearest node and place h^{-d} there.
  Eigen::Vector3i sidx = Eigen::Vector3i::Zero();
  for (int a = 0; a < coeffs.d; ++a)
    sidx[a] = static_cast<int>(std::round((source[a] - box.lo[a]) / h));
  Eigen::Vector3d snapped = box.lo;
  for (int a = 0; a < coeffs.d; ++a) snapped[a] += h * sidx[a];
  const double strength = std::pow(h, -coeffs.d);
  const int m = coeffs.m;
  auto forcing = [=](const Eigen::Vector3d& x) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
    if ((x - snapped).lpNorm<Eigen::Infinity>() < 0.49 * h)
      f[comp] = strength;
    return f;
  };
  return direct_solve_box(coeffs, params, box, BCKind::Dirichlet, nullptr,
                          forcing, n, opts, info);
}

double caccioppoli_ratio(const GridField& field, double mu, double lambda,
                         const Eigen::Vector3d& center, double R) {
  for (int a = 0; a < field.d; ++a) {
    const double lo = field.origin[a], hi = lo + (field.n - 1) * field.h;
    if (center[a] - 2.0 * R < lo - 0.5 * field.h ||
        center[a] + 2.0 * R > hi + 0.5 * field.h)
      throw std::invalid_argument("ball B(center,2R) leaves the domain");
  }
  const long tot = field.total();
  double num_grad = 0.0, num_val = 0.0, den = 0.0;
  bool any_outer = false;
  for (long p = 0; p < tot; ++p) {
    const Eigen::Vector3d x = field.point(p);
    double r2 = 0.0;
    for (int a = 0; a < field.d; ++a)
      r2 += (x[a] - center[a]) * (x[a] - center[a]);
    if (r2 > 4.0 * R * R) continue;
    if (field.mask_at(p) == kExterior)
      throw std::invalid_argument("ball B(center,2R) leaves the domain");
    any_outer = true;
    double u2 = 0.0;
    for (int c = 0; c < field.m; ++c)
      u2 += field.value(p, c) * field.value(p, c);
    den += u2;
    if (r2 <= R * R) {
      num_val += u2;
      for (int c = 0; c < field.m; ++c)
        for (int a = 0; a < field.d; ++a) {
          const double g = field.deriv(p, a, c);
          num_grad += g * g;
        }
    }
  }
  if (!any_outer)
    throw std::invalid_argument("ball B(center,2R) contains no lattice nodes");
  if (den == 0.0) return 0.0;
  return std::sqrt(mu * num_grad + lambda * num_val) * R / std::sqrt(den);
}

}  // namespace hlp
