// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hlp {

Eigen::Vector3i GridField::unflatten(long p) const {
  Eigen::Vector3i idx = Eigen::Vector3i::Zero();
  for (int a = 0; a < d; ++a) {
    idx[a] = static_cast<int>(p % n);
    p /= n;
  }
  return idx;
}

long GridField::flatten(const Eigen::Vector3i& idx) const {
  long p = 0;
  for (int a = d - 1; a >= 0; --a) p = p * n + idx[a];
  return p;
}

Eigen::Vector3d GridField::point(long p) const {
  Eigen::Vector3i idx = unflatten(p);
  Eigen::Vector3d x = origin;
  for (int a = 0; a < d; ++a) x[a] += h * idx[a];
  return x;
}

double GridField::deriv(long p, int axis, int comp) const {
  const Eigen::Vector3i idx = unflatten(p);
  const long s = stride(axis);
  if (bc == BCKind::Periodic) {
    const long up = idx[axis] + 1 < n ? p + s : p + s - s * n;
    const long dn = idx[axis] > 0 ? p - s : p - s + s * n;
    return (value(up, comp) - value(dn, comp)) / (2.0 * h);
  }
  if (idx[axis] == 0)
    return (-3.0 * value(p, comp) + 4.0 * value(p + s, comp) -
            value(p + 2 * s, comp)) /
           (2.0 * h);
  if (idx[axis] == n - 1)
    return (3.0 * value(p, comp) - 4.0 * value(p - s, comp) +
            value(p - 2 * s, comp)) /
           (2.0 * h);
  return (value(p + s, comp) - value(p - s, comp)) / (2.0 * h);
}

double GridField::l2_norm(
    const std::function<bool(const Eigen::Vector3d&)>& keep) const {
  double acc = 0.0;
  const long tot = total();
  for (long p = 0; p < tot; ++p) {
    if (mask_at(p) == kExterior) continue;
    if (keep && !keep(point(p))) continue;
    for (int c = 0; c < m; ++c) acc += value(p, c) * value(p, c);
  }
  return std::sqrt(acc * std::pow(h, d));
}

double GridField::linf_norm(
    const std::function<bool(const Eigen::Vector3d&)>& keep) const {
  double best = 0.0;
  const long tot = total();
  for (long p = 0; p < tot; ++p) {
    if (mask_at(p) == kExterior) continue;
    if (keep && !keep(point(p))) continue;
    for (int c = 0; c < m; ++c) best = std::max(best, std::abs(value(p, c)));
  }
  return best;
}

double GridField::h1_seminorm_sq(
    const std::function<bool(const Eigen::Vector3d&)>& keep) const {
  double acc = 0.0;
  const long tot = total();
  for (long p = 0; p < tot; ++p) {
    if (mask_at(p) != kInterior) continue;
    if (keep && !keep(point(p))) continue;
    bool ok = true;
    const Eigen::Vector3i idx = unflatten(p);
    for (int a = 0; a < d && ok; ++a) {
      if (bc == BCKind::Periodic) continue;
      // Need usable neighbors for centered/one-sided differences.
      if (idx[a] > 0 && mask_at(p - stride(a)) == kExterior) ok = false;
      if (idx[a] + 1 < n && mask_at(p + stride(a)) == kExterior) ok = false;
    }
    if (!ok) continue;
    for (int c = 0; c < m; ++c)
      for (int a = 0; a < d; ++a) {
        const double g = deriv(p, a, c);
        acc += g * g;
      }
  }
  return acc * std::pow(h, d);
}

void write_field(const GridField& field, const std::string& prefix) {
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(field.values.data()),
            field.values.size() * sizeof(double));
  bin.close();

  nlohmann::json j;
  j["d"] = field.d;
  j["m"] = field.m;
  j["n"] = field.n;
  j["h"] = field.h;
  std::vector<double> org(field.origin.data(), field.origin.data() + 3);
  j["origin"] = org;
  j["bc"] = field.bc == BCKind::Dirichlet
                ? "dirichlet"
                : (field.bc == BCKind::Neumann ? "neumann" : "periodic");
  j["layout"] = "node-major, first axis fastest, components interleaved";
  j["has_mask"] = !field.mask.empty();
  std::ofstream js(prefix + ".json");
  js << j.dump(2) << "\n";
  if (!field.mask.empty()) {
    std::ofstream mk(prefix + ".mask", std::ios::binary);
    mk.write(reinterpret_cast<const char*>(field.mask.data()),
             field.mask.size());
  }
}

GridField read_field(const std::string& prefix) {
  std::ifstream js(prefix + ".json");
  if (!js) throw std::runtime_error("cannot open " + prefix + ".json");
  nlohmann::json j;
  js >> j;
  GridField field;
  field.d = j.at("d").get<int>();
  field.m = j.at("m").get<int>();
  field.n = j.at("n").get<int>();
  field.h = j.at("h").get<double>();
  const auto& org = j.at("origin");
  for (int a = 0; a < 3; ++a) field.origin[a] = org[a].get<double>();
  const std::string bc = j.at("bc").get<std::string>();
  field.bc = bc == "dirichlet"
                 ? BCKind::Dirichlet
                 : (bc == "neumann" ? BCKind::Neumann : BCKind::Periodic);
  field.values.resize(field.total() * field.m);
  std::ifstream bin(prefix + ".bin", std::ios::binary);
  bin.read(reinterpret_cast<char*>(field.values.data()),
           field.values.size() * sizeof(double));
  if (j.value("has_mask", false)) {
    field.mask.resize(field.total());
    std::ifstream mk(prefix + ".mask", std::ios::binary);
    mk.read(reinterpret_cast<char*>(field.mask.data()), field.mask.size());
  }
  return field;
}

std::string field_line_cut_csv(const GridField& field, int axis,
                               const Eigen::Vector3i& through) {
  std::ostringstream os;
  os << "coord";
  for (int c = 0; c < field.m; ++c) os << ",u" << c;
  os << "\n";
  Eigen::Vector3i idx = through;
  for (int t = 0; t < field.n; ++t) {
    idx[axis] = t;
    const long p = field.flatten(idx);
    os << field.origin[axis] + field.h * t;
    for (int c = 0; c < field.m; ++c) os << "," << field.value(p, c);
    os << "\n";
  }
  return os.str();
}

}  // namespace hlp
