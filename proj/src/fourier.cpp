// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/fourier.hpp"

#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace hlp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TorusGrid::TorusGrid(int dim, int n) : d(dim), N(n) {
  total = 1;
  for (int a = 0; a < d; ++a) total *= N;
}

Eigen::Vector3i TorusGrid::unflatten(long p) const {
  Eigen::Vector3i idx = Eigen::Vector3i::Zero();
  for (int a = 0; a < d; ++a) {
    idx[a] = static_cast<int>(p % N);
    p /= N;
  }
  return idx;
}

long TorusGrid::flatten(const Eigen::Vector3i& idx) const {
  long p = 0;
  for (int a = d - 1; a >= 0; --a) p = p * N + idx[a];
  return p;
}

Eigen::Vector3d TorusGrid::point(long p) const {
  Eigen::Vector3i idx = unflatten(p);
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  for (int a = 0; a < d; ++a) y[a] = static_cast<double>(idx[a]) / N;
  return y;
}

namespace {

// Unnormalized forward DFT along one axis.
void fft_axis(const TorusGrid& grid, Eigen::VectorXcd& data, int axis) {
  Eigen::FFT<double> fft;
  const int N = grid.N;
  std::vector<std::complex<double>> line(N), out(N);
  long stride = 1;
  for (int a = 0; a < axis; ++a) stride *= N;
  const long n_lines = grid.total / N;
  for (long l = 0; l < n_lines; ++l) {
    // Decompose line index into (inner, outer) around the axis.
    const long inner = l % stride;
    const long outer = l / stride;
    const long base = outer * stride * N + inner;
    for (int t = 0; t < N; ++t) line[t] = data[base + t * stride];
    fft.fwd(out, line);
    for (int t = 0; t < N; ++t) data[base + t * stride] = out[t];
  }
}

}  // namespace

void to_spectrum(const TorusGrid& grid, Eigen::VectorXcd& data) {
  for (int a = 0; a < grid.d; ++a) fft_axis(grid, data, a);
  data /= static_cast<double>(grid.total);
}

void from_spectrum(const TorusGrid& grid, Eigen::VectorXcd& data) {
  data = data.conjugate();
  for (int a = 0; a < grid.d; ++a) fft_axis(grid, data, a);
  data = data.conjugate();
}

Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& f) {
  return f.cast<std::complex<double>>();
}

Eigen::VectorXd complex_to_real(const Eigen::VectorXcd& f) {
  return f.real();
}

void spectral_derivative(const TorusGrid& grid, const Eigen::VectorXcd& in,
                         int axis, Eigen::VectorXcd& out) {
  out.resize(in.size());
  long stride = 1;
  for (int a = 0; a < axis; ++a) stride *= grid.N;
  for (long p = 0; p < grid.total; ++p) {
    const int t = static_cast<int>((p / stride) % grid.N);
    const double k = grid.wavenumber(t);
    out[p] = std::complex<double>(0.0, kTwoPi * k) * in[p];
  }
}

Eigen::VectorXcd pad_spectrum(const TorusGrid& from, const TorusGrid& to,
                              const Eigen::VectorXcd& spec) {
  if (from.d != to.d) throw std::invalid_argument("dimension mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(to.total);
  const int d = from.d;
  for (long p = 0; p < from.total; ++p) {
    Eigen::Vector3i idx = from.unflatten(p);
    Eigen::Vector3i kvec = Eigen::Vector3i::Zero();
    bool fits = true;
    for (int a = 0; a < d; ++a) {
      kvec[a] = from.wavenumber(idx[a]);
      if (kvec[a] < -to.N / 2 || kvec[a] > to.N / 2 - 1) fits = false;
    }
    if (!fits) continue;
    Eigen::Vector3i tidx = Eigen::Vector3i::Zero();
    for (int a = 0; a < d; ++a)
      tidx[a] = kvec[a] >= 0 ? kvec[a] : kvec[a] + to.N;
    out[to.flatten(tidx)] += spec[p];
  }
  return out;
}

double spectrum_norm(const Eigen::VectorXcd& spec) { return spec.norm(); }

double eval_spectrum(const TorusGrid& grid, const Eigen::VectorXcd& spec,
                     const Eigen::Vector3d& y) {
  std::complex<double> acc(0.0, 0.0);
  for (long p = 0; p < grid.total; ++p) {
    Eigen::Vector3i idx = grid.unflatten(p);
    double phase = 0.0;
    for (int a = 0; a < grid.d; ++a)
      phase += grid.wavenumber(idx[a]) * y[a];
    phase *= kTwoPi;
    acc += spec[p] * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return acc.real();
}

}  // namespace hlp
