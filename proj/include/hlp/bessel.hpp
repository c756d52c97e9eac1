// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace hlp {

/// Modified Bessel function of the second kind K_nu(z) for nu >= 0, z > 0.
/// Two-regime evaluation: Temme's series for z <= 2, Steed's continued
/// fraction for z > 2, then stable upward recurrence in the order.
/// Relative accuracy ~1e-12 for z in [1e-8, 700]; underflows to 0 beyond.
/// Throws std::domain_error for z <= 0 or nu < 0.
double bessel_k(double nu, double z);

/// K_nu and K_{nu+1} in one call (shared machinery, used by kernel
/// gradients).
void bessel_k_pair(double nu, double z, double* k_nu, double* k_nup1);

}  // namespace hlp
