#pragma once

#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"

namespace oracle {

// Lowest eigenvalues of the discrete radial L+ by a dense tridiagonal solve.
// The matrix is assembled here from the flux-form definition (faces at
// multiples of dr, harmonic exterior flux at the wall) and symmetrised with
// the quadrature weights.
inline std::vector<double> dense_lplus_spectrum(int d, int n, double r_max) {
  const double dr = r_max / n;
  const double p = 2.0 * d / (d - 2.0);
  std::vector<double> diag(static_cast<std::size_t>(n)), off(static_cast<std::size_t>(n - 1));
  auto rn = [&](int i) { return (i + 0.5) * dr; };
  for (int i = 0; i < n; ++i) {
    const double r = rn(i);
    const double wi = std::pow(r, d - 1) * dr;
    double a = 0.0;
    if (i > 0) a += std::pow(i * dr, d - 1) / dr;
    if (i + 1 < n) a += std::pow((i + 1) * dr, d - 1) / dr;
    if (i + 1 == n) a += (d - 2.0) * std::pow(r, d - 2);
    diag[static_cast<std::size_t>(i)] = a / wi - (p - 1.0) * std::pow(w_value(d, r), p - 2.0);
    if (i + 1 < n) {
      const double wj = std::pow(rn(i + 1), d - 1) * dr;
      off[static_cast<std::size_t>(i)] = -std::pow((i + 1) * dr, d - 1) / dr / std::sqrt(wi * wj);
    }
  }
  const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, diag.data(), off.data(), nullptr, 1);
  if (info != 0) throw std::runtime_error("dstev failed");
  return diag;  // ascending
}


}  // namespace oracle
