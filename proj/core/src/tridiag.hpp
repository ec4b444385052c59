#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

// Symmetric tridiagonal helpers shared by the grid (spectral radius of the
// Laplacian) and the L+ eigensolver. Matrices are stored as the diagonal and
// the squared off-diagonal, which is all a Sturm sequence needs.
namespace nlkg::detail {

struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off_sq;  // off_sq[i] couples i and i+1

  std::size_t size() const { return diag.size(); }

  // Number of eigenvalues strictly below x.
  int count_below(double x) const {
    int count = 0;
    double q = 1.0;
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double coupling = i == 0 ? 0.0 : off_sq[i - 1] / q;
      q = diag[i] - x - coupling;
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  }

  void gershgorin(double& lo, double& hi) const {
    const std::size_t n = diag.size();
    lo = HUGE_VAL;
    hi = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      if (i > 0) r += std::sqrt(off_sq[i - 1]);
      if (i + 1 < n) r += std::sqrt(off_sq[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
  }

  // Eigenvalue number `index` (0 = smallest) by Sturm bisection.
  double eigenvalue(int index, double tol = 1e-13) const {
    double lo, hi;
    gershgorin(lo, hi);
    const double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, scale); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) > index)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  }
};

// Solves the (not necessarily symmetric) tridiagonal system
//   lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]
// without pivoting. Callers only use it on shifted M-matrices where this is
// stable and sign-preserving.
inline void thomas_solve(const std::vector<double>& lower, const std::vector<double>& diag,
                         const std::vector<double>& upper, const std::vector<double>& rhs,
                         std::vector<double>& x, std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  x.resize(n);
  scratch.resize(n);
  double denom = diag[0];
  scratch[0] = upper[0] / denom;
  x[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * scratch[i - 1];
    scratch[i] = i + 1 < n ? upper[i] / denom : 0.0;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
}

}  // namespace nlkg::detail
