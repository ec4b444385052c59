#pragma once

#include <memory>

#include "nlkg/radial_grid.hpp"

namespace nlkg {

// W(r) = (1 + r^2/(d(d-2)))^{-(d-2)/2}
double ground_state_value(int d, double r);
Field ground_state_w(const GridPtr& grid);
// S^sigma_{-1} W evaluated in closed form (no interpolation).
Field scaled_ground_state(const GridPtr& grid, double sigma);

// S^sigma_a f(x) = e^{(d/2+a) sigma} f(e^sigma x), by cubic interpolation.
Field scale(const Field& f, double sigma, double a);
// Fraction of L^2 mass that the rescaling loses past r_max or fills in from
// the constant extension beyond r_max. Values above 1e-2 mean the grid is too
// short for this sigma.
double scale_leakage(const Field& f, double sigma, double a);

// S'_a f ~ (d/2 + a) f + r f'. Away from the origin and the wall the discrete
// operator is a*I plus the skew-adjoint part of the centred r d/dr, so
// <S'_a f, g> = -<f, S'_{-a} g> holds to rounding for fields supported there.
Field scaling_generator(const Field& f, double a);

// L+ f = -Lap f - (2*-1) W^{2*-2} f
Field apply_lplus(const Field& f);
Field lplus_potential(const GridPtr& grid);  // (2*-1) W^{2*-2}
Field apply_lplus(const Field& f, const Field& potential);

struct EigenPair {
  double k = 0.0;            // L+ rho = -k^2 rho
  Field rho;                 // positive, unit L^2 norm
  double residual = 0.0;     // ||L+ rho + k^2 rho||
  int iterations = 0;
  double second_eigenvalue = 0.0;
  int negative_count = 0;    // eigenvalues below -1e-3
};
EigenPair ground_eigpair(const GridPtr& grid);

// Eigenvalues of the discrete L+ counted from the bottom (0 = lowest), by
// Sturm bisection; used for cross-checks.
double lplus_eigenvalue(const GridPtr& grid, int index);

double sobolev_quotient(const Field& f);  // ||f||_{L^{2*}} / ||f||_{H^1-dot}
double sobolev_constant(const GridPtr& grid);

struct GroundStateBundle {
  GridPtr grid;
  Field W;
  double k = 0.0;
  Field rho;
  double C_star = 0.0;
  double E_wa_W = 0.0;

  Field potential;     // (2*-1) W^{2*-2}
  Field s0_rho;        // S'_0 rho, the orthogonality direction
  Field s1_s0_rho;     // S'_1 S'_0 rho, derivative of the orthogonality condition
  Field residual_W;    // -Lap W - W^{2*-1} on the grid
  double grad_sq_W = 0.0;
  double eig_residual = 0.0;
  double second_eigenvalue = 0.0;
  double pde_residual_max = 0.0;  // interior max-norm of residual_W
  double lambda1_equilibrium = 0.0;  // <residual_W, rho>/k^2, O(dr^2)
};

using BundlePtr = std::shared_ptr<const GroundStateBundle>;

BundlePtr make_bundle(const GridPtr& grid);

}  // namespace nlkg
