#pragma once

#include <optional>
#include <string>

#include "nlkg/ground_state.hpp"

namespace nlkg {

struct ThresholdConfig {
  double delta_s = 0.5;
  double delta_l = 0.2;
  double delta_s_prime = 0.1;
  double delta_f = 0.05;
  double delta_m = 0.02;
  double delta_V = 0.01;
  double delta_b = 0.005;
  double eps_star = 0.002;

  // Throws ValidationError naming the first field that breaks the ordering
  // eps* < delta_b < delta_V < delta_m < delta_f < delta_s' < delta_l < delta_s.
  void validate() const;
  bool operator==(const ThresholdConfig&) const = default;
};

// Quintic smoothstep cutoff: 1 on [0,1], 0 on [2,inf), C^2 in between.
double cutoff_chi(double r);

struct Decomposition {
  double sigma = 0.0;
  Field v1, v2;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Field gamma1, gamma2;
  bool converged = false;
  double orth_residual = 0.0;  // |<v1, S'_0 rho>| / ||S'_0 rho||
  int iterations = 0;
  double v_norm = 0.0;         // sqrt(||grad v1||^2 + ||v2||^2)
  double gamma_norm = 0.0;     // same norm for gamma
};

// Soliton-frame coordinates: u = S^sigma (W + v) with <v1, S'_0 rho> = 0.
// Throws NoConvergence when no root exists within sigma_guess +- 2, and
// FarFromSoliton when ||v|| > delta_s.
Decomposition decompose(const State& s, const GroundStateBundle& b, double sigma_guess = 0.0,
                        const ThresholdConfig& th = {});
std::optional<Decomposition> try_decompose(const State& s, const GroundStateBundle& b, double sigma_guess = 0.0,
                                           const ThresholdConfig& th = {});
// S^sigma (W + v): the inverse of decompose up to interpolation error.
State reconstruct(const Decomposition& dec, const GroundStateBundle& b);

// The orthogonality function g(sigma) = <S^{-sigma}_{-1} u1 - W, S'_0 rho>.
double orthogonality_function(const Field& u1, const GroundStateBundle& b, double sigma);

// Range of sigma for which S^sigma W is resolved on the grid, intersected
// with [-6, 6].
struct SigmaWindow {
  double lo = -6.0;
  double hi = 6.0;
};
SigmaWindow resolvable_sigma_window(const RadialGrid& g);

struct SolitonDistance {
  double value = 0.0;
  double sigma = 0.0;  // minimiser
};
SolitonDistance soliton_distance_full(const State& s, const GroundStateBundle& b);
double soliton_distance(const State& s, const GroundStateBundle& b);

struct LinearDistance {
  double d0 = 0.0;
  double radicand = 0.0;
  bool clamped = false;  // radicand below -1e-10
};
LinearDistance linear_distance_d0(const Decomposition& dec, const State& s, const GroundStateBundle& b);

struct DistanceReport {
  double d_tilde = 0.0;
  double d0 = 0.0;
  double d_s = 0.0;
  double chi = 0.0;
  bool decomposed = false;
  bool d_s_computed = false;  // false: d_s is the upper bound ||v|| (chi = 1 region)
  bool clamped = false;
  std::optional<Decomposition> decomposition;
};
DistanceReport nonlinear_distance_report(const State& s, const GroundStateBundle& b, const ThresholdConfig& th,
                                         double sigma_guess = 0.0);
double nonlinear_distance(const State& s, const GroundStateBundle& b, const ThresholdConfig& th);

struct ThetaResult {
  int theta = 0;
  int lambda_branch = 0;  // -sign(lambda1) when available, else 0
  int k_branch = 0;       // sign(K) when available, else 0
  bool overlap = false;
  bool overlap_mismatch = false;
  double K = 0.0;
  double energy = 0.0;
  DistanceReport distance;
};
// Throws DomainViolation unless E < E_wa(W) + d_tilde^2 / 2.
ThetaResult theta_sign(const State& s, const GroundStateBundle& b, const ThresholdConfig& th,
                       double mass_coeff = 1.0, double sigma_guess = 0.0);

double cubic_remainder_c(const Field& v1, const GroundStateBundle& b);
Field nonlin_remainder_n(const Field& v1, const GroundStateBundle& b);

struct CoercivityResult {
  bool defined = false;
  double ratio = 0.0;
};
// Throws InvalidArgument unless |<g, rho>| <= 1e-8 ||g||.
CoercivityResult coercivity_ratio(const Field& g, const GroundStateBundle& b);

}  // namespace nlkg
