#pragma once

#include "nlkg/radial_grid.hpp"

namespace nlkg {

// All functionals take the mass coefficient of the equation
// u_tt - Lap u + m^2 u = |u|^{2*-2} u explicitly where it enters; m^2 = 1 is
// the physical equation, smaller values arise in the rescaled soliton frame.
struct FunctionalReport {
  double E = 0.0;
  double E_wa = 0.0;
  double mass_sq = 0.0;     // ||u1||^2
  double kinetic_sq = 0.0;  // ||u2||^2
  double grad_sq = 0.0;     // ||grad u1||^2
  double potential = 0.0;   // integral of |u1|^{2*}
  double K = 0.0;
  double I = 0.0;
  double G = 0.0;
};

FunctionalReport functional_report(const State& s, double mass_coeff = 1.0);

double energy(const State& s, double mass_coeff = 1.0);
double energy_wave(const State& s);

double lp_norm_pow(const Field& f);  // integral of |f|^{2*}
double k_functional(const Field& f);

struct IG {
  double I = 0.0;
  double G = 0.0;
};
IG ig_functionals(const Field& f);

enum class ExteriorVariant {
  Signed,   // potential term subtracted, halves as in the energy
  Positive  // all four densities added, no halves
};

// Energy restricted to |x - c| >= R. Only c = 0 exists for radial states.
double exterior_energy(const State& s, double R, ExteriorVariant variant, double mass_coeff = 1.0,
                       double center = 0.0);
// Complement of the above: the same densities restricted to |x| < R.
double interior_energy(const State& s, double R, ExteriorVariant variant, double mass_coeff = 1.0);

// E(h, s): every density of the energy multiplied by h (face terms use the
// face average of h).
double weighted_energy(const State& s, const Field& h, double mass_coeff = 1.0);

}  // namespace nlkg
