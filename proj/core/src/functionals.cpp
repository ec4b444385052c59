#include "nlkg/functionals.hpp"

#include <cmath>

#include "nlkg/errors.hpp"
#include "powers.hpp"

namespace nlkg {

namespace {

struct Densities {
  double kinetic = 0.0;
  double grad = 0.0;
  double mass = 0.0;
  double potential = 0.0;
};

// Integrates the four energy densities over nodes with r_i in [r_lo, r_hi)
// and faces with r_{i+1/2} in the same range.
Densities densities(const State& s, double r_lo, double r_hi) {
  const auto& g = *s.grid();
  const auto w = g.weights();
  const auto face = g.face_weights();
  const detail::CriticalPower pw{g.dim()};
  Densities out;
  for (int i = 0; i < g.size(); ++i) {
    const double r = g.node(i);
    if (r < r_lo || r >= r_hi) continue;
    const double wi = w[static_cast<std::size_t>(i)];
    const double u = s.u1[i];
    const double v = s.u2[i];
    out.kinetic += wi * v * v;
    out.mass += wi * u * u;
    out.potential += wi * pw.p(u);
  }
  for (std::size_t i = 0; i < face.size(); ++i) {
    const double rf = static_cast<double>(i + 1) * g.dr();
    if (rf < r_lo || rf >= r_hi) continue;
    const int j = static_cast<int>(i);
    const double diff = s.u1[j + 1] - s.u1[j];
    out.grad += face[i] * diff * diff;
  }
  // the harmonic exterior lives just outside r_max
  if (r_lo < g.r_max() && g.r_max() <= r_hi) {
    const double ul = s.u1[g.size() - 1];
    out.grad += g.boundary_weight() * ul * ul;
  }
  return out;
}

double combine(const Densities& q, double p, ExteriorVariant variant, double mass_coeff) {
  if (variant == ExteriorVariant::Signed)
    return 0.5 * q.kinetic + 0.5 * q.grad + 0.5 * mass_coeff * q.mass - q.potential / p;
  return q.kinetic + q.grad + mass_coeff * q.mass + q.potential;
}

}  // namespace

FunctionalReport functional_report(const State& s, double mass_coeff) {
  const auto& g = *s.grid();
  const double p = g.critical_exponent();
  const int d = g.dim();
  FunctionalReport r;
  r.kinetic_sq = inner(s.u2, s.u2);
  r.mass_sq = inner(s.u1, s.u1);
  r.grad_sq = gradient_norm_sq(s.u1);
  r.potential = lp_norm_pow(s.u1);
  r.E_wa = 0.5 * r.kinetic_sq + 0.5 * r.grad_sq - r.potential / p;
  r.E = r.E_wa + 0.5 * mass_coeff * r.mass_sq;
  r.K = r.grad_sq - r.potential;
  r.I = r.potential / d;
  r.G = r.grad_sq / d;
  return r;
}

double energy(const State& s, double mass_coeff) { return functional_report(s, mass_coeff).E; }

double energy_wave(const State& s) {
  const double p = s.grid()->critical_exponent();
  return 0.5 * inner(s.u2, s.u2) + 0.5 * gradient_norm_sq(s.u1) - lp_norm_pow(s.u1) / p;
}

double lp_norm_pow(const Field& f) {
  const auto w = f.grid()->weights();
  const detail::CriticalPower pw{f.grid()->dim()};
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += w[static_cast<std::size_t>(i)] * pw.p(f[i]);
  return s;
}

double k_functional(const Field& f) { return gradient_norm_sq(f) - lp_norm_pow(f); }

IG ig_functionals(const Field& f) {
  const int d = f.grid()->dim();
  return {lp_norm_pow(f) / d, gradient_norm_sq(f) / d};
}

double exterior_energy(const State& s, double R, ExteriorVariant variant, double mass_coeff, double center) {
  if (center != 0.0) throw InvalidArgument("radial states only admit the centre c = 0");
  if (R < 0.0) throw InvalidArgument("exterior radius must be non-negative");
  const auto q = densities(s, R, HUGE_VAL);
  return combine(q, s.grid()->critical_exponent(), variant, mass_coeff);
}

double interior_energy(const State& s, double R, ExteriorVariant variant, double mass_coeff) {
  const auto q = densities(s, -1.0, R);
  return combine(q, s.grid()->critical_exponent(), variant, mass_coeff);
}

double weighted_energy(const State& s, const Field& h, double mass_coeff) {
  check_same_grid(s.u1, h);
  const auto& g = *s.grid();
  const auto w = g.weights();
  const auto face = g.face_weights();
  const detail::CriticalPower pw{g.dim()};
  const double p = g.critical_exponent();
  double e = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double u = s.u1[i];
    const double v = s.u2[i];
    e += h[i] * w[static_cast<std::size_t>(i)] * (0.5 * v * v + 0.5 * mass_coeff * u * u - pw.p(u) / p);
  }
  for (std::size_t i = 0; i < face.size(); ++i) {
    const int j = static_cast<int>(i);
    const double diff = s.u1[j + 1] - s.u1[j];
    e += 0.25 * (h[j] + h[j + 1]) * face[i] * diff * diff;
  }
  const int last = g.size() - 1;
  e += 0.5 * h[last] * g.boundary_weight() * s.u1[last] * s.u1[last];
  return e;
}

}  // namespace nlkg
