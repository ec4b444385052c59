#include "nlkg/modulation.hpp"

#include <algorithm>
#include <cmath>

#include "nlkg/errors.hpp"
#include "nlkg/functionals.hpp"
#include "powers.hpp"

namespace nlkg {

void ThresholdConfig::validate() const {
  const std::pair<const char*, double> chain[] = {
      {"eps_star", eps_star}, {"delta_b", delta_b}, {"delta_V", delta_V},         {"delta_m", delta_m},
      {"delta_f", delta_f},   {"delta_s_prime", delta_s_prime}, {"delta_l", delta_l}, {"delta_s", delta_s},
  };
  for (const auto& [name, value] : chain)
    if (!(value > 0.0) || !std::isfinite(value))
      throw ValidationError(std::string("thresholds.") + name + " must be positive and finite");
  for (std::size_t i = 0; i + 1 < std::size(chain); ++i)
    if (!(chain[i].second < chain[i + 1].second))
      throw ValidationError(std::string("thresholds.") + chain[i].first + " must be smaller than thresholds." +
                            chain[i + 1].first);
}

double cutoff_chi(double r) {
  const double s = std::clamp(r - 1.0, 0.0, 1.0);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double orthogonality_function(const Field& u1, const GroundStateBundle& b, double sigma) {
  const Field f = scale(u1, -sigma, -1.0);
  return inner(f, b.s0_rho) - inner(b.W, b.s0_rho);
}

namespace {

double hdot_norm(const Field& a, const Field& v) { return std::sqrt(gradient_norm_sq(a) + inner(v, v)); }

struct RootResult {
  double sigma;
  int iterations;
  bool ok;
};

RootResult find_sigma(const Field& u1, const GroundStateBundle& b, double guess) {
  const double cW = inner(b.W, b.s0_rho);
  auto g_and_dg = [&](double s, double& g, double& dg) {
    const Field f = scale(u1, -s, -1.0);
    g = inner(f, b.s0_rho) - cW;
    dg = inner(f, b.s1_s0_rho);
  };
  const double lo_lim = guess - 2.0;
  const double hi_lim = guess + 2.0;

  // Newton with clipped steps; the analytic derivative comes from the exact
  // adjoint relation of the discrete generators.
  double s = guess;
  double g, dg;
  g_and_dg(s, g, dg);
  for (int it = 1; it <= 60; ++it) {
    if (g == 0.0) return {s, it, true};
    if (!(dg != 0.0) || !std::isfinite(dg)) break;
    double step = -g / dg;
    step = std::clamp(step, -0.25, 0.25);
    const double next = std::clamp(s + step, lo_lim, hi_lim);
    double g_next, dg_next;
    g_and_dg(next, g_next, dg_next);
    if (!std::isfinite(g_next)) break;
    const bool tiny = std::abs(next - s) < 1e-13 * std::max(1.0, std::abs(s));
    s = next;
    g = g_next;
    dg = dg_next;
    if (tiny) return {s, it, true};
  }

  // Fallback: scan outwards from the guess for the nearest sign change,
  // then bisect.
  const int samples = 80;
  const double h = 2.0 / samples;
  double best_a = NAN, best_b = NAN;
  double ga_prev = orthogonality_function(u1, b, guess);
  if (ga_prev == 0.0) return {guess, 0, true};
  for (int dir : {+1, -1}) {
    double a = guess;
    double ga = ga_prev;
    for (int j = 1; j <= samples; ++j) {
      const double c = guess + dir * j * h;
      const double gc = orthogonality_function(u1, b, c);
      if (std::signbit(gc) != std::signbit(ga)) {
        if (std::isnan(best_a) || std::abs(c - guess) < std::abs(best_b - guess)) {
          best_a = a;
          best_b = c;
        }
        break;
      }
      a = c;
      ga = gc;
    }
  }
  if (std::isnan(best_a)) return {guess, 60 + 2 * samples, false};
  double a = std::min(best_a, best_b), c = std::max(best_a, best_b);
  double ga = orthogonality_function(u1, b, a);
  int it = 0;
  for (; it < 100 && c - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + c);
    const double gm = orthogonality_function(u1, b, m);
    if (std::signbit(gm) == std::signbit(ga)) {
      a = m;
      ga = gm;
    } else {
      c = m;
    }
  }
  return {0.5 * (a + c), 60 + it, true};
}

}  // namespace

Decomposition decompose(const State& s, const GroundStateBundle& b, double sigma_guess, const ThresholdConfig& th) {
  check_same_grid(s.u1, b.W);
  const auto root = find_sigma(s.u1, b, sigma_guess);
  if (!root.ok) throw NoConvergence("no root of the orthogonality condition within sigma_guess +- 2");

  Decomposition dec;
  dec.sigma = root.sigma;
  dec.iterations = root.iterations;
  dec.v1 = scale(s.u1, -dec.sigma, -1.0) - b.W;
  dec.v2 = scale(s.u2, -dec.sigma, 0.0);
  dec.orth_residual = std::abs(inner(dec.v1, b.s0_rho)) / norm_l2(b.s0_rho);
  dec.lambda1 = inner(dec.v1, b.rho);
  dec.lambda2 = inner(dec.v2, b.rho);
  const double root2k = std::sqrt(2.0 * b.k);
  dec.lambda_plus = (b.k * dec.lambda1 + dec.lambda2) / root2k;
  dec.lambda_minus = (b.k * dec.lambda1 - dec.lambda2) / root2k;
  dec.gamma1 = dec.v1;
  dec.gamma1.axpy(-dec.lambda1, b.rho);
  dec.gamma2 = dec.v2;
  dec.gamma2.axpy(-dec.lambda2, b.rho);
  dec.v_norm = hdot_norm(dec.v1, dec.v2);
  dec.gamma_norm = hdot_norm(dec.gamma1, dec.gamma2);
  dec.converged = true;
  if (!(dec.v_norm <= th.delta_s))
    throw FarFromSoliton("remainder norm " + std::to_string(dec.v_norm) + " exceeds delta_s");
  return dec;
}

std::optional<Decomposition> try_decompose(const State& s, const GroundStateBundle& b, double sigma_guess,
                                           const ThresholdConfig& th) {
  try {
    return decompose(s, b, sigma_guess, th);
  } catch (const NoConvergence&) {
  } catch (const FarFromSoliton&) {
  }
  return std::nullopt;
}

State reconstruct(const Decomposition& dec, const GroundStateBundle& b) {
  return State(scale(b.W + dec.v1, dec.sigma, -1.0), scale(dec.v2, dec.sigma, 0.0));
}

SigmaWindow resolvable_sigma_window(const RadialGrid& g) {
  // S^sigma W has core width e^{-sigma}: keep it above 16 cells and below a
  // tenth of the domain.
  SigmaWindow w;
  w.hi = std::min(6.0, std::log(1.0 / (16.0 * g.dr())));
  w.lo = std::max(-6.0, -std::log(g.r_max() / 10.0));
  if (w.lo > w.hi) w.lo = w.hi = 0.0;
  return w;
}

SolitonDistance soliton_distance_full(const State& s, [[maybe_unused]] const GroundStateBundle& b) {
  const auto& g = *s.grid();
  const int d = g.dim();
  const auto face = g.face_weights();
  const double kinetic = inner(s.u2, s.u2);
  const int n = g.size();
  std::vector<double> diff(static_cast<std::size_t>(n));
  auto cost = [&](double sigma) {
    const double amp = std::exp((d / 2.0 - 1.0) * sigma);
    const double es = std::exp(sigma);
    for (int i = 0; i < n; ++i)
      diff[static_cast<std::size_t>(i)] = s.u1[i] - amp * ground_state_value(d, es * g.node(i));
    double acc = 0.0;
    for (std::size_t i = 0; i < face.size(); ++i) {
      const double q = diff[i + 1] - diff[i];
      acc += face[i] * q * q;
    }
    const double ql = diff[static_cast<std::size_t>(n - 1)];
    return acc + g.boundary_weight() * ql * ql + kinetic;
  };

  const auto win = resolvable_sigma_window(g);
  const int samples = 64;
  const double h = (win.hi - win.lo) / (samples - 1);
  int best = 0;
  double best_cost = HUGE_VAL;
  for (int j = 0; j < samples; ++j) {
    const double c = cost(win.lo + j * h);
    if (c < best_cost) {
      best_cost = c;
      best = j;
    }
  }
  double a = win.lo + std::max(0, best - 1) * h;
  double c = win.lo + std::min(samples - 1, best + 1) * h;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = c - phi * (c - a), x2 = a + phi * (c - a);
  double f1 = cost(x1), f2 = cost(x2);
  while (c - a > 1e-8) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - phi * (c - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (c - a);
      f2 = cost(x2);
    }
  }
  double sigma = 0.5 * (a + c);
  double value = cost(sigma);
  if (best_cost < value) {  // the bracket never beats the scan on flat cost
    value = best_cost;
    sigma = win.lo + best * h;
  }
  return {std::sqrt(std::max(0.0, value)), sigma};
}

double soliton_distance(const State& s, const GroundStateBundle& b) { return soliton_distance_full(s, b).value; }

LinearDistance linear_distance_d0(const Decomposition& dec, const State& s, const GroundStateBundle& b) {
  (void)s;  // E_wa is scale invariant; it is evaluated on the pulled-back pair W + v
  const double e = energy_wave(State(b.W + dec.v1, dec.v2));
  LinearDistance out;
  out.radicand = e - b.E_wa_W + b.k * b.k * dec.lambda1 * dec.lambda1;
  out.clamped = out.radicand < -1e-10;
  out.d0 = std::sqrt(std::max(0.0, out.radicand));
  return out;
}

DistanceReport nonlinear_distance_report(const State& s, const GroundStateBundle& b, const ThresholdConfig& th,
                                         double sigma_guess) {
  DistanceReport rep;
  auto dec = try_decompose(s, b, sigma_guess, th);
  if (dec) {
    const auto lin = linear_distance_d0(*dec, s, b);
    rep.d0 = lin.d0;
    rep.clamped = lin.clamped;
    rep.decomposed = true;
    if (dec->v_norm <= 0.9 * th.delta_s_prime) {
      // d_S <= ||v|| (take S^sigma W as competitor), so the cutoff is 1.
      rep.d_s = dec->v_norm;
      rep.chi = 1.0;
    } else {
      rep.d_s = soliton_distance(s, b);
      rep.d_s_computed = true;
      rep.chi = cutoff_chi(rep.d_s / th.delta_s_prime);
    }
    rep.d_tilde = rep.chi * rep.d0 + (1.0 - rep.chi) * rep.d_s;
    rep.decomposition = std::move(dec);
  } else {
    rep.d_s = soliton_distance(s, b);
    rep.d_s_computed = true;
    rep.chi = 0.0;
    rep.d_tilde = rep.d_s;
  }
  return rep;
}

double nonlinear_distance(const State& s, const GroundStateBundle& b, const ThresholdConfig& th) {
  return nonlinear_distance_report(s, b, th).d_tilde;
}

ThetaResult theta_sign(const State& s, const GroundStateBundle& b, const ThresholdConfig& th, double mass_coeff,
                       double sigma_guess) {
  ThetaResult out;
  out.distance = nonlinear_distance_report(s, b, th, sigma_guess);
  const double dt = out.distance.d_tilde;
  out.energy = energy(s, mass_coeff);
  if (!(out.energy < b.E_wa_W + 0.5 * dt * dt))
    throw DomainViolation("energy " + std::to_string(out.energy) + " is not below E_wa(W) + d_tilde^2/2");
  out.K = k_functional(s.u1);
  auto sign = [](double x) { return x < 0.0 ? -1 : 1; };
  if (dt <= th.delta_f && out.distance.decomposition) out.lambda_branch = -sign(out.distance.decomposition->lambda1);
  if (dt >= th.delta_b) out.k_branch = sign(out.K);
  out.overlap = out.lambda_branch != 0 && out.k_branch != 0;
  out.overlap_mismatch = out.overlap && out.lambda_branch != out.k_branch;
  out.theta = out.lambda_branch != 0 ? out.lambda_branch : (out.k_branch != 0 ? out.k_branch : sign(out.K));
  return out;
}

double cubic_remainder_c(const Field& v1, const GroundStateBundle& b) {
  check_same_grid(v1, b.W);
  const auto& g = *b.grid;
  const detail::CriticalPower pw{g.dim()};
  const double p = g.critical_exponent();
  const auto w = g.weights();
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double W = b.W[i];
    const double f = v1[i];
    const double Wpm2 = pw.pm2(W);
    const double term = (pw.p(W + f) - W * W * Wpm2) / p - W * Wpm2 * f - 0.5 * (p - 1.0) * Wpm2 * f * f;
    acc += w[static_cast<std::size_t>(i)] * term;
  }
  return acc;
}

Field nonlin_remainder_n(const Field& v1, const GroundStateBundle& b) {
  check_same_grid(v1, b.W);
  const auto& g = *b.grid;
  const detail::CriticalPower pw{g.dim()};
  const double p = g.critical_exponent();
  Field out(b.grid);
  for (int i = 0; i < g.size(); ++i) {
    const double W = b.W[i];
    const double f = v1[i];
    const double Wpm2 = pw.pm2(W);
    out[i] = pw.pm2(W + f) * (W + f) - W * Wpm2 - (p - 1.0) * Wpm2 * f;
  }
  return out;
}

CoercivityResult coercivity_ratio(const Field& gfield, const GroundStateBundle& b) {
  const double norm = norm_l2(gfield);
  if (norm == 0.0) return {};
  if (std::abs(inner(gfield, b.rho)) > 1e-8 * norm)
    throw InvalidArgument("coercivity probe needs a rho-orthogonal field");
  const double q = inner(apply_lplus(gfield, b.potential), gfield);
  const double proj = inner(gfield, b.s0_rho);
  const double denom = q + proj * proj;
  if (!(denom > 0.0)) return {};
  return {true, gradient_norm_sq(gfield) / denom};
}

}  // namespace nlkg
