#include "nlkg/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlkg/errors.hpp"
#include "nlkg/functionals.hpp"
#include "powers.hpp"
#include "tridiag.hpp"

namespace nlkg {

double ground_state_value(int d, double r) {
  const double q = 1.0 + r * r / (d * (d - 2.0));
  switch (d) {
    case 3: return 1.0 / std::sqrt(q);
    case 4: return 1.0 / q;
    case 5: return 1.0 / (q * std::sqrt(q));
    default: return std::pow(q, -(d - 2.0) / 2.0);
  }
}

Field ground_state_w(const GridPtr& grid) {
  const int d = grid->dim();
  return Field::from_function(grid, [d](double r) { return ground_state_value(d, r); });
}

Field scaled_ground_state(const GridPtr& grid, double sigma) {
  const int d = grid->dim();
  const double amp = std::exp((d / 2.0 - 1.0) * sigma);
  const double es = std::exp(sigma);
  return Field::from_function(grid, [=](double r) { return amp * ground_state_value(d, es * r); });
}

Field scale(const Field& f, double sigma, double a) {
  if (sigma == 0.0) return f;
  const auto& grid = f.grid();
  const double amp = std::exp((grid->dim() / 2.0 + a) * sigma);
  const double es = std::exp(sigma);
  Field out(grid);
  for (int i = 0; i < grid->size(); ++i) out[i] = amp * sample(f, es * grid->node(i));
  return out;
}

double scale_leakage(const Field& f, double sigma, double a) {
  const auto& g = *f.grid();
  const double total = inner(f, f);
  if (total == 0.0 || sigma == 0.0) return 0.0;
  const auto w = g.weights();
  const double es = std::exp(sigma);
  double lost = 0.0;
  if (sigma < 0.0) {
    // source values beyond e^sigma r_max never reach the output grid
    for (int i = 0; i < g.size(); ++i)
      if (g.node(i) > es * g.r_max()) lost += w[static_cast<std::size_t>(i)] * f[i] * f[i];
    return lost / total;
  }
  // output nodes that read the constant extension beyond r_max
  const Field out = scale(f, sigma, a);
  const double out_total = inner(out, out);
  for (int i = 0; i < g.size(); ++i)
    if (es * g.node(i) > g.r_max()) lost += w[static_cast<std::size_t>(i)] * out[i] * out[i];
  return out_total > 0.0 ? lost / out_total : 0.0;
}

Field scaling_generator(const Field& f, double a) {
  const auto& g = *f.grid();
  const int n = g.size();
  const auto w = g.weights();
  const double h = 1.0 / (2.0 * g.dr());
  // Centred D f = r (f_{i+1} - f_{i-1}) / (2 dr) with reflected ghosts,
  // stored as lower/upper coefficients (the diagonal drops out of the skew part).
  auto lower = [&](int i) {
    if (i == 0) return 0.0;
    return -g.node(i) * h;
  };
  auto upper = [&](int i) {
    if (i == n - 1) return 0.0;
    return g.node(i) * h;
  };
  // Near the origin the weight ratios w_{i+1}/w_i are far from 1 and the skew
  // form is only accurate like dr^2/r^2. The first cells therefore use the
  // plain centred formula (even ghost at the origin), blended smoothly into
  // the skew form so that no kink is left for a Laplacian to amplify; the
  // wall cell uses a one-sided second-order difference. Pairings of fields
  // supported beyond the blend and away from the wall keep the exact skew
  // identity.
  constexpr int kPlainCells = 8;
  constexpr int kBlendCells = 56;
  const double half_d = 0.5 * g.dim();
  Field out(f.grid());
  for (int i = 0; i < n; ++i) {
    if (i == n - 1 && n >= 3) {
      out[i] = (half_d + a) * f[i] + g.node(i) * h * (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]);
      continue;
    }
    double plain = 0.0;
    double beta = 1.0;
    if (i < kPlainCells + kBlendCells || i == n - 1) {
      const double left = i > 0 ? f[i - 1] : f[0];
      const double right = i < n - 1 ? f[i + 1] : f[i];
      plain = (half_d + a) * f[i] + g.node(i) * h * (right - left);
      const double s01 = std::clamp((i - kPlainCells) / double(kBlendCells), 0.0, 1.0);
      beta = s01 * s01 * s01 * (10.0 - 15.0 * s01 + 6.0 * s01 * s01);
      if (beta == 0.0 || i == n - 1) {
        out[i] = plain;
        continue;
      }
    }
    const double wi = w[static_cast<std::size_t>(i)];
    double acc = a * f[i];
    const double adj_lo = upper(i - 1) * w[static_cast<std::size_t>(i - 1)] / wi;
    acc += 0.5 * (lower(i) - adj_lo) * f[i - 1];
    const double adj_up = lower(i + 1) * w[static_cast<std::size_t>(i + 1)] / wi;
    acc += 0.5 * (upper(i) - adj_up) * f[i + 1];
    out[i] = beta * acc + (1.0 - beta) * plain;
  }
  return out;
}

Field lplus_potential(const GridPtr& grid) {
  const detail::CriticalPower pw{grid->dim()};
  const double pm1 = grid->critical_exponent() - 1.0;
  Field W = ground_state_w(grid);
  for (int i = 0; i < W.size(); ++i) W[i] = pm1 * pw.pm2(W[i]);
  return W;
}

Field apply_lplus(const Field& f, const Field& potential) {
  check_same_grid(f, potential);
  Field out = radial_laplacian(f);
  for (int i = 0; i < out.size(); ++i) out[i] = -out[i] - potential[i] * f[i];
  return out;
}

Field apply_lplus(const Field& f) { return apply_lplus(f, lplus_potential(f.grid())); }

namespace {

detail::SymTridiag lplus_sturm(const RadialGrid& g, const Field& V) {
  const auto n = static_cast<std::size_t>(g.size());
  const auto up = g.lap_upper();
  const auto lo = g.lap_lower();
  detail::SymTridiag t;
  t.diag.resize(n);
  t.off_sq.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) t.diag[i] = up[i] + lo[i] - V[static_cast<int>(i)];
  t.diag[n - 1] += g.robin();
  for (std::size_t i = 0; i + 1 < n; ++i) t.off_sq[i] = up[i] * lo[i + 1];
  return t;
}

}  // namespace

double lplus_eigenvalue(const GridPtr& grid, int index) {
  return lplus_sturm(*grid, lplus_potential(grid)).eigenvalue(index);
}

EigenPair ground_eigpair(const GridPtr& grid) {
  const auto& g = *grid;
  const int n = g.size();
  if (n < 3) throw EigenFailure("grid too small for the eigen problem");
  const Field V = lplus_potential(grid);
  const auto sturm = lplus_sturm(g, V);
  const auto up = g.lap_upper();
  const auto lo = g.lap_lower();
  const auto un = static_cast<std::size_t>(n);

  std::vector<double> lower(un), diag(un), upper(un), rhs(un), x(un), scratch(un);
  for (std::size_t i = 0; i < un; ++i) {
    lower[i] = -lo[i];
    upper[i] = -up[i];
  }

  // -Lap >= 0, so L+ >= -max V: a shift below that makes L+ - s an M-matrix.
  double shift = -V.max_abs() - 0.1;
  Field v = ground_state_w(grid);
  v *= 1.0 / norm_l2(v);

  EigenPair out;
  double rq = 0.0;
  double res = HUGE_VAL;
  double best_res = HUGE_VAL;
  int stale = 0;
  for (int it = 1; it <= 500; ++it) {
    for (std::size_t i = 0; i < un; ++i) {
      diag[i] = up[i] + lo[i] - V[static_cast<int>(i)] - shift;
      rhs[i] = v[static_cast<int>(i)];
    }
    diag[un - 1] += g.robin();
    detail::thomas_solve(lower, diag, upper, rhs, x, scratch);
    Field y(grid, x);
    y *= 1.0 / norm_l2(y);
    v = std::move(y);

    Field Lv = apply_lplus(v, V);
    rq = inner(Lv, v);
    Lv.axpy(-rq, v);
    res = norm_l2(Lv);
    out.iterations = it;

    if (res < 1e-10 * std::max(1.0, std::abs(rq))) break;
    if (res < best_res * 0.999) {
      best_res = res;
      stale = 0;
    } else if (++stale >= 8 && res < 1e-7) {
      break;  // rounding floor reached
    }

    // Move the shift up towards the eigenvalue while it provably stays below
    // the bottom of the spectrum (Sturm count zero).
    const double candidate = rq - 2.0 * res - 1e-12 * std::abs(rq);
    if (candidate > shift && res < 0.25 * std::abs(rq) && sturm.count_below(candidate) == 0) shift = candidate;
    if (it == 500) throw EigenFailure("shift-invert iteration stagnated after 500 iterations");
  }

  if (!(rq < 0.0)) throw EigenFailure("lowest eigenvalue of L+ is not negative; grid too coarse");

  // Inverse iteration on an M-matrix keeps the iterate positive; enforce the
  // sign convention anyway in case the start vector was ever changed.
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += v[i];
  if (total < 0.0) v *= -1.0;

  // The iterate only carries absolute accuracy, so far out in the tail it sits
  // on a rounding floor. Rebuild the tail from the three-term recurrence,
  // integrated inwards from the wall (the decaying solution is the growing
  // one in that direction), and splice it in where v is still well resolved.
  {
    const double lam = sturm.eigenvalue(0);
    const double vmax = v.max_abs();
    int splice = n - 1;
    while (splice > 0 && std::abs(v[splice]) < 1e-6 * vmax) --splice;
    if (splice < n - 2) {
      std::vector<double> t(un + 1, 0.0);
      t[un - 1] = 1.0;
      for (int i = n - 1; i > splice; --i) {
        const auto ui = static_cast<std::size_t>(i);
        double dg = up[ui] + lo[ui] - V[i] - lam;
        if (i == n - 1) dg += g.robin();
        t[ui - 1] = (dg * t[ui] - up[ui] * t[ui + 1]) / lo[ui];
        if (std::abs(t[ui - 1]) > 1e100)
          for (int j = i - 1; j < n; ++j) t[static_cast<std::size_t>(j)] *= 1e-100;
      }
      const double c = v[splice] / t[static_cast<std::size_t>(splice)];
      for (int i = splice + 1; i < n; ++i) v[i] = c * t[static_cast<std::size_t>(i)];
      v *= 1.0 / norm_l2(v);
      Field Lv = apply_lplus(v, V);
      rq = inner(Lv, v);
      Lv.axpy(-rq, v);
      res = norm_l2(Lv);
    }
  }

  out.k = std::sqrt(-rq);
  out.rho = std::move(v);
  out.residual = res;
  out.second_eigenvalue = sturm.eigenvalue(1);
  out.negative_count = sturm.count_below(-1e-3);
  return out;
}

double sobolev_quotient(const Field& f) {
  const double p = f.grid()->critical_exponent();
  const double grad = gradient_norm_sq(f);
  if (grad <= 0.0) return 0.0;
  return std::pow(lp_norm_pow(f), 1.0 / p) / std::sqrt(grad);
}

double sobolev_constant(const GridPtr& grid) { return sobolev_quotient(ground_state_w(grid)); }

BundlePtr make_bundle(const GridPtr& grid) {
  auto b = std::make_shared<GroundStateBundle>();
  b->grid = grid;
  b->W = ground_state_w(grid);
  auto eig = ground_eigpair(grid);
  b->k = eig.k;
  b->rho = std::move(eig.rho);
  b->eig_residual = eig.residual;
  b->second_eigenvalue = eig.second_eigenvalue;
  b->C_star = sobolev_quotient(b->W);
  b->E_wa_W = energy_wave(State(b->W, Field(grid)));
  b->grad_sq_W = gradient_norm_sq(b->W);
  b->potential = lplus_potential(grid);
  b->s0_rho = scaling_generator(b->rho, 0.0);
  b->s1_s0_rho = scaling_generator(b->s0_rho, 1.0);

  const detail::CriticalPower pw{grid->dim()};
  b->residual_W = -radial_laplacian(b->W);
  double rmax = 0.0;
  for (int i = 0; i < grid->size(); ++i) {
    const double w = b->W[i];
    b->residual_W[i] -= w * pw.pm2(w);
    const double r = grid->node(i);
    if (r >= 1.0 && r <= 0.5 * grid->r_max()) rmax = std::max(rmax, std::abs(b->residual_W[i]));
  }
  b->pde_residual_max = rmax;
  b->lambda1_equilibrium = inner(b->residual_W, b->rho) / (b->k * b->k);
  return b;
}

}  // namespace nlkg
