#include "nlkg/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "nlkg/errors.hpp"
#include "nlkg/functionals.hpp"

namespace nlkg {

std::string to_string(Section9Kind k) {
  switch (k) {
    case Section9Kind::PlusUnstable: return "PlusUnstable";
    case Section9Kind::MinusUnstable: return "MinusUnstable";
    case Section9Kind::PlusVelocity: return "PlusVelocity";
    case Section9Kind::MinusVelocity: return "MinusVelocity";
  }
  return "?";
}

Section9Kind section9_kind_from_string(const std::string& s) {
  for (auto k : kAllSection9Kinds)
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown data kind '" + s + "'");
}

std::string to_string(EnergyClass c) {
  switch (c) {
    case EnergyClass::BelowThreshold: return "below";
    case EnergyClass::SlightlyAbove: return "slightly_above";
    case EnergyClass::Other: return "other";
  }
  return "?";
}

double auto_sigma0(const GroundStateBundle& b, double beta) {
  const double mass = inner(b.W, b.W);
  return 0.5 * std::log(10.0 * mass / (beta * beta));
}

Section9Data build_section9_data(const Section9Spec& spec, const GroundStateBundle& b, const ThresholdConfig& th) {
  if (!(spec.beta > 0.0) || !(spec.beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  const auto& g = b.grid;
  const int d = g->dim();
  const double mass = inner(b.W, b.W);

  Section9Data out;
  if (std::isnan(spec.sigma0)) {
    out.sigma0 = auto_sigma0(b, spec.beta);
  } else {
    out.sigma0 = spec.sigma0;
    const double lhs = std::exp(-2.0 * out.sigma0) * mass;
    const double bound = spec.beta * spec.beta / 10.0;
    if (!(lhs <= bound * (1.0 + 1e-9)))
      throw ScaleBoundViolated("sigma0 = " + std::to_string(out.sigma0) + " gives e^{-2 sigma0} |W|^2 = " +
                               std::to_string(lhs) + " above beta^2/10 = " + std::to_string(bound));
  }
  out.mass_sq = std::exp(-2.0 * out.sigma0);

  double l1 = 0.0, l2 = 0.0;
  switch (spec.kind) {
    case Section9Kind::PlusUnstable: l1 = spec.beta; break;
    case Section9Kind::MinusUnstable: l1 = -spec.beta; break;
    case Section9Kind::PlusVelocity: l2 = spec.beta; break;
    case Section9Kind::MinusVelocity: l2 = -spec.beta; break;
  }

  Field u1 = b.W + l1 * b.rho;
  Field u2 = l2 * b.rho;
  if (d == 3) {
    if (!(spec.R_cut > 0.0)) throw InvalidArgument("d = 3 needs a positive R_cut");
    Field tail = Field::from_function(g, [&](double r) { return (1.0 - cutoff_chi(r / spec.R_cut)) * ground_state_value(3, r); });
    out.tail_energy = gradient_norm_sq(tail);
    if (out.tail_energy > spec.beta * spec.beta)
      throw TailBoundViolated("tail energy " + std::to_string(out.tail_energy) + " exceeds beta^2 = " +
                              std::to_string(spec.beta * spec.beta) + " at R_cut = " + std::to_string(spec.R_cut));
    // the removed tail is projected off rho so that lambda stays as prescribed
    u1 -= tail;
    u1.axpy(inner(tail, b.rho), b.rho);
  }
  out.state = State(std::move(u1), std::move(u2));
  out.check = decompose(out.state, b, 0.0, th);
  return out;
}

Trajectory simulate(const Section9Data& data, const BundlePtr& b, const EvolveConfig& cfg, double t_final) {
  EvolveConfig c = cfg;
  c.mass_sq = data.mass_sq;
  c.frame_sigma = data.sigma0;
  c.track_modulation = true;
  return evolve(data.state, t_final, c, b);
}

namespace {

struct ExpFit {
  double rate = 0.0;
  std::array<double, 3> coef{};
  double ssr = HUGE_VAL;
};

// Least squares for y ~ c0 e^{rate t} + c1 e^{-rate t} + c2 by modified
// Gram-Schmidt on the three columns.
ExpFit fit_fixed_rate(const std::vector<double>& t, const std::vector<double>& y, double rate) {
  const std::size_t m = t.size();
  std::array<std::vector<double>, 3> q;
  for (auto& c : q) c.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    q[0][i] = std::exp(rate * t[i]);
    q[1][i] = std::exp(-rate * t[i]);
    q[2][i] = 1.0;
  }
  double R[3][3] = {};
  std::vector<double> res = y;
  std::array<double, 3> qy{};
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < j; ++i) {
      double dot = 0.0;
      for (std::size_t s = 0; s < m; ++s) dot += q[i][s] * q[j][s];
      R[i][j] = dot;
      for (std::size_t s = 0; s < m; ++s) q[j][s] -= dot * q[i][s];
    }
    double nrm = 0.0;
    for (double v : q[j]) nrm += v * v;
    nrm = std::sqrt(nrm);
    R[j][j] = nrm;
    if (nrm > 0.0)
      for (double& v : q[j]) v /= nrm;
    double dot = 0.0;
    for (std::size_t s = 0; s < m; ++s) dot += q[j][s] * res[s];
    qy[j] = dot;
    for (std::size_t s = 0; s < m; ++s) res[s] -= dot * q[j][s];
  }
  ExpFit f;
  f.rate = rate;
  for (int j = 2; j >= 0; --j) {
    double acc = qy[j];
    for (int i = j + 1; i < 3; ++i) acc -= R[j][i] * f.coef[i];
    f.coef[j] = R[j][j] > 1e-300 ? acc / R[j][j] : 0.0;
  }
  f.ssr = 0.0;
  for (double v : res) f.ssr += v * v;
  return f;
}

ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y) {
  const int scan = 240;
  const double lo = std::log(0.02), hi = std::log(6.0);
  int best = 0;
  ExpFit best_fit;
  for (int j = 0; j < scan; ++j) {
    const auto f = fit_fixed_rate(t, y, std::exp(lo + (hi - lo) * j / (scan - 1)));
    if (f.ssr < best_fit.ssr) {
      best_fit = f;
      best = j;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / (scan - 1);
  double c = lo + (hi - lo) * std::min(scan - 1, best + 1) / (scan - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  auto f1 = fit_fixed_rate(t, y, std::exp(x1)), f2 = fit_fixed_rate(t, y, std::exp(x2));
  for (int it = 0; it < 100 && c - a > 1e-12; ++it) {
    if (f1.ssr < f2.ssr) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - gr * (c - a);
      f1 = fit_fixed_rate(t, y, std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (c - a);
      f2 = fit_fixed_rate(t, y, std::exp(x2));
    }
  }
  const auto& f = f1.ssr < f2.ssr ? f1 : f2;
  return f.ssr < best_fit.ssr ? f : best_fit;
}

double log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(std::abs(y[i]) > 0.0)) continue;
    const double ly = std::log(std::abs(y[i]));
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mm = static_cast<double>(m);
  return (mm * sty - st * sy) / (mm * stt - st * st);
}

}  // namespace

EjectionReport analyze_ejection(const Trajectory& traj, const GroundStateBundle& b, const ThresholdConfig& th,
                                double beta) {
  const auto& mod = traj.modulation;
  if (mod.empty() || !mod.front().decomposed) throw WindowTooShort("no decomposed samples at the start of the run");
  const double upper = 0.5 * th.delta_f;
  std::size_t last = 0;
  while (last + 1 < mod.size() && mod[last + 1].decomposed && mod[last + 1].d_tilde <= upper) ++last;

  EjectionReport rep;
  rep.k_reference = b.k;
  rep.first = 0;
  rep.last = last;
  rep.samples = last + 1;
  rep.tau_lo = mod.front().tau;
  rep.tau_hi = mod[last].tau;
  if (rep.samples < 8)
    throw WindowTooShort("only " + std::to_string(rep.samples) + " samples inside the validity band");

  std::vector<double> tau, l1, lp;
  double l1_max = 0.0;
  for (std::size_t j = 0; j <= last; ++j) {
    tau.push_back(mod[j].tau - rep.tau_lo);
    l1.push_back(mod[j].lambda1);
    lp.push_back(mod[j].lambda_plus);
    l1_max = std::max(l1_max, std::abs(mod[j].lambda1));
  }
  const auto fit = fit_exponential(tau, l1);
  rep.fitted_rate = fit.rate;
  rep.fit_a = fit.coef[0];
  rep.fit_b = fit.coef[1];
  rep.fit_c = fit.coef[2];
  double mean = 0.0;
  for (double v : l1) mean += v;
  mean /= static_cast<double>(l1.size());
  double sst = 0.0;
  for (double v : l1) sst += (v - mean) * (v - mean);
  rep.growth_r2 = sst > 0.0 ? 1.0 - fit.ssr / sst : 0.0;
  rep.rate_rel_err = std::abs(rep.fitted_rate - b.k) / b.k;
  rep.plus_rate = log_slope(tau, lp);

  if (rep.fitted_rate * (rep.tau_hi - rep.tau_lo) < 1.0)
    throw WindowTooShort("validity band spans tau in [" + std::to_string(rep.tau_lo) + ", " +
                         std::to_string(rep.tau_hi) + "], less than one e-folding at rate " +
                         std::to_string(rep.fitted_rate));

  int sign = 0;
  for (double v : l1) {
    if (std::abs(v) < 1e-3 * l1_max) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) rep.sign_constant = false;
  }

  // first sample from which sign(K) = -sign(lambda1) holds to the window's end
  for (std::size_t j = last + 1; j-- > 0;) {
    if (mod[j].K * mod[j].lambda1 < 0.0)
      rep.K_sign_flip_tau = mod[j].tau;
    else
      break;
  }

  for (std::size_t j = 0; j <= last; ++j) {
    const double e = std::exp(2.0 * b.k * (mod[j].tau - rep.tau_lo));
    rep.bound_ratio = std::max(rep.bound_ratio, (mod[j].gamma_norm + mod[j].u_l2) / (beta + beta * beta * e));
  }
  return rep;
}

EjectionRun run_ejection(const Section9Spec& spec, const BundlePtr& b, const EjectionConfig& cfg) {
  EjectionRun run;
  run.data = build_section9_data(spec, *b, cfg.evolve.thresholds);
  run.trajectory = simulate(run.data, b, cfg.evolve, cfg.t_final);
  try {
    run.report = analyze_ejection(run.trajectory, *b, cfg.evolve.thresholds,
                                  cfg.beta_eff > 0.0 ? cfg.beta_eff : spec.beta);
  } catch (const Error& e) {
    run.error = e.what();
  }
  return run;
}

const FateRow& FateTable::row(Section9Kind k) const {
  for (const auto& r : rows)
    if (r.kind == k) return r;
  throw InvalidArgument("fate table has no row " + to_string(k));
}

ClassifyConfig default_classify_config() {
  ClassifyConfig c;
  c.evolve.sponge.enabled = true;
  c.evolve.frame_stride = 0;
  c.evolve.sample_stride = 20;
  return c;
}

FateTable classify_fates(const ClassifyConfig& cfg) {
  const auto b = make_bundle(make_grid(cfg.dim, cfg.n, cfg.r_max));
  return classify_fates(cfg, b);
}

namespace {

Fate settle(Fate f) {
  if (f.kind == FateKind::Trapped) {
    f.kind = FateKind::Undecided;
    f.reason = "trapped near the soliton family until t_final: " + f.reason;
  }
  return f;
}

double one_pass_min(const Trajectory& traj, const ThresholdConfig& th) {
  try {
    return one_pass_probe(traj, th).min_after;
  } catch (const NoCrossingFound&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

FateTable classify_fates(const ClassifyConfig& cfg, const BundlePtr& b) {
  FateTable table;
  table.dim = b->grid->dim();
  table.n = b->grid->size();
  table.r_max = b->grid->r_max();
  table.beta = cfg.beta;
  table.dt_cfl = cfg.evolve.dt_cfl;
  const auto& th = cfg.evolve.thresholds;
  for (auto kind : kAllSection9Kinds) {
    FateRow row;
    row.kind = kind;
    try {
      Section9Spec spec;
      spec.kind = kind;
      spec.beta = cfg.beta;
      const auto data = build_section9_data(spec, *b, th);
      row.energy = energy(data.state, data.mass_sq);
      row.energy_gap = row.energy - b->E_wa_W;
      if (row.energy_gap < 0.0)
        row.energy_class = EnergyClass::BelowThreshold;
      else if (row.energy_gap < th.eps_star * th.eps_star)
        row.energy_class = EnergyClass::SlightlyAbove;

      const auto fwd = simulate(data, b, cfg.evolve, cfg.t_final);
      row.forward = settle(fwd.fate);
      row.one_pass_min_forward = one_pass_min(fwd, th);

      Section9Data rev = data;
      rev.state.u2 *= -1.0;
      const auto bwd = simulate(rev, b, cfg.evolve, cfg.t_final);
      row.backward = settle(bwd.fate);
      row.one_pass_min_backward = one_pass_min(bwd, th);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.forward.reason = row.backward.reason = row.error;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

OnePassReport one_pass_probe(const Trajectory& traj, const ThresholdConfig& th) {
  const auto& mod = traj.modulation;
  bool seen_below = false;
  std::size_t cross = mod.size();
  for (std::size_t j = 0; j < mod.size(); ++j) {
    const double v = mod[j].d_tilde;
    if (!std::isfinite(v)) continue;
    if (v < th.delta_b) {
      seen_below = true;
    } else if (seen_below) {
      cross = j;
      break;
    }
  }
  if (cross == mod.size()) throw NoCrossingFound("d_tilde never crossed delta_b upwards");
  OnePassReport rep;
  rep.t_cross = mod[cross].t;
  rep.min_after = HUGE_VAL;
  for (std::size_t j = cross; j < mod.size(); ++j) {
    if (!std::isfinite(mod[j].d_tilde)) continue;
    rep.min_after = std::min(rep.min_after, mod[j].d_tilde);
    ++rep.samples_after;
  }
  rep.passed = rep.min_after >= th.delta_b;
  return rep;
}

SweepConfig default_sweep_config() {
  SweepConfig c;
  c.evolve.sponge.enabled = true;
  c.evolve.frame_stride = 0;
  c.evolve.sample_stride = 10;
  return c;
}

std::vector<SweepPoint> sweep_grid(const std::vector<Section9Kind>& kinds, const std::vector<double>& betas,
                                   const std::vector<double>& sigma0s, const std::vector<int>& dims,
                                   const std::vector<int>& ns) {
  std::vector<SweepPoint> out;
  const std::vector<double> auto_sigma{std::numeric_limits<double>::quiet_NaN()};
  const auto& sig = sigma0s.empty() ? auto_sigma : sigma0s;
  for (auto k : kinds)
    for (double beta : betas)
      for (double s0 : sig)
        for (int d : dims)
          for (int n : ns) out.push_back({k, beta, s0, d, n});
  return out;
}

std::vector<SweepRow> sweep(const std::vector<SweepPoint>& points, const SweepConfig& cfg) {
  std::vector<SweepRow> rows(points.size());
  auto run_point = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.index = i;
    row.point = points[i];
    try {
      const auto b = make_bundle(make_grid(row.point.dim, row.point.n, cfg.r_max));
      row.k = b->k;
      Section9Spec spec;
      spec.kind = row.point.kind;
      spec.beta = row.point.beta;
      spec.sigma0 = row.point.sigma0;
      EjectionConfig ec;
      ec.evolve = cfg.evolve;
      ec.t_final = cfg.t_final;
      const auto run = run_ejection(spec, b, ec);
      row.fate = run.trajectory.fate.kind;
      row.t_detect = run.trajectory.fate.t_detect;
      row.one_pass_min = one_pass_min(run.trajectory, cfg.evolve.thresholds);
      if (run.report) {
        row.fitted_rate = run.report->fitted_rate;
        row.rate_rel_err = run.report->rate_rel_err;
      } else {
        row.error = run.error;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
  if (points.empty()) return rows;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) run_point(i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace nlkg
