#include "nlkg/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "nlkg/errors.hpp"
#include "nlkg/functionals.hpp"
#include "powers.hpp"

namespace nlkg {

std::string to_string(FateKind k) {
  switch (k) {
    case FateKind::BlowUp: return "BlowUp";
    case FateKind::Scatter: return "Scatter";
    case FateKind::Trapped: return "Trapped";
    case FateKind::Undecided: return "Undecided";
  }
  return "Undecided";
}

FateKind fate_from_string(const std::string& s) {
  if (s == "BlowUp") return FateKind::BlowUp;
  if (s == "Scatter") return FateKind::Scatter;
  if (s == "Trapped") return FateKind::Trapped;
  if (s == "Undecided") return FateKind::Undecided;
  throw InvalidArgument("unknown fate '" + s + "'");
}

std::vector<double> Trajectory::energy_series() const {
  std::vector<double> out;
  out.reserve(scalars.size());
  for (const auto& s : scalars) out.push_back(s.E);
  return out;
}

std::vector<double> Trajectory::mass_series() const {
  std::vector<double> out;
  out.reserve(scalars.size());
  for (const auto& s : scalars) out.push_back(s.mass_sq);
  return out;
}

std::vector<double> Trajectory::K_series() const {
  std::vector<double> out;
  out.reserve(scalars.size());
  for (const auto& s : scalars) out.push_back(s.K);
  return out;
}

const StepScalars& Trajectory::scalars_at(double t) const {
  if (scalars.empty()) throw InvalidArgument("trajectory has no scalars");
  const double idx = dt > 0.0 ? std::round((t - scalars.front().t) / dt) : 0.0;
  const auto i = static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(scalars.size() - 1)));
  return scalars[i];
}

namespace {

void check_cfl(const RadialGrid& g, double dt) {
  const double limit = g.stable_cfl() * g.dr();
  if (!(std::abs(dt) <= limit * (1.0 + 1e-12)))
    throw CFLViolation("time step " + std::to_string(dt) + " exceeds the stability limit " + std::to_string(limit));
}

// In-place velocity Verlet with the force, the energy densities and the
// sponge fused into as few sweeps as possible.
class Integrator {
 public:
  Integrator(const State& s, double dt, double mass_sq, const SpongeConfig& sponge, double interior_radius)
      : g_(*s.grid()),
        grid_(s.grid()),
        pw_{g_.dim()},
        p_(g_.critical_exponent()),
        dt_(dt),
        m2_(mass_sq),
        u_(s.u1.values().begin(), s.u1.values().end()),
        v_(s.u2.values().begin(), s.u2.values().end()),
        f_(u_.size()),
        w_(g_.weights().begin(), g_.weights().end()) {
    const int n = g_.size();
    for (interior_nodes_ = 0; interior_nodes_ < n && g_.node(interior_nodes_) < interior_radius; ++interior_nodes_) {
    }
    for (interior_faces_ = 0; interior_faces_ < n - 1 && (interior_faces_ + 1) * g_.dr() < interior_radius;
         ++interior_faces_) {
    }
    if (sponge.enabled) {
      damp_.assign(u_.size(), 1.0);
      const double start = sponge.start_fraction * g_.r_max();
      const double width = g_.r_max() - start;
      for (int i = 0; i < n; ++i) {
        const double s01 = std::clamp((g_.node(i) - start) / width, 0.0, 1.0);
        const double ramp = s01 * s01 * s01 * (10.0 - 15.0 * s01 + 6.0 * s01 * s01);
        damp_[static_cast<std::size_t>(i)] = std::exp(-sponge.strength * ramp);
      }
    }
    force();
    finish_scalars();
  }

  void advance() {
    const std::size_t n = u_.size();
    const double h = 0.5 * dt_;
    for (std::size_t i = 0; i < n; ++i) {
      v_[i] += h * f_[i];
      u_[i] += dt_ * v_[i];
    }
    force();
    for (std::size_t i = 0; i < n; ++i) v_[i] += h * f_[i];
    if (!damp_.empty()) {
      double removed = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double before = v_[i];
        v_[i] *= damp_[i];
        removed += w_[i] * (before * before - v_[i] * v_[i]);
      }
      absorbed_ += 0.5 * removed;
    }
    finish_scalars();
  }

  StepScalars scalars(double t) const {
    StepScalars s = cur_;
    s.t = t;
    return s;
  }

  State state() const {
    return State(Field(grid_, std::vector<double>(u_)), Field(grid_, std::vector<double>(v_)));
  }

 private:
  void force() {
    radial_laplacian(g_, u_.data(), f_.data());
    const std::size_t n = u_.size();
    double pot_in = 0.0, pot_out = 0.0, mass_in = 0.0, mass_out = 0.0, mx = 0.0;
    const auto ni = static_cast<std::size_t>(interior_nodes_);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = u_[i];
      const double a = pw_.pm2(u);
      f_[i] += (a - m2_) * u;
      const double wu2 = w_[i] * u * u;
      if (i < ni) {
        pot_in += wu2 * a;
        mass_in += wu2;
      } else {
        pot_out += wu2 * a;
        mass_out += wu2;
      }
      mx = std::max(mx, std::abs(u));
      if (!(std::abs(u) <= 1e300)) mx = HUGE_VAL;
    }
    cur_.potential = pot_in + pot_out;
    cur_.mass_sq = mass_in + mass_out;
    cur_.max_abs = mx;
    pot_in_ = pot_in;
    mass_in_ = mass_in;
  }

  void finish_scalars() {
    const std::size_t n = u_.size();
    const auto ni = static_cast<std::size_t>(interior_nodes_);
    double kin_in = 0.0, kin_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wv2 = w_[i] * v_[i] * v_[i];
      if (i < ni)
        kin_in += wv2;
      else
        kin_out += wv2;
    }
    const auto face = g_.face_weights();
    const auto nf = static_cast<std::size_t>(interior_faces_);
    double grad_in = 0.0, grad_out = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double q = u_[i + 1] - u_[i];
      if (i < nf)
        grad_in += face[i] * q * q;
      else
        grad_out += face[i] * q * q;
    }
    grad_out += g_.boundary_weight() * u_[n - 1] * u_[n - 1];
    cur_.kinetic_sq = kin_in + kin_out;
    cur_.grad_sq = grad_in + grad_out;
    cur_.K = cur_.grad_sq - cur_.potential;
    cur_.E = 0.5 * cur_.kinetic_sq + 0.5 * cur_.grad_sq + 0.5 * m2_ * cur_.mass_sq - cur_.potential / p_;
    cur_.interior_E = kin_in + grad_in + m2_ * mass_in_ + pot_in_;
    cur_.absorbed = absorbed_;
  }

  const RadialGrid& g_;
  GridPtr grid_;
  detail::CriticalPower pw_;
  double p_;
  double dt_;
  double m2_;
  std::vector<double> u_, v_, f_, w_, damp_;
  int interior_nodes_ = 0;
  int interior_faces_ = 0;
  double absorbed_ = 0.0;
  double pot_in_ = 0.0;
  double mass_in_ = 0.0;
  StepScalars cur_;
};

// Shared by evolve (online) and detect_fate (replay).
class FateDetector {
 public:
  explicit FateDetector(const FateConfig& cfg) : cfg_(cfg) {}

  // Returns true once a fate has been decided.
  bool on_scalars(const StepScalars& s) {
    if (decided_) return true;
    if (!have_e0_) {
      e0_ = s.E;
      have_e0_ = true;
    }
    const double defect = std::abs(s.E + s.absorbed - e0_);
    const bool nonfinite = !std::isfinite(s.E) || !std::isfinite(s.max_abs);
    if (nonfinite || s.max_abs >= cfg_.amplitude_blow || defect > cfg_.energy_defect * std::abs(e0_)) {
      fate_.kind = FateKind::BlowUp;
      fate_.t_detect = s.t;
      fate_.reason = nonfinite ? "non-finite values" : s.max_abs >= cfg_.amplitude_blow ? "amplitude threshold"
                                                                                         : "energy defect";
      fate_.evidence["max_abs"] = s.max_abs;
      fate_.evidence["energy_defect"] = std::isfinite(defect) ? defect : HUGE_VAL;
      fate_.evidence["K"] = s.K;
      decided_ = true;
      return true;
    }
    const bool quiet = s.interior_E <= cfg_.eps_scatter * std::abs(e0_) && s.K > 0.0;
    if (!quiet) {
      quiet_since_ = NAN;
    } else if (std::isnan(quiet_since_)) {
      quiet_since_ = s.t;
    } else if (s.t - quiet_since_ >= cfg_.scatter_window) {
      fate_.kind = FateKind::Scatter;
      fate_.t_detect = s.t;
      fate_.reason = "interior energy below threshold with K > 0 over the window";
      fate_.evidence["interior_E"] = s.interior_E;
      fate_.evidence["threshold"] = cfg_.eps_scatter * std::abs(e0_);
      fate_.evidence["window_start"] = quiet_since_;
      fate_.evidence["K"] = s.K;
      decided_ = true;
      return true;
    }
    return false;
  }

  Fate finish(const std::vector<ModulationSample>& mod, const ThresholdConfig& th, double t_end) {
    if (decided_) return fate_;
    Fate f;
    f.evidence["t_end"] = t_end;
    if (mod.size() >= 2) {
      double worst = 0.0;
      bool all_in = true;
      for (const auto& m : mod) {
        worst = std::max(worst, m.d_tilde);
        all_in = all_in && std::isfinite(m.d_tilde) && m.d_tilde <= th.delta_f;
      }
      f.evidence["max_d_tilde"] = worst;
      if (all_in) {
        f.kind = FateKind::Trapped;
        f.t_detect = t_end;
        f.reason = "nonlinear distance stayed below delta_f";
        return f;
      }
    }
    f.reason = "no criterion met before t_final";
    return f;
  }

 private:
  FateConfig cfg_;
  bool decided_ = false;
  bool have_e0_ = false;
  double e0_ = 0.0;
  double quiet_since_ = NAN;
  Fate fate_;
};

ModulationSample sample_modulation(const State& s, const GroundStateBundle& b, const ThresholdConfig& th,
                                   double sigma_guess, double mass_sq, double t, double K, double mass) {
  ModulationSample m;
  m.t = t;
  m.K = K;
  m.u_l2 = std::sqrt(mass_sq * mass);
  const auto rep = nonlinear_distance_report(s, b, th, sigma_guess);
  m.d0 = rep.d0;
  m.d_s = rep.d_s;
  m.d_tilde = rep.d_tilde;
  if (rep.decomposition) {
    const auto& dec = *rep.decomposition;
    m.decomposed = true;
    m.sigma = dec.sigma;
    m.lambda1 = dec.lambda1;
    m.lambda2 = dec.lambda2;
    m.lambda_plus = dec.lambda_plus;
    m.lambda_minus = dec.lambda_minus;
    m.gamma_norm = dec.gamma_norm;
    m.v_norm = dec.v_norm;
    const Field wv = b.W + dec.v1;
    m.w_rho = inner(wv, b.rho);
    m.drift_pairing = inner(scaling_generator(wv, -1.0), b.rho);
  } else {
    m.sigma = sigma_guess;
  }
  return m;
}

}  // namespace

State step(const State& s, double dt, double mass_sq) {
  check_cfl(*s.grid(), dt);
  Integrator it(s, dt, mass_sq, SpongeConfig{}, 0.0);
  it.advance();
  return it.state();
}

Trajectory evolve(const State& s, double t_final, const EvolveConfig& cfg, const BundlePtr& bundle,
                  const std::vector<Observer>& observers) {
  const auto& g = *s.grid();
  if (!(t_final >= 0.0)) throw InvalidArgument("t_final must be non-negative");
  if (!s.all_finite()) throw InvalidArgument("initial state has non-finite values");
  if (cfg.sample_stride <= 0) throw InvalidArgument("sample_stride must be positive");
  const double dt = cfg.dt_cfl * g.dr();
  check_cfl(g, dt);
  if (cfg.track_modulation && !bundle) throw InvalidArgument("modulation tracking needs a ground-state bundle");

  Trajectory traj;
  traj.grid = s.grid();
  traj.dt = dt;
  traj.mass_sq = cfg.mass_sq;
  traj.frame_sigma = cfg.frame_sigma;
  traj.fate_config = cfg.fate;

  const long nsteps = t_final > 0.0 ? static_cast<long>(std::ceil(t_final / dt - 1e-9)) : 0;
  traj.scalars.reserve(static_cast<std::size_t>(nsteps + 1));

  Integrator integ(s, dt, cfg.mass_sq, cfg.sponge, cfg.fate.interior_radius);
  FateDetector detector(cfg.fate);
  double sigma_guess = 0.0;
  double tau = 0.0;

  auto record_sample = [&](double t, const State& st, const StepScalars& sc) {
    for (const auto& obs : observers) obs(t, st);
    if (!cfg.track_modulation) return;
    auto m = sample_modulation(st, *bundle, cfg.thresholds, sigma_guess, cfg.mass_sq, t, sc.K, sc.mass_sq);
    if (!traj.modulation.empty()) {
      const auto& prev = traj.modulation.back();
      tau += 0.5 * (std::exp(prev.sigma) + std::exp(m.sigma)) * (t - prev.t);
    }
    m.tau = tau;
    if (m.decomposed) sigma_guess = m.sigma;
    traj.modulation.push_back(std::move(m));
  };

  {
    const auto sc = integ.scalars(0.0);
    traj.scalars.push_back(sc);
    traj.frames.push_back({0.0, 0, s});
    record_sample(0.0, s, sc);
    detector.on_scalars(sc);
  }

  long last_frame = 0;
  bool stopped = false;
  for (long k = 1; k <= nsteps; ++k) {
    integ.advance();
    const double t = static_cast<double>(k) * dt;
    const auto sc = integ.scalars(t);
    traj.scalars.push_back(sc);
    const bool decided = detector.on_scalars(sc);
    const bool blew = decided && !std::isfinite(sc.max_abs);
    const bool want_frame = cfg.frame_stride > 0 && k % cfg.frame_stride == 0;
    const bool want_sample = k % cfg.sample_stride == 0;
    if ((want_frame || want_sample) && !blew) {
      State st = integ.state();
      if (want_sample && st.all_finite()) record_sample(t, st, sc);
      if (want_frame) {
        traj.frames.push_back({t, k, std::move(st)});
        last_frame = k;
      }
    }
    if (decided && cfg.stop_on_fate) {
      traj.t_end = t;
      stopped = true;
      break;
    }
    traj.t_end = t;
  }
  const long last_step = static_cast<long>(traj.scalars.size()) - 1;
  if (last_frame != last_step) {
    State st = integ.state();
    traj.frames.push_back({traj.t_end, last_step, std::move(st)});
  }
  (void)stopped;
  traj.fate = detector.finish(traj.modulation, cfg.thresholds, traj.t_end);
  return traj;
}

Fate detect_fate(const Trajectory& traj, const ThresholdConfig& th) {
  FateDetector det(traj.fate_config);
  for (const auto& s : traj.scalars)
    if (det.on_scalars(s)) break;
  // Only samples up to the detection time take part, matching the online run.
  return det.finish(traj.modulation, th, traj.scalars.empty() ? 0.0 : traj.scalars.back().t);
}

std::vector<VirialPoint> virial_diagnostic(const Trajectory& traj, double t2, double m) {
  std::vector<VirialPoint> out;
  const auto& frames = traj.frames;
  if (frames.size() < 3) return out;
  const auto& g = *traj.grid;
  auto pairing = [&](const Frame& f) -> double {
    const double radius = f.t - t2 + m;
    if (!(radius > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    Field wu2 = f.state.u2;
    for (int i = 0; i < g.size(); ++i) wu2[i] *= cutoff_chi(g.node(i) / radius);
    return inner(scaling_generator(f.state.u1, 0.0), wu2);
  };
  std::vector<double> P(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) P[j] = pairing(frames[j]);
  for (std::size_t j = 1; j + 1 < frames.size(); ++j) {
    if (!std::isfinite(P[j - 1]) || !std::isfinite(P[j + 1])) continue;
    if (!frames[j].state.all_finite()) break;
    VirialPoint vp;
    vp.t = frames[j].t;
    vp.lhs = (P[j + 1] - P[j - 1]) / (frames[j + 1].t - frames[j - 1].t);
    vp.minus_K = -k_functional(frames[j].state.u1);
    vp.radius = frames[j].t - t2 + m;
    vp.e_ext = exterior_energy(frames[j].state, vp.radius, ExteriorVariant::Positive, traj.mass_sq);
    out.push_back(vp);
  }
  return out;
}

double virial_constant(const std::vector<VirialPoint>& series, double floor) {
  double c = 0.0;
  for (const auto& p : series) c = std::max(c, std::abs(p.lhs - p.minus_K) / (p.e_ext + floor));
  return c;
}

std::vector<PayneSattingerPoint> payne_sattinger_diag(const Trajectory& traj) {
  std::vector<PayneSattingerPoint> out;
  const auto& sc = traj.scalars;
  if (sc.size() < 3) return out;
  const double dt = traj.dt;
  for (std::size_t j = 1; j + 1 < sc.size(); ++j) {
    if (!std::isfinite(sc[j + 1].E) || !std::isfinite(sc[j + 1].mass_sq)) break;
    PayneSattingerPoint p;
    p.t = sc[j].t;
    p.y = sc[j].mass_sq;
    p.ypp = (sc[j + 1].mass_sq - 2.0 * sc[j].mass_sq + sc[j - 1].mass_sq) / (dt * dt);
    p.rhs = 2.0 * sc[j].kinetic_sq - 2.0 * sc[j].K - 2.0 * traj.mass_sq * sc[j].mass_sq;
    p.residual = p.ypp - p.rhs;
    p.K = sc[j].K;
    out.push_back(p);
  }
  return out;
}

std::vector<ModulationResidual> modulation_ode_check(const Trajectory& traj, const GroundStateBundle& b,
                                                     std::size_t first, std::size_t last, double gamma_floor) {
  std::vector<ModulationResidual> out;
  const auto& mod = traj.modulation;
  if (mod.empty()) return out;
  last = std::min(last, mod.size() - 1);
  if (first > last) return out;
  for (std::size_t j = first; j <= last; ++j)
    if (!mod[j].decomposed)
      throw WindowRejected("decomposition failed at t = " + std::to_string(mod[j].t) + " inside the window");
  for (std::size_t j = first + 1; j + 1 <= last; ++j) {
    const auto& a = mod[j - 1];
    const auto& c = mod[j + 1];
    const auto& m = mod[j];
    ModulationResidual r;
    r.t = m.t;
    r.tau = m.tau;
    const double dtau = c.tau - a.tau;
    r.dlambda1_dtau = (c.lambda1 - a.lambda1) / dtau;
    r.dsigma_dtau = (c.sigma - a.sigma) / dtau;
    r.lambda2 = m.lambda2;
    r.res = traj.mass_sq * std::exp(-2.0 * m.sigma) * m.w_rho / b.k;
    r.r1 = r.dlambda1_dtau - r.lambda2 - r.res;
    r.r_sigma = std::abs(r.dsigma_dtau) / std::max(m.gamma_norm, gamma_floor);
    r.drift = -r.dsigma_dtau * m.drift_pairing;
    out.push_back(r);
  }
  return out;
}

}  // namespace nlkg
