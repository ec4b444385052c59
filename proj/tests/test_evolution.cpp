#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlkg/errors.hpp"
#include "nlkg/evolution.hpp"
#include "nlkg/functionals.hpp"
#include "nlkg/ground_state.hpp"
#include "oracles.hpp"

using namespace nlkg;

namespace {

double bump(double r, double amp, double R) {
  const double x = r / R;
  return x < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
}

State bump_state(const GridPtr& g, double amp, double R, double vel = 0.0) {
  return State(Field::from_function(g, [=](double r) { return bump(r, amp, R); }),
               Field::from_function(g, [=](double r) { return vel * bump(r, 1.0, R); }));
}

EvolveConfig quiet_config(double mass_sq = 1.0) {
  EvolveConfig c;
  c.mass_sq = mass_sq;
  c.stop_on_fate = false;
  c.frame_stride = 0;
  return c;
}

double hdot_diff(const Field& a, const Field& b) { return std::sqrt(gradient_norm_sq(a - b)); }

// Independent method-of-lines solver on a vertex grid r_j = j h with RK4 in
// time, u_tt = u_rr + (d-1)/r u_r + |u|^{p-2} u, massless, u fixed at r = R.
// Returns the first time max|u| reaches amp_stop.
double rk4_blowup_time(int d, double R, int N, double amp0, double amp_stop, double t_max) {
  const double h = R / N;
  const double p = 2.0 * d / (d - 2.0);
  std::vector<double> u(N + 1), v(N + 1, 0.0);
  for (int j = 0; j <= N; ++j) u[j] = amp0 * oracle::w_value(d, j * h);
  auto rhs = [&](const std::vector<double>& uu, std::vector<double>& acc) {
    acc.assign(N + 1, 0.0);
    acc[0] = d * 2.0 * (uu[1] - uu[0]) / (h * h) + std::pow(std::abs(uu[0]), p - 2) * uu[0];
    for (int j = 1; j < N; ++j) {
      const double r = j * h;
      acc[j] = (uu[j + 1] - 2 * uu[j] + uu[j - 1]) / (h * h) + (d - 1) / r * (uu[j + 1] - uu[j - 1]) / (2 * h) +
               std::pow(std::abs(uu[j]), p - 2) * uu[j];
    }
  };
  const double dt = 0.2 * h;
  std::vector<double> k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, tu(N + 1), tv(N + 1);
  auto stage = [&](const std::vector<double>& du, const std::vector<double>& dv, double c) {
    for (int j = 0; j <= N; ++j) {
      tu[j] = u[j] + c * du[j];
      tv[j] = v[j] + c * dv[j];
    }
  };
  const std::vector<double> zero(N + 1, 0.0);
  for (double t = 0.0; t < t_max; t += dt) {
    stage(zero, zero, 0.0);
    k1u = tv;
    rhs(tu, k1v);
    stage(k1u, k1v, 0.5 * dt);
    k2u = tv;
    rhs(tu, k2v);
    stage(k2u, k2v, 0.5 * dt);
    k3u = tv;
    rhs(tu, k3v);
    stage(k3u, k3v, dt);
    k4u = tv;
    rhs(tu, k4v);
    for (int j = 0; j < N; ++j) {
      u[j] += dt / 6 * (k1u[j] + 2 * k2u[j] + 2 * k3u[j] + k4u[j]);
      v[j] += dt / 6 * (k1v[j] + 2 * k2v[j] + 2 * k3v[j] + k4v[j]);
    }
    double mx = 0.0;
    for (double x : u) mx = std::max(mx, std::abs(x));
    if (mx >= amp_stop) return t + dt;
  }
  return NAN;
}

}  // namespace

TEST(Step, ZeroStaysZeroAndStepsReverse) {
  auto g = make_grid(5, 256, 10.0);
  const double dt = 0.25 * g->dr();
  const State z = step(State::zero(g), dt);
  EXPECT_EQ(norm_l2(z.u1), 0.0);
  EXPECT_EQ(norm_l2(z.u2), 0.0);

  const State s = bump_state(g, 0.5, 4.0, 0.3);
  State t = s;
  for (int k = 0; k < 50; ++k) t = step(t, dt);
  for (int k = 0; k < 50; ++k) t = step(t, -dt);
  EXPECT_LT(oracle::max_abs_diff(t.u1, s.u1), 1e-10);
  EXPECT_LT(oracle::max_abs_diff(t.u2, s.u2), 1e-10);
}

TEST(Step, RejectsUnstableTimeStep) {
  auto g = make_grid(4, 128, 8.0);
  const double too_big = 1.01 * g->stable_cfl() * g->dr();
  EXPECT_THROW(step(State::zero(g), too_big), CFLViolation);
  EXPECT_NO_THROW(step(State::zero(g), 0.99 * g->stable_cfl() * g->dr()));
  EvolveConfig c = quiet_config();
  c.dt_cfl = 1.01 * g->stable_cfl();
  EXPECT_THROW(evolve(State::zero(g), 1.0, c), CFLViolation);
}

TEST(Evolve, GroundStateIsStaticWithoutMass) {
  auto g = make_grid(5, 4096, 100.0);
  const auto W = ground_state_w(g);
  EvolveConfig c = quiet_config(0.0);
  c.frame_stride = 40;
  const auto tr = evolve(State(W, Field(g)), 1.0, c);
  const double hw = std::sqrt(gradient_norm_sq(W));
  for (const auto& f : tr.frames) EXPECT_LE(hdot_diff(f.state.u1, W), 1e-3 * hw) << f.t;
}

TEST(Evolve, MassPullsGroundStateDown) {
  // u_tt = -m^2 W at t = 0, so u(t) - W ~ -t^2/2 W for small t
  auto g = make_grid(5, 4096, 100.0);
  const auto W = ground_state_w(g);
  const auto tr = evolve(State(W, Field(g)), 0.1, quiet_config(1.0));
  const auto& last = tr.frames.back();
  const double t = last.t;
  const Field drift = last.state.u1 - W;
  const Field expect = (-0.5 * t * t) * W;
  EXPECT_LE(norm_l2(drift - expect), 0.02 * norm_l2(expect));
}

TEST(Evolve, EnergyDriftAndTimeReversal) {
  auto g = make_grid(5, 4096, 20.0);
  const State s0 = bump_state(g, 0.3, 4.0, 0.2);
  const auto fwd = evolve(s0, 10.0, quiet_config());
  const auto E = fwd.energy_series();
  double drift = 0.0;
  for (double e : E) drift = std::max(drift, std::abs(e - E.front()));
  EXPECT_LE(drift, 1e-6 * std::abs(E.front()));

  // back along the same path: flip the velocity and run again
  const auto& end = fwd.frames.back().state;
  const auto bwd = evolve(State(end.u1, -1.0 * end.u2), fwd.t_end, quiet_config());
  const auto& back = bwd.frames.back().state;
  const double scale = std::sqrt(gradient_norm_sq(s0.u1) + inner(s0.u2, s0.u2));
  const double err = std::sqrt(gradient_norm_sq(back.u1 - s0.u1) + norm_l2(back.u2 + s0.u2) * norm_l2(back.u2 + s0.u2));
  EXPECT_LE(err, 1e-8 * scale);
}

TEST(Evolve, FinitePropagationSpeed) {
  // production dynamics resolution, r_max = 2 T
  auto g = make_grid(5, 4096, 20.0);
  const double R0 = 5.0, T = 10.0;
  const auto tr = evolve(bump_state(g, 0.5, R0, 0.1), T, quiet_config());
  const auto& st = tr.frames.back().state;
  double leak = 0.0, inside = 0.0;
  for (int i = 0; i < g->size(); ++i) {
    const double r = g->node(i);
    const double a = std::max(std::abs(st.u1[i]), std::abs(st.u2[i]));
    if (r > R0 + tr.t_end + 2 * g->dr())
      leak = std::max(leak, a);
    else
      inside = std::max(inside, a);
  }
  EXPECT_GT(inside, 1e-3);
  EXPECT_LE(leak, 1e-10);
}

TEST(Evolve, SecondOrderConvergence) {
  double q[3];
  const int ns[] = {512, 1024, 2048};
  for (int j = 0; j < 3; ++j) {
    auto g = make_grid(3, ns[j], 20.0);
    const auto tr = evolve(bump_state(g, 0.3, 5.0, 0.2), 2.5, quiet_config());
    // the step counts all divide 2.5 exactly
    ASSERT_NEAR(tr.t_end, 2.5, 1e-12);
    q[j] = tr.scalars.back().mass_sq;
  }
  const double ratio = (q[0] - q[1]) / (q[1] - q[2]);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(Fate, SmallBumpScattersThroughSponge) {
  auto g = make_grid(5, 1024, 40.0);
  EvolveConfig c;
  c.sponge.enabled = true;
  c.fate.interior_radius = 10.0;
  const auto tr = evolve(bump_state(g, 0.1, 4.0), 80.0, c);
  EXPECT_EQ(tr.fate.kind, FateKind::Scatter) << tr.fate.reason;
  EXPECT_GT(tr.scalars.back().absorbed, 0.0);
  // energy plus what the sponge removed is conserved
  const double e0 = tr.scalars.front().E;
  EXPECT_LE(std::abs(tr.scalars.back().E + tr.scalars.back().absorbed - e0), 1e-3 * e0);
  EXPECT_EQ(detect_fate(tr, ThresholdConfig{}).kind, FateKind::Scatter);
}

TEST(Fate, InflatedGroundStateBlowsUpLikeOracle) {
  const int d = 5;
  auto g = make_grid(d, 4096, 40.0);
  const Field u0 = 1.5 * ground_state_w(g);
  ASSERT_LT(k_functional(u0), 0.0);
  EvolveConfig c;
  c.mass_sq = 0.0;
  c.fate.amplitude_blow = 20.0;
  const auto tr = evolve(State(u0, Field(g)), 20.0, c);
  ASSERT_EQ(tr.fate.kind, FateKind::BlowUp) << tr.fate.reason;
  const double t_oracle = rk4_blowup_time(d, 40.0, 800, 1.5, 20.0, 20.0);
  ASSERT_TRUE(std::isfinite(t_oracle));
  EXPECT_NEAR(tr.fate.t_detect / t_oracle, 1.0, 0.1);

  // Payne-Sattinger: the second derivative of ||u||^2 follows the identity
  const auto ps = payne_sattinger_diag(tr);
  ASSERT_GT(ps.size(), 10u);
  for (const auto& p : ps) EXPECT_LE(std::abs(p.residual), 1e-3 * std::max(std::abs(p.rhs), std::abs(p.ypp))) << p.t;
  EXPECT_LT(ps.back().K, 0.0);
}

TEST(Fate, GroundStateInFrameIsTrapped) {
  auto b = make_bundle(make_grid(5, 1024, 50.0));
  EvolveConfig c;
  c.mass_sq = 0.0;
  c.track_modulation = true;
  c.sample_stride = 40;
  const auto tr = evolve(State(b->W, Field(b->grid)), 3.0, c, b);
  EXPECT_EQ(tr.fate.kind, FateKind::Trapped) << tr.fate.reason;
  ASSERT_GE(tr.modulation.size(), 3u);
  for (const auto& m : tr.modulation) EXPECT_TRUE(m.decomposed);
  // modulation tracking needs the bundle
  EXPECT_THROW(evolve(State(b->W, Field(b->grid)), 1.0, c), InvalidArgument);
}

TEST(Virial, ZeroStateAndWholeSpaceIdentity) {
  auto g = make_grid(5, 1024, 40.0);
  EvolveConfig c = quiet_config(0.0);
  c.frame_stride = 4;
  const auto z = evolve(State::zero(g), 1.0, c);
  for (const auto& p : virial_diagnostic(z, 0.0, 1.0)) {
    EXPECT_EQ(p.lhs, 0.0);
    EXPECT_EQ(p.minus_K, 0.0);
  }

  // with the cutoff beyond the grid the pairing's derivative is -K, up to
  // second-order discretisation error
  c.mass_sq = 1.0;
  double worst[2] = {0.0, 0.0};
  for (int j = 0; j < 2; ++j) {
    auto gj = make_grid(5, 1024 << j, 40.0);
    const auto tr = evolve(bump_state(gj, 1.0, 5.0, 0.3), 1.0, c);
    const auto vir = virial_diagnostic(tr, 0.0, 1e4);
    ASSERT_GT(vir.size(), 10u);
    for (const auto& p : vir) {
      EXPECT_LT(p.e_ext, 1e-12);
      worst[j] = std::max(worst[j], std::abs(p.lhs - p.minus_K) / std::abs(p.minus_K));
    }
  }
  EXPECT_LT(worst[0], 5e-3);
  EXPECT_GT(worst[0] / worst[1], 3.5);
  EXPECT_LT(worst[0] / worst[1], 4.5);
}

TEST(ModulationOde, StationaryAndRejectedWindows) {
  auto b = make_bundle(make_grid(5, 1024, 50.0));
  EvolveConfig c;
  c.mass_sq = 0.0;
  c.track_modulation = true;
  c.sample_stride = 20;
  const auto tr = evolve(State(b->W, Field(b->grid)), 2.0, c, b);
  const auto res = modulation_ode_check(tr, *b);
  ASSERT_FALSE(res.empty());
  for (const auto& r : res) {
    EXPECT_EQ(r.res, 0.0);
    EXPECT_LT(std::abs(r.r1), 1e-3);
  }

  Trajectory broken = tr;
  broken.modulation[2].decomposed = false;
  EXPECT_THROW(modulation_ode_check(broken, *b), WindowRejected);
  EXPECT_NO_THROW(modulation_ode_check(broken, *b, 3));
}
