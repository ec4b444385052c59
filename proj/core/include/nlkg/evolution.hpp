#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nlkg/ground_state.hpp"
#include "nlkg/modulation.hpp"
#include "nlkg/radial_grid.hpp"

namespace nlkg {

struct SpongeConfig {
  bool enabled = false;
  double start_fraction = 0.9;  // ramp starts at start_fraction * r_max
  double strength = 0.1;        // damping rate at the wall is strength / dt
};

struct FateConfig {
  double amplitude_blow = 1e3;
  double energy_defect = 0.1;     // relative, sponge losses accounted for
  double interior_radius = 20.0;
  double eps_scatter = 0.05;      // interior energy threshold relative to |E(0)|
  double scatter_window = 10.0;
};

enum class FateKind { BlowUp, Scatter, Trapped, Undecided };
std::string to_string(FateKind k);
FateKind fate_from_string(const std::string& s);

struct Fate {
  FateKind kind = FateKind::Undecided;
  double t_detect = std::numeric_limits<double>::quiet_NaN();
  std::string reason;
  std::map<std::string, double> evidence;
};

// Scalars recorded after every step (and at t = 0).
struct StepScalars {
  double t = 0.0;
  double E = 0.0;
  double mass_sq = 0.0;     // ||u||^2
  double kinetic_sq = 0.0;  // ||u_t||^2
  double grad_sq = 0.0;
  double potential = 0.0;   // integral of |u|^{2*}
  double K = 0.0;
  double max_abs = 0.0;
  double interior_E = 0.0;  // positive densities inside the fate radius
  double absorbed = 0.0;    // energy removed by the sponge so far
};

// Soliton-frame coordinates sampled along a run.
struct ModulationSample {
  double t = 0.0;
  double tau = 0.0;  // integral of e^{sigma} dt
  bool decomposed = false;
  double sigma = 0.0;  // frame value; the physical scale adds Trajectory::frame_sigma
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double gamma_norm = 0.0;
  double v_norm = 0.0;
  double w_rho = 0.0;  // <W + v1, rho>
  double drift_pairing = 0.0;  // <S'_{-1}(W + v1), rho>
  double d0 = 0.0;
  double d_s = 0.0;
  double d_tilde = 0.0;
  double K = 0.0;
  double u_l2 = 0.0;  // ||u|| in physical units, m * ||u_frame||
};

struct Frame {
  double t = 0.0;
  long step = 0;
  State state;
};

struct EvolveConfig {
  double dt_cfl = 0.25;
  double mass_sq = 1.0;
  SpongeConfig sponge;
  int frame_stride = 10;   // 0 keeps only the first and the last frame
  int sample_stride = 10;  // observers and modulation samples
  bool track_modulation = false;
  bool stop_on_fate = true;
  ThresholdConfig thresholds;
  FateConfig fate;
  double frame_sigma = 0.0;  // sigma_0 of the soliton frame, for reporting
};

struct Trajectory {
  GridPtr grid;
  double dt = 0.0;
  double mass_sq = 1.0;
  double frame_sigma = 0.0;
  FateConfig fate_config;
  std::vector<Frame> frames;
  std::vector<StepScalars> scalars;
  std::vector<ModulationSample> modulation;
  Fate fate;
  double t_end = 0.0;
  bool cfl_ok = true;

  std::vector<double> energy_series() const;
  std::vector<double> mass_series() const;
  std::vector<double> K_series() const;
  const StepScalars& scalars_at(double t) const;  // nearest recorded step
};

using Observer = std::function<void(double t, const State& s)>;

// One Stormer-Verlet step of u_tt = Lap u - m^2 u + |u|^{2*-2} u.
// Throws CFLViolation if |dt| exceeds grid.stable_cfl() * dr.
State step(const State& s, double dt, double mass_sq = 1.0);

// Time-stepping driver. With a bundle and track_modulation, every
// sample_stride steps the state is decomposed and the distances recorded.
Trajectory evolve(const State& s, double t_final, const EvolveConfig& cfg, const BundlePtr& bundle = nullptr,
                  const std::vector<Observer>& observers = {});

Fate detect_fate(const Trajectory& traj, const ThresholdConfig& th);

struct VirialPoint {
  double t = 0.0;
  double lhs = 0.0;      // d/dt <S'_0 u, w u_t> by centred differences
  double minus_K = 0.0;
  double e_ext = 0.0;    // positive exterior energy at radius t - t2 + m
  double radius = 0.0;
};
std::vector<VirialPoint> virial_diagnostic(const Trajectory& traj, double t2, double m);
// Largest |lhs + (-K)... | / e_ext ratio, i.e. max of |LHS + K| / (E_ext + floor).
double virial_constant(const std::vector<VirialPoint>& series, double floor);

struct PayneSattingerPoint {
  double t = 0.0;
  double y = 0.0;
  double ypp = 0.0;       // centred second difference of ||u||^2
  double rhs = 0.0;       // 2||u_t||^2 - 2K - 2 m^2 ||u||^2
  double residual = 0.0;  // ypp - rhs
  double K = 0.0;
};
std::vector<PayneSattingerPoint> payne_sattinger_diag(const Trajectory& traj);

struct ModulationResidual {
  double t = 0.0;
  double tau = 0.0;
  double dlambda1_dtau = 0.0;
  double lambda2 = 0.0;
  double res = 0.0;  // e^{-2 sigma} <W + v1, rho> / k in frame units
  double r1 = 0.0;   // dlambda1/dtau - lambda2 - res
  double dsigma_dtau = 0.0;
  double r_sigma = 0.0;  // |dsigma/dtau| / max(||gamma||, floor)
  double drift = 0.0;    // -dsigma/dtau <S'_{-1}(W+v1), rho>
};
// Samples with index in [first, last] are used; throws WindowRejected if a
// decomposition in the window failed.
std::vector<ModulationResidual> modulation_ode_check(const Trajectory& traj, const GroundStateBundle& b,
                                                     std::size_t first = 0,
                                                     std::size_t last = std::numeric_limits<std::size_t>::max(),
                                                     double gamma_floor = 1e-12);

}  // namespace nlkg
