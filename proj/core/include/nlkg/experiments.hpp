#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlkg/evolution.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/modulation.hpp"

namespace nlkg {

// Initial data lambda(0) = beta * (+-1, 0) or beta * (0, +-1) around W.
enum class Section9Kind { PlusUnstable, MinusUnstable, PlusVelocity, MinusVelocity };

std::string to_string(Section9Kind k);
Section9Kind section9_kind_from_string(const std::string& s);
inline constexpr Section9Kind kAllSection9Kinds[] = {Section9Kind::PlusUnstable, Section9Kind::MinusUnstable,
                                                     Section9Kind::PlusVelocity, Section9Kind::MinusVelocity};

struct Section9Spec {
  Section9Kind kind = Section9Kind::PlusUnstable;
  double beta = 0.01;
  // NaN picks the smallest scale satisfying the mass bound with a factor 10 margin.
  double sigma0 = std::numeric_limits<double>::quiet_NaN();
  // d = 3 only: the tail of W beyond ~R_cut is cut off.
  double R_cut = std::numeric_limits<double>::quiet_NaN();
};

// The state lives in the soliton frame: the grid holds W + v(0) and the
// equation is solved with m^2 = e^{-2 sigma0}. Physical scales are
// frame values plus sigma0.
struct Section9Data {
  State state;
  double sigma0 = 0.0;
  double mass_sq = 0.0;
  double tail_energy = 0.0;  // d = 3 cutoff tail, zero otherwise
  Decomposition check;       // round trip of the constructed state
};

// e^{-2 sigma0} * integral(W^2) <= beta^2 / 10
double auto_sigma0(const GroundStateBundle& b, double beta);

// Throws InvalidArgument, TailBoundViolated, ScaleBoundViolated.
Section9Data build_section9_data(const Section9Spec& spec, const GroundStateBundle& b,
                                 const ThresholdConfig& th = {});

struct EjectionConfig {
  EvolveConfig evolve;  // mass_sq and frame_sigma are taken from the data
  double t_final = 60.0;
  double beta_eff = 0.0;  // 0 uses the spec amplitude
};

// lambda1(tau) ~ a e^{rate tau} + b e^{-rate tau} + c on the fit window.
struct EjectionReport {
  double fitted_rate = 0.0;
  double k_reference = 0.0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  double rate_rel_err = 0.0;
  double K_sign_flip_tau = std::numeric_limits<double>::quiet_NaN();
  double growth_r2 = 0.0;
  double fit_a = 0.0, fit_b = 0.0, fit_c = 0.0;
  double plus_rate = 0.0;  // log-linear slope of |lambda_plus|, a cross-check
  double bound_ratio = 0.0;  // max (||gamma|| + ||u||) / (beta + beta^2 e^{2k tau})
  bool sign_constant = true;  // sign(lambda1) over the window
  std::size_t first = 0, last = 0;  // sample indices of the window
  std::size_t samples = 0;
};

struct EjectionRun {
  Section9Data data;
  Trajectory trajectory;
  std::optional<EjectionReport> report;
  std::string error;  // why report is empty
};

Trajectory simulate(const Section9Data& data, const BundlePtr& b, const EvolveConfig& cfg, double t_final);

// Throws WindowTooShort when the validity band holds less than one e-folding.
EjectionReport analyze_ejection(const Trajectory& traj, const GroundStateBundle& b, const ThresholdConfig& th,
                                double beta);
EjectionRun run_ejection(const Section9Spec& spec, const BundlePtr& b, const EjectionConfig& cfg);

enum class EnergyClass { BelowThreshold, SlightlyAbove, Other };
std::string to_string(EnergyClass c);

struct FateRow {
  Section9Kind kind = Section9Kind::PlusUnstable;
  Fate backward;
  Fate forward;
  double energy = 0.0;     // E(u) in frame units (equal to the physical energy)
  double energy_gap = 0.0;  // E(u) - E_wa(W)
  EnergyClass energy_class = EnergyClass::Other;
  double one_pass_min_backward = std::numeric_limits<double>::quiet_NaN();
  double one_pass_min_forward = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct FateTable {
  int dim = 5;
  int n = 0;
  double r_max = 0.0;
  double beta = 0.0;
  double dt_cfl = 0.0;
  std::vector<FateRow> rows;
  const FateRow& row(Section9Kind k) const;
};

struct ClassifyConfig {
  int dim = 5;
  int n = 8192;
  double r_max = 100.0;
  double beta = 1e-3;
  double t_final = 200.0;
  EvolveConfig evolve;  // sponge, dt_cfl, strides, thresholds, fate settings
};

ClassifyConfig default_classify_config();
FateTable classify_fates(const ClassifyConfig& cfg);
FateTable classify_fates(const ClassifyConfig& cfg, const BundlePtr& b);

struct OnePassReport {
  double t_cross = 0.0;
  double min_after = 0.0;
  std::size_t samples_after = 0;
  bool passed = false;
};
// Throws NoCrossingFound if d_tilde never crosses delta_b upwards after a
// sub-delta_b excursion.
OnePassReport one_pass_probe(const Trajectory& traj, const ThresholdConfig& th);

struct SweepPoint {
  Section9Kind kind = Section9Kind::PlusUnstable;
  double beta = 0.01;
  double sigma0 = std::numeric_limits<double>::quiet_NaN();
  int dim = 5;
  int n = 4096;
};

struct SweepConfig {
  double r_max = 100.0;
  double t_final = 60.0;
  int workers = 0;  // 0 picks the hardware concurrency
  EvolveConfig evolve;
};

struct SweepRow {
  std::size_t index = 0;
  SweepPoint point;
  FateKind fate = FateKind::Undecided;
  double t_detect = std::numeric_limits<double>::quiet_NaN();
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double k = std::numeric_limits<double>::quiet_NaN();
  double rate_rel_err = std::numeric_limits<double>::quiet_NaN();
  double one_pass_min = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

SweepConfig default_sweep_config();
// Cartesian product in the order kinds x betas x sigma0s x dims x ns.
std::vector<SweepPoint> sweep_grid(const std::vector<Section9Kind>& kinds, const std::vector<double>& betas,
                                   const std::vector<double>& sigma0s, const std::vector<int>& dims,
                                   const std::vector<int>& ns);
// Rows come back in point order whatever the worker count.
std::vector<SweepRow> sweep(const std::vector<SweepPoint>& points, const SweepConfig& cfg);

}  // namespace nlkg
