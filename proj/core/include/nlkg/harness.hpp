#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nlkg/config.hpp"
#include "nlkg/evolution.hpp"

namespace nlkg {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kOutputRootEnv = "NLKG_OUTPUT_ROOT";

struct GoldenValues {
  int dim = 0;
  int n = 0;
  double r_max = 0.0;
  double k = 0.0;
  double C_star = 0.0;
  double E_wa_W = 0.0;
};
std::span<const GoldenValues> golden_values();

inline constexpr const char* kSeriesHeader = "t,E,mass_sq,K,d_tilde,lambda1,lambda2,sigma,interior_E";
// One row per stored frame, 12 significant digits; soliton-frame columns are
// empty ("nan") when no modulation sample coincides with the frame.
std::string series_csv(const Trajectory& traj);
void write_series(const Trajectory& traj, const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string config_text;
  double k = 0.0;
  double C_star = 0.0;
  double E_wa_W = 0.0;
  std::string tool_version = kToolVersion;
  double wall_time = 0.0;
  std::vector<std::string> outputs;
};
std::string manifest_json(const RunManifest& m);

// output_dir, placed under $NLKG_OUTPUT_ROOT when that is set and the path is relative.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<SelftestCheck> run_selftest();

// Entry point of the `nlkg` tool. Exit codes: 0 success, 1 runtime failure
// (error JSON on err), 2 usage error.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlkg
