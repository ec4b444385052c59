#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "nlkg/evolution.hpp"
#include "nlkg/experiments.hpp"
#include "nlkg/modulation.hpp"

namespace nlkg {

// Plain-text run configuration, one `key = value` per line, `#` comments.
// Unknown keys are rejected; missing keys keep their defaults.
struct RunConfig {
  int dim = 5;
  int n = 8192;
  double r_max = 100.0;
  double dt_cfl = 0.25;
  double t_final = 200.0;
  double mass_sq = 1.0;  // only for plain `evolve` data; section-9 data fix their own mass

  bool sponge = true;
  double sponge_start = 0.9;
  double sponge_strength = 0.1;

  ThresholdConfig thresholds;
  FateConfig fate;

  std::string data = "section9";  // see parse_data_spec
  Section9Kind kind = Section9Kind::PlusUnstable;
  double beta = 1e-3;
  double sigma0 = std::numeric_limits<double>::quiet_NaN();  // NaN = automatic
  double R_cut = std::numeric_limits<double>::quiet_NaN();

  int sample_stride = 20;
  int frame_stride = 100;
  int workers = 0;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  // Throws ValidationError naming the offending key.
  void validate() const;
  bool operator==(const RunConfig& o) const;

  EvolveConfig evolve_config() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
// Throws IoError, ParseError (with line number), ValidationError.
RunConfig parse_config(const std::filesystem::path& path);
// Applies a single `key = value` override, with the same checks as the parser.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical text: every key in a fixed order, shortest round-trip doubles.
std::string serialize(const RunConfig& cfg);
// FNV-1a 64 over the canonical text.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

// Initial data descriptions:
//   zero
//   gaussian:A,s     A exp(-r^2/s^2), zero velocity
//   bump:A,R         A exp(1 - 1/(1 - (r/R)^2)) on r < R, zero velocity
//   soliton:sigma    S^sigma W, zero velocity
//   section9         the configured section-9 kind in the soliton frame
struct DataSpec {
  std::string kind;
  std::vector<double> params;
};
DataSpec parse_data_spec(const std::string& text);

struct InitialData {
  State state;
  double mass_sq = 1.0;
  double frame_sigma = 0.0;
};
InitialData make_initial_data(const DataSpec& spec, const RunConfig& cfg, const BundlePtr& b);

}  // namespace nlkg
