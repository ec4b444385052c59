#include "nlkg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "nlkg/errors.hpp"

namespace nlkg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "auto";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v, bool allow_auto) {
  if (allow_auto && v == "auto") return std::numeric_limits<double>::quiet_NaN();
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ParseError("key '" + key + "': '" + v + "' is not a finite number");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ParseError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ParseError("key '" + key + "': '" + v + "' is not a boolean");
}

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

Key real(const std::string& name, double RunConfig::*m, bool allow_auto = false) {
  return {name, [m](const RunConfig& c) { return fmt_double(c.*m); },
          [name, m, allow_auto](RunConfig& c, const std::string& v) { c.*m = parse_double(name, v, allow_auto); }};
}

Key integer(const std::string& name, int RunConfig::*m) {
  return {name, [m](const RunConfig& c) { return std::to_string(c.*m); },
          [name, m](RunConfig& c, const std::string& v) { c.*m = parse_int<int>(name, v); }};
}

template <class Sub>
Key nested(const std::string& name, Sub RunConfig::*outer, double Sub::*m) {
  return {name, [outer, m](const RunConfig& c) { return fmt_double(c.*outer.*m); },
          [name, outer, m](RunConfig& c, const std::string& v) { c.*outer.*m = parse_double(name, v, false); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    using TC = ThresholdConfig;
    using FC = FateConfig;
    std::vector<Key> v;
    v.push_back(integer("dim", &RunConfig::dim));
    v.push_back(integer("n", &RunConfig::n));
    v.push_back(real("r_max", &RunConfig::r_max));
    v.push_back(real("dt_cfl", &RunConfig::dt_cfl));
    v.push_back(real("t_final", &RunConfig::t_final));
    v.push_back(real("mass_sq", &RunConfig::mass_sq));
    v.push_back({"sponge", [](const RunConfig& c) { return std::string(c.sponge ? "true" : "false"); },
                 [](RunConfig& c, const std::string& s) { c.sponge = parse_bool("sponge", s); }});
    v.push_back(real("sponge.start", &RunConfig::sponge_start));
    v.push_back(real("sponge.strength", &RunConfig::sponge_strength));
    v.push_back(nested("thresholds.delta_s", &RunConfig::thresholds, &TC::delta_s));
    v.push_back(nested("thresholds.delta_l", &RunConfig::thresholds, &TC::delta_l));
    v.push_back(nested("thresholds.delta_s_prime", &RunConfig::thresholds, &TC::delta_s_prime));
    v.push_back(nested("thresholds.delta_f", &RunConfig::thresholds, &TC::delta_f));
    v.push_back(nested("thresholds.delta_m", &RunConfig::thresholds, &TC::delta_m));
    v.push_back(nested("thresholds.delta_V", &RunConfig::thresholds, &TC::delta_V));
    v.push_back(nested("thresholds.delta_b", &RunConfig::thresholds, &TC::delta_b));
    v.push_back(nested("thresholds.eps_star", &RunConfig::thresholds, &TC::eps_star));
    v.push_back(nested("fate.amplitude_blow", &RunConfig::fate, &FC::amplitude_blow));
    v.push_back(nested("fate.energy_defect", &RunConfig::fate, &FC::energy_defect));
    v.push_back(nested("fate.interior_radius", &RunConfig::fate, &FC::interior_radius));
    v.push_back(nested("fate.eps_scatter", &RunConfig::fate, &FC::eps_scatter));
    v.push_back(nested("fate.scatter_window", &RunConfig::fate, &FC::scatter_window));
    v.push_back({"data", [](const RunConfig& c) { return c.data; },
                 [](RunConfig& c, const std::string& s) {
                   parse_data_spec(s);
                   c.data = s;
                 }});
    v.push_back({"experiment.kind", [](const RunConfig& c) { return to_string(c.kind); },
                 [](RunConfig& c, const std::string& s) {
                   try {
                     c.kind = section9_kind_from_string(s);
                   } catch (const InvalidArgument& e) {
                     throw ParseError(std::string("key 'experiment.kind': ") + e.what());
                   }
                 }});
    v.push_back(real("experiment.beta", &RunConfig::beta));
    v.push_back(real("experiment.sigma0", &RunConfig::sigma0, true));
    v.push_back(real("experiment.r_cut", &RunConfig::R_cut, true));
    v.push_back(integer("sample_stride", &RunConfig::sample_stride));
    v.push_back(integer("frame_stride", &RunConfig::frame_stride));
    v.push_back(integer("workers", &RunConfig::workers));
    v.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& s) { c.seed = parse_int<std::uint64_t>("seed", s); }});
    v.push_back({"output_dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, const std::string& s) { c.output_dir = s; }});
    return v;
  }();
  return k;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError(key + ": " + what);
}

}  // namespace

void RunConfig::validate() const {
  require(dim >= 3 && dim <= 5, "dim", "must be 3, 4 or 5");
  require(n >= 16 && n <= (1 << 22), "n", "must lie in [16, 4194304]");
  require(r_max > 0.0 && std::isfinite(r_max), "r_max", "must be positive");
  require(dt_cfl > 0.0 && dt_cfl <= 0.5, "dt_cfl", "must lie in (0, 0.5]");
  require(t_final >= 0.0 && std::isfinite(t_final), "t_final", "must be non-negative");
  require(mass_sq >= 0.0 && std::isfinite(mass_sq), "mass_sq", "must be non-negative");
  require(sponge_start > 0.0 && sponge_start < 1.0, "sponge.start", "must lie in (0, 1)");
  require(sponge_strength >= 0.0 && std::isfinite(sponge_strength), "sponge.strength", "must be non-negative");
  thresholds.validate();
  require(fate.amplitude_blow > 0.0, "fate.amplitude_blow", "must be positive");
  require(fate.energy_defect > 0.0, "fate.energy_defect", "must be positive");
  require(fate.interior_radius > 0.0, "fate.interior_radius", "must be positive");
  require(fate.eps_scatter > 0.0, "fate.eps_scatter", "must be positive");
  require(fate.scatter_window > 0.0, "fate.scatter_window", "must be positive");
  require(beta > 0.0 && beta < 1.0, "experiment.beta", "must lie in (0, 1)");
  require(std::isnan(R_cut) || R_cut > 0.0, "experiment.r_cut", "must be positive or auto");
  require(sample_stride >= 1, "sample_stride", "must be at least 1");
  require(frame_stride >= 0, "frame_stride", "must be non-negative");
  require(workers >= 0, "workers", "must be non-negative");
  require(!output_dir.empty() && output_dir.find('\n') == std::string::npos, "output_dir", "must be a non-empty path");
  try {
    parse_data_spec(data);
  } catch (const ParseError& e) {
    throw ValidationError(std::string("data: ") + e.what());
  }
}

bool RunConfig::operator==(const RunConfig& o) const { return serialize(*this) == serialize(o); }

EvolveConfig RunConfig::evolve_config() const {
  EvolveConfig e;
  e.dt_cfl = dt_cfl;
  e.mass_sq = mass_sq;
  e.sponge.enabled = sponge;
  e.sponge.start_fraction = sponge_start;
  e.sponge.strength = sponge_strength;
  e.frame_stride = frame_stride;
  e.sample_stride = sample_stride;
  e.thresholds = thresholds;
  e.fate = fate;
  return e;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ParseError("unknown key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

DataSpec parse_data_spec(const std::string& text) {
  DataSpec spec;
  const auto colon = text.find(':');
  spec.kind = trim(text.substr(0, colon));
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (true) {
      const auto comma = rest.find(',', pos);
      spec.params.push_back(parse_double("data", trim(rest.substr(pos, comma - pos)), false));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  std::size_t want = 0;
  if (spec.kind == "zero" || spec.kind == "section9")
    want = 0;
  else if (spec.kind == "gaussian" || spec.kind == "bump")
    want = 2;
  else if (spec.kind == "soliton")
    want = 1;
  else
    throw ParseError("unknown data kind '" + spec.kind + "'");
  if (spec.params.size() != want)
    throw ParseError("data '" + spec.kind + "' takes " + std::to_string(want) + " parameter(s)");
  if ((spec.kind == "gaussian" || spec.kind == "bump") && !(spec.params[1] > 0.0))
    throw ParseError("data '" + spec.kind + "' needs a positive width");
  return spec;
}

InitialData make_initial_data(const DataSpec& spec, const RunConfig& cfg, const BundlePtr& b) {
  if (!b) throw InvalidArgument("initial data needs a ground-state bundle");
  const auto& g = b->grid;
  InitialData out;
  out.mass_sq = cfg.mass_sq;
  if (spec.kind == "zero") {
    out.state = State::zero(g);
  } else if (spec.kind == "gaussian") {
    const double A = spec.params[0], s = spec.params[1];
    out.state = State(Field::from_function(g, [&](double r) { return A * std::exp(-r * r / (s * s)); }), Field(g));
  } else if (spec.kind == "bump") {
    const double A = spec.params[0], R = spec.params[1];
    out.state = State(Field::from_function(g,
                                           [&](double r) {
                                             const double x = r / R;
                                             return x < 1.0 ? A * std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
                                           }),
                      Field(g));
  } else if (spec.kind == "soliton") {
    out.state = State(scaled_ground_state(g, spec.params[0]), Field(g));
  } else if (spec.kind == "section9") {
    Section9Spec s9;
    s9.kind = cfg.kind;
    s9.beta = cfg.beta;
    s9.sigma0 = cfg.sigma0;
    s9.R_cut = cfg.R_cut;
    auto data = build_section9_data(s9, *b, cfg.thresholds);
    out.state = std::move(data.state);
    out.mass_sq = data.mass_sq;
    out.frame_sigma = data.sigma0;
  } else {
    throw InvalidArgument("unknown data kind '" + spec.kind + "'");
  }
  return out;
}

}  // namespace nlkg
