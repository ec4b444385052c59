#include "nlkg/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "golden.hpp"
#include "nlkg/errors.hpp"
#include "nlkg/experiments.hpp"
#include "nlkg/functionals.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/modulation.hpp"

namespace nlkg {

using json = nlohmann::ordered_json;

std::span<const GoldenValues> golden_values() { return detail::kGolden; }

namespace {

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const ModulationSample* sample_at(const Trajectory& traj, double t) {
  const auto& mod = traj.modulation;
  auto it = std::lower_bound(mod.begin(), mod.end(), t, [](const ModulationSample& m, double x) { return m.t < x; });
  const double tol = 0.5 * traj.dt;
  const ModulationSample* best = nullptr;
  if (it != mod.end() && std::abs(it->t - t) <= tol) best = &*it;
  if (it != mod.begin() && std::abs(std::prev(it)->t - t) <= tol) {
    if (!best || std::abs(std::prev(it)->t - t) < std::abs(best->t - t)) best = &*std::prev(it);
  }
  return best;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to " + path.string() + " failed");
}

json fate_json(const Fate& f) {
  json j;
  j["kind"] = to_string(f.kind);
  j["t_detect"] = f.t_detect;
  j["reason"] = f.reason;
  json ev = json::object();
  for (const auto& [k, v] : f.evidence) ev[k] = v;
  j["evidence"] = ev;
  return j;
}

json ejection_json(const EjectionRun& run, const GroundStateBundle& b) {
  json j;
  j["sigma0"] = run.data.sigma0;
  j["mass_sq"] = run.data.mass_sq;
  j["lambda1_0"] = run.data.check.lambda1;
  j["lambda2_0"] = run.data.check.lambda2;
  j["k_reference"] = b.k;
  j["fate"] = fate_json(run.trajectory.fate);
  if (run.report) {
    const auto& r = *run.report;
    j["fitted_rate"] = r.fitted_rate;
    j["rate_rel_err"] = r.rate_rel_err;
    j["window"] = {r.tau_lo, r.tau_hi};
    j["window_samples"] = r.samples;
    j["growth_r2"] = r.growth_r2;
    j["fit"] = {{"a", r.fit_a}, {"b", r.fit_b}, {"c", r.fit_c}};
    j["plus_rate"] = r.plus_rate;
    j["K_sign_flip_tau"] = r.K_sign_flip_tau;
    j["sign_constant"] = r.sign_constant;
    j["bound_ratio"] = r.bound_ratio;
  } else {
    j["error"] = run.error;
  }
  return j;
}

json fate_table_json(const FateTable& t, const GroundStateBundle& b) {
  json j;
  j["dim"] = t.dim;
  j["n"] = t.n;
  j["r_max"] = t.r_max;
  j["beta"] = t.beta;
  j["dt_cfl"] = t.dt_cfl;
  j["E_wa_W"] = b.E_wa_W;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row;
    row["kind"] = to_string(r.kind);
    row["backward"] = fate_json(r.backward);
    row["forward"] = fate_json(r.forward);
    row["energy"] = r.energy;
    row["energy_gap"] = r.energy_gap;
    row["energy_class"] = to_string(r.energy_class);
    row["one_pass_min_backward"] = r.one_pass_min_backward;
    row["one_pass_min_forward"] = r.one_pass_min_forward;
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

json constants_json(const GroundStateBundle& b) {
  const auto& g = *b.grid;
  json j;
  j["dim"] = g.dim();
  j["n"] = g.size();
  j["r_max"] = g.r_max();
  j["k"] = b.k;
  j["C_star"] = b.C_star;
  j["E_wa_W"] = b.E_wa_W;
  j["grad_sq_W"] = b.grad_sq_W;
  j["K_W"] = k_functional(b.W);
  j["eig_residual"] = b.eig_residual;
  j["second_eigenvalue"] = b.second_eigenvalue;
  j["pde_residual_max"] = b.pde_residual_max;
  j["lambda1_equilibrium"] = b.lambda1_equilibrium;
  j["stable_cfl"] = g.stable_cfl();
  return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "index,kind,beta,sigma0,dim,n,fate,t_detect,fitted_rate,k,rate_rel_err,one_pass_min,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::to_string(r.index) + "," + to_string(r.point.kind) + "," + num12(r.point.beta) + "," +
           num12(r.point.sigma0) + "," + std::to_string(r.point.dim) + "," + std::to_string(r.point.n) + "," +
           to_string(r.fate) + "," + num12(r.t_detect) + "," + num12(r.fitted_rate) + "," + num12(r.k) + "," +
           num12(r.rate_rel_err) + "," + num12(r.one_pass_min) + "," + err + "\n";
  }
  return out;
}

template <class T, class F>
std::vector<T> split_list(const std::string& s, F parse) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse(item));
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) throw ParseError("'" + s + "' is not a number");
  return v;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) throw ParseError("'" + s + "' is not an integer");
  return v;
}

// Options shared by every run subcommand.
struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  int dim = 0;
  int n = 0;
  double r_max = 0.0;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--set", sets, "override a configuration key, key=value")->allow_extra_args(false);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--dim", dim, "spatial dimension (3, 4 or 5)");
    sub->add_option("--n", n, "grid points");
    sub->add_option("--r-max", r_max, "outer radius");
  }

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + s + "'");
      auto trim = [](std::string x) {
        x.erase(0, x.find_first_not_of(' '));
        x.erase(x.find_last_not_of(' ') + 1);
        return x;
      };
      set_config_value(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (dim) cfg.dim = dim;
    if (n) cfg.n = n;
    if (r_max > 0.0) cfg.r_max = r_max;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    return cfg;
  }
};

class Session {
 public:
  Session(std::string command, RunConfig cfg)
      : cfg_(std::move(cfg)), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.config_hash = hash_hex(config_hash(cfg_));
    manifest_.config_text = serialize(cfg_);
    dir_ = resolve_output_dir(cfg_);
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  const RunConfig& cfg() const { return cfg_; }

  BundlePtr bundle() {
    if (!bundle_) {
      bundle_ = make_bundle(make_grid(cfg_.dim, cfg_.n, cfg_.r_max));
      manifest_.k = bundle_->k;
      manifest_.C_star = bundle_->C_star;
      manifest_.E_wa_W = bundle_->E_wa_W;
    }
    return bundle_;
  }

  void write(const std::string& name, const std::string& text) {
    write_text(dir_ / name, text);
    manifest_.outputs.push_back(name);
  }

  void finish() {
    write("config.txt", manifest_.config_text);
    manifest_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.outputs.push_back("manifest.json");
    write_text(dir_ / "manifest.json", manifest_json(manifest_));
  }

 private:
  RunConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
  std::filesystem::path dir_;
  BundlePtr bundle_;
};

// One node per line: "u1 u2" or "u1,u2"; '#' starts a comment.
State read_state(const std::filesystem::path& path, const GridPtr& g) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read state file " + path.string());
  std::vector<double> a, b;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    if (!(ls >> x)) continue;
    if (!(ls >> y)) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected two values");
    a.push_back(x);
    b.push_back(y);
  }
  if (static_cast<int>(a.size()) != g->size())
    throw ShapeMismatch("state file has " + std::to_string(a.size()) + " rows, grid has " + std::to_string(g->size()));
  return State(Field(g, std::move(a)), Field(g, std::move(b)));
}

}  // namespace

std::string series_csv(const Trajectory& traj) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& f : traj.frames) {
    const auto step = static_cast<std::size_t>(f.step);
    const StepScalars* sc = step < traj.scalars.size() ? &traj.scalars[step] : nullptr;
    const ModulationSample* m = sample_at(traj, f.t);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double E = sc ? sc->E : energy(f.state, traj.mass_sq);
    const double mass = sc ? sc->mass_sq : inner(f.state.u1, f.state.u1);
    const double K = sc ? sc->K : k_functional(f.state.u1);
    const double interior = sc ? sc->interior_E : nan;
    out += num12(f.t) + "," + num12(E) + "," + num12(mass) + "," + num12(K) + "," + num12(m ? m->d_tilde : nan) +
           "," + num12(m && m->decomposed ? m->lambda1 : nan) + "," + num12(m && m->decomposed ? m->lambda2 : nan) +
           "," + num12(m && m->decomposed ? m->sigma + traj.frame_sigma : nan) + "," + num12(interior) + "\n";
  }
  return out;
}

void write_series(const Trajectory& traj, const std::filesystem::path& path) { write_text(path, series_csv(traj)); }

std::string manifest_json(const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config_text;
  j["golden"] = {{"k", m.k}, {"C_star", m.C_star}, {"E_wa_W", m.E_wa_W}};
  j["wall_time_s"] = m.wall_time;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  std::filesystem::path p(cfg.output_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = std::filesystem::path(root) / p;
  }
  return p;
}

std::vector<SelftestCheck> run_selftest() {
  std::vector<SelftestCheck> out;
  auto check = [&](const std::string& name, auto&& body) {
    SelftestCheck c;
    c.name = name;
    try {
      c.detail = body();
      c.passed = c.detail.empty();
    } catch (const std::exception& e) {
      c.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(c));
  };
  auto fail_if = [](bool bad, const std::string& what) { return bad ? what : std::string(); };

  const auto g5 = make_grid(5, 1024, 40.0);
  const Field gauss = Field::from_function(g5, [](double r) { return std::exp(-r * r / 4.0); });

  check("grid rejects d = 2", [&] {
    try {
      make_grid(2, 64, 10.0);
    } catch (const InvalidArgument&) {
      return std::string();
    }
    return std::string("no error raised");
  });
  check("gradient norm equals -<Lap f, f>", [&] {
    const double a = gradient_norm_sq(gauss);
    const double b = -inner(radial_laplacian(gauss), gauss);
    return fail_if(std::abs(a - b) > 1e-12 * std::abs(a), "mismatch " + num12(a - b));
  });
  check("zero state has zero energy", [&] {
    return fail_if(energy(State::zero(g5)) != 0.0, "nonzero energy");
  });
  check("scale by zero is the identity", [&] {
    const Field s = scale(gauss, 0.0, 1.5);
    double err = 0.0;
    for (int i = 0; i < s.size(); ++i) err = std::max(err, std::abs(s[i] - gauss[i]));
    return fail_if(err > 1e-14, "max deviation " + num12(err));
  });
  check("step forward then back is the identity", [&] {
    const State s0(gauss, Field(g5));
    const double dt = 0.25 * g5->dr();
    const State s1 = step(step(s0, dt), -dt);
    double err = 0.0;
    for (int i = 0; i < s0.u1.size(); ++i) err = std::max(err, std::abs(s1.u1[i] - s0.u1[i]));
    return fail_if(err > 1e-12, "round trip error " + num12(err));
  });
  check("default thresholds are ordered", [&] {
    ThresholdConfig th;
    th.validate();
    std::swap(th.delta_b, th.delta_f);
    try {
      th.validate();
    } catch (const ValidationError&) {
      return std::string();
    }
    return std::string("swapped thresholds accepted");
  });
  check("config round trip", [&] {
    RunConfig c;
    c.dim = 4;
    c.beta = 0.0125;
    c.sigma0 = 11.5;
    const RunConfig back = parse_config_text(serialize(c));
    return fail_if(!(back == c) || serialize(back) != serialize(c), "round trip changed the config");
  });
  for (const auto& gv : golden_values()) {
    check("golden constants d = " + std::to_string(gv.dim), [&] {
      const auto b = make_bundle(make_grid(gv.dim, gv.n, gv.r_max));
      auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
      const double e = std::max({rel(b->k, gv.k), rel(b->C_star, gv.C_star), rel(b->E_wa_W, gv.E_wa_W)});
      return fail_if(e > 1e-8, "relative deviation " + num12(e));
    });
  }
  check("decomposition of W is trivial", [&] {
    const auto b = make_bundle(g5);
    const auto dec = decompose(State(b->W, Field(g5)), *b);
    const double e = std::max({std::abs(dec.sigma), std::abs(dec.lambda1), std::abs(dec.lambda2)});
    return fail_if(e > 1e-10, "largest coordinate " + num12(e));
  });
  return out;
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial nonlinear Klein-Gordon solver near the ground state", "nlkg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;
  auto* constants = app.add_subcommand("constants", "ground-state constants for one dimension");
  common.attach(constants);

  std::string data_text, state_path;
  auto* decompose_cmd = app.add_subcommand("decompose", "modulation coordinates of an initial state");
  common.attach(decompose_cmd);
  decompose_cmd->add_option("--data", data_text, "initial data (zero, gaussian:A,s, bump:A,R, soliton:s, section9)");
  decompose_cmd->add_option("--state", state_path, "state file, one 'u1 u2' pair per grid node")->excludes("--data");

  double t_final = -1.0;
  auto* evolve_cmd = app.add_subcommand("evolve", "evolve initial data and write series.csv");
  common.attach(evolve_cmd);
  evolve_cmd->add_option("--data", data_text, "initial data");
  evolve_cmd->add_option("--t-final", t_final, "final time");

  std::string kind_text;
  double beta = -1.0;
  auto* ejection_cmd = app.add_subcommand("ejection", "measure the ejection rate for section-9 data");
  common.attach(ejection_cmd);
  ejection_cmd->add_option("--kind", kind_text, "PlusUnstable, MinusUnstable, PlusVelocity or MinusVelocity");
  ejection_cmd->add_option("--beta", beta, "amplitude");
  ejection_cmd->add_option("--t-final", t_final, "final time");

  auto* classify_cmd = app.add_subcommand("classify", "forward and backward fates of the four data kinds");
  common.attach(classify_cmd);
  classify_cmd->add_option("--beta", beta, "amplitude");
  classify_cmd->add_option("--t-final", t_final, "final time cap");

  std::string kinds_text = "PlusUnstable", betas_text = "0.01", dims_text = "5", ns_text = "4096", sigmas_text;
  auto* sweep_cmd = app.add_subcommand("sweep", "ejection and fate over a parameter grid");
  common.attach(sweep_cmd);
  sweep_cmd->add_option("--kinds", kinds_text, "comma-separated data kinds");
  sweep_cmd->add_option("--betas", betas_text, "comma-separated amplitudes");
  sweep_cmd->add_option("--dims", dims_text, "comma-separated dimensions");
  sweep_cmd->add_option("--ns", ns_text, "comma-separated grid sizes");
  sweep_cmd->add_option("--sigma0s", sigmas_text, "comma-separated initial scales (default automatic)");
  sweep_cmd->add_option("--t-final", t_final, "final time");

  auto* selftest_cmd = app.add_subcommand("selftest", "fast identity checks and golden constants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    json j{{"error", "UsageError"}, {"message", e.what()}};
    err << j.dump() << "\n" << app.help();
    return 2;
  }

  try {
    if (selftest_cmd->parsed()) {
      const auto checks = run_selftest();
      bool ok = true;
      for (const auto& c : checks) {
        out << (c.passed ? "PASS  " : "FAIL  ") << c.name;
        if (!c.passed) out << "  (" << c.detail << ")";
        out << "\n";
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }

    if (constants->parsed()) {
      Session s("constants", common.load());
      const std::string text = constants_json(*s.bundle()).dump(2) + "\n";
      s.write("constants.json", text);
      s.finish();
      out << text;
      return 0;
    }

    if (decompose_cmd->parsed()) {
      RunConfig cfg = common.load();
      if (!data_text.empty()) set_config_value(cfg, "data", data_text);
      Session s("decompose", cfg);
      const auto b = s.bundle();
      InitialData init;
      if (!state_path.empty()) {
        init.state = read_state(state_path, b->grid);
        init.mass_sq = cfg.mass_sq;
      } else {
        init = make_initial_data(parse_data_spec(cfg.data), cfg, b);
      }
      const auto rep = nonlinear_distance_report(init.state, *b, cfg.thresholds);
      json j;
      j["source"] = state_path.empty() ? cfg.data : state_path;
      j["decomposed"] = rep.decomposed;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const Decomposition* d = rep.decomposition ? &*rep.decomposition : nullptr;
      j["sigma"] = d ? d->sigma + init.frame_sigma : nan;
      j["lambda1"] = d ? d->lambda1 : nan;
      j["lambda2"] = d ? d->lambda2 : nan;
      j["lambda_plus"] = d ? d->lambda_plus : nan;
      j["lambda_minus"] = d ? d->lambda_minus : nan;
      j["d0"] = rep.d0;
      j["dS"] = rep.d_s;
      j["dTilde"] = rep.d_tilde;
      try {
        j["theta"] = theta_sign(init.state, *b, cfg.thresholds, init.mass_sq).theta;
      } catch (const DomainViolation& e) {
        j["theta"] = nullptr;
        j["theta_error"] = e.what();
      }
      json res;
      if (d) {
        const State back = reconstruct(*d, *b);
        res["orthogonality"] = d->orth_residual;
        res["reconstruction"] = norm_l2(back.u1 - init.state.u1) / std::max(norm_l2(init.state.u1), 1e-300);
        res["gamma_norm"] = d->gamma_norm;
      }
      res["energy_gap"] = energy(init.state, init.mass_sq) - b->E_wa_W;
      res["K"] = k_functional(init.state.u1);
      j["residuals"] = res;
      const std::string text = j.dump(2) + "\n";
      s.write("decomposition.json", text);
      s.finish();
      out << text;
      return 0;
    }

    if (evolve_cmd->parsed()) {
      RunConfig cfg = common.load();
      if (!data_text.empty()) set_config_value(cfg, "data", data_text);
      if (t_final >= 0.0) cfg.t_final = t_final;
      cfg.validate();
      Session s("evolve", cfg);
      const auto b = s.bundle();
      const auto init = make_initial_data(parse_data_spec(cfg.data), cfg, b);
      EvolveConfig ec = cfg.evolve_config();
      ec.mass_sq = init.mass_sq;
      ec.frame_sigma = init.frame_sigma;
      ec.track_modulation = true;
      const auto traj = evolve(init.state, cfg.t_final, ec, b);
      s.write("series.csv", series_csv(traj));
      const std::string fate = fate_json(traj.fate).dump(2) + "\n";
      s.write("fate.json", fate);
      s.finish();
      out << fate;
      return 0;
    }

    if (ejection_cmd->parsed()) {
      RunConfig cfg = common.load();
      if (!kind_text.empty()) set_config_value(cfg, "experiment.kind", kind_text);
      if (beta > 0.0) cfg.beta = beta;
      if (t_final >= 0.0) cfg.t_final = t_final;
      cfg.validate();
      Session s("ejection", cfg);
      const auto b = s.bundle();
      Section9Spec spec{cfg.kind, cfg.beta, cfg.sigma0, cfg.R_cut};
      EjectionConfig ec;
      ec.evolve = cfg.evolve_config();
      ec.t_final = cfg.t_final;
      const auto run = run_ejection(spec, b, ec);
      s.write("series.csv", series_csv(run.trajectory));
      const std::string text = ejection_json(run, *b).dump(2) + "\n";
      s.write("ejection_report.json", text);
      s.finish();
      out << text;
      if (!run.report) throw WindowTooShort(run.error);
      return 0;
    }

    if (classify_cmd->parsed()) {
      RunConfig cfg = common.load();
      if (beta > 0.0) cfg.beta = beta;
      if (t_final >= 0.0) cfg.t_final = t_final;
      cfg.validate();
      Session s("classify", cfg);
      ClassifyConfig cc;
      cc.dim = cfg.dim;
      cc.n = cfg.n;
      cc.r_max = cfg.r_max;
      cc.beta = cfg.beta;
      cc.t_final = cfg.t_final;
      cc.evolve = cfg.evolve_config();
      const auto b = s.bundle();
      const auto table = classify_fates(cc, b);
      const std::string text = fate_table_json(table, *b).dump(2) + "\n";
      s.write("fate_table.json", text);
      s.finish();
      out << text;
      return 0;
    }

    if (sweep_cmd->parsed()) {
      RunConfig cfg = common.load();
      if (t_final >= 0.0) cfg.t_final = t_final;
      cfg.validate();
      Session s("sweep", cfg);
      const auto points = sweep_grid(split_list<Section9Kind>(kinds_text, section9_kind_from_string),
                                     split_list<double>(betas_text, to_double),
                                     split_list<double>(sigmas_text, to_double), split_list<int>(dims_text, to_int),
                                     split_list<int>(ns_text, to_int));
      SweepConfig sc;
      sc.r_max = cfg.r_max;
      sc.t_final = cfg.t_final;
      sc.workers = cfg.workers;
      sc.evolve = cfg.evolve_config();
      sc.evolve.frame_stride = 0;
      const auto rows = sweep(points, sc);
      const std::string text = sweep_csv(rows);
      s.write("sweep.csv", text);
      s.finish();
      out << text;
      return 0;
    }
  } catch (const Error& e) {
    json j{{"error", e.kind()}, {"message", e.what()}};
    err << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json j{{"error", "InternalError"}, {"message", e.what()}};
    err << j.dump() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace nlkg
