#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orbistab/errors.hpp"
#include "orbistab/floquet.hpp"
#include "orbistab/projection.hpp"
#include "orbistab/registry.hpp"
#include "orbistab/riccati.hpp"
#include "orbistab/sim.hpp"
#include "orbistab/transverse.hpp"
#include "orbistab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace orbistab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNotConverged = 4;

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

// Flat key = value config document; '#' starts a comment.
struct Config {
  std::map<std::string, std::string> kv;
  std::string raw;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  std::string str(const std::string& key, const std::string& def = "") const {
    auto it = kv.find(key);
    return it == kv.end() ? def : it->second;
  }

  double number(const std::string& key, double def) const {
    auto it = kv.find(key);
    if (it == kv.end()) return def;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      fail(kExitConfig, "config key '" + key + "' is not a number");
    }
  }

  int integer(const std::string& key, int def) const {
    const double v = number(key, def);
    if (v != std::floor(v))
      fail(kExitConfig, "config key '" + key + "' is not an integer");
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv.find(key);
    if (it == kv.end()) return out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        fail(kExitConfig, "config key '" + key + "' has a non-numeric entry");
      }
    }
    return out;
  }
};

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(kExitConfig, "cannot open config file: " + path);
  Config cfg;
  std::stringstream buf;
  buf << in.rdbuf();
  cfg.raw = buf.str();
  std::stringstream lines(cfg.raw);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(kExitConfig, "config line " + std::to_string(lineno) +
                            " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(kExitConfig, "empty key on config line " +
                                           std::to_string(lineno));
    cfg.kv[key] = val;
  }
  return cfg;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Job {
  Config cfg;
  std::string out_dir;
  std::string system_name;
  SystemParams params;
  int grid_size = 512;
  RegisteredSystem reg;
};

Job make_job(const std::string& config_path, const std::string& out_dir) {
  Job job;
  job.cfg = load_config(config_path);
  job.out_dir = out_dir;
  job.system_name = job.cfg.str("system");
  if (job.system_name.empty()) fail(kExitConfig, "missing config key 'system'");
  const auto names = registered_system_names();
  if (std::find(names.begin(), names.end(), job.system_name) == names.end())
    fail(kExitConfig, "unknown system '" + job.system_name + "'");
  for (const auto& [k, v] : job.cfg.kv) {
    if (k.rfind("param.", 0) == 0)
      job.params[k.substr(6)] = job.cfg.number(k, 0.0);
  }
  job.grid_size = job.cfg.integer("grid_size", 512);
  if (job.grid_size < 64) fail(kExitConfig, "grid_size must be >= 64");
  try {
    job.reg = make_system(job.system_name, job.params);
  } catch (const std::exception& e) {
    fail(kExitConfig, std::string("system construction failed: ") + e.what());
  }
  std::error_code ec;
  fs::create_directories(job.out_dir, ec);
  if (ec) fail(kExitConfig, "cannot create output directory: " + out_dir);
  return job;
}

json job_header(const Job& job) {
  json j;
  j["version"] = kVersion;
  j["config_hash"] = fnv1a_hex(job.cfg.raw);
  j["system"] = job.system_name;
  json p = json::object();
  for (const auto& [k, v] : job.params) p[k] = v;
  j["params"] = p;
  j["grid_size"] = job.grid_size;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) fail(kExitNumeric, "failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

Mat diag_or_identity(const Config& cfg, const std::string& key, int dim) {
  const auto d = cfg.list(key);
  if (d.empty()) return Mat::Identity(dim, dim);
  if (static_cast<int>(d.size()) != dim)
    fail(kExitConfig, "config key '" + key + "' needs " + std::to_string(dim) +
                          " entries");
  Mat M = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) M(i, i) = d[static_cast<size_t>(i)];
  return M;
}

json spectrum_json(const Mat& M, double T) { return spectrum(M, T).to_json(); }

int cmd_analyze(const Job& job) {
  const auto& [system, orbit] = job.reg;
  json rep = job_header(job);

  const auto orbit_rep = verify_orbit(system, orbit, job.grid_size);
  rep["orbit_residual"] = orbit_rep.max_residual;
  rep["orbit_residual_argmax_s"] = orbit_rep.argmax_s;

  double max_gamma_err = 0.0, max_omega_err = 0.0, max_theta = 0.0;
  for (int i = 0; i < job.grid_size; ++i) {
    const double s = orbit.s0 + orbit.s_T * i / job.grid_size;
    const ProjectionFrame fr = frame_at(system, orbit, s);
    max_gamma_err =
        std::max(max_gamma_err, std::abs(fr.gamma.dot(fr.tangent) - 1.0));
    max_omega_err =
        std::max(max_omega_err, (fr.omega * fr.tangent).cwiseAbs().maxCoeff());
    max_theta = std::max(max_theta, fr.theta);
  }
  rep["frame_invariants"] = {{"max_gamma_tangent_error", max_gamma_err},
                             {"max_omega_tangent_error", max_omega_err},
                             {"max_obliqueness", max_theta}};

  const auto tvl = tvl_orthogonal(system, orbit, job.grid_size);
  const auto comp = comparison_system(system, orbit, job.grid_size);
  rep["tvl"] = tvl.to_json();
  rep["comparison"] = comp.to_json();
  rep["undriven_tvl_spectrum"] =
      spectrum_json(monodromy(tvl), tvl.time_period());
  rep["undriven_comparison_spectrum"] =
      spectrum_json(monodromy(comp), comp.time_period());

  write_json(fs::path(job.out_dir) / "analyze.json", rep);
  return kExitOk;
}

int cmd_synthesize(const Job& job) {
  const auto& [system, orbit] = job.reg;
  json rep = job_header(job);

  const auto tvl = tvl_orthogonal(system, orbit, job.grid_size);
  const auto comp = comparison_system(system, orbit, job.grid_size);
  const Mat Q = diag_or_identity(job.cfg, "Q", system.n);
  const Mat Rw = diag_or_identity(job.cfg, "Rw", system.m);

  RiccatiSolution sol;
  try {
    sol = solve_prde(comp, Q, Rw, job.cfg.integer("max_sweeps", 200));
  } catch (const NotConverged& e) {
    json err = {{"error", e.what()}, {"periodicity_gap", e.periodicity_gap}};
    std::cerr << err.dump() << "\n";
    return kExitNotConverged;
  }
  const GainSchedule gain = gain_from_riccati(sol, comp, Rw);
  write_text(fs::path(job.out_dir) / "gain.csv", gain.to_csv());
  rep["riccati"] = {{"converged", sol.converged},
                    {"sweeps", sol.sweeps},
                    {"periodicity_gap", sol.periodicity_gap},
                    {"residual_max", sol.residual_max}};

  rep["tvl_spectrum_riccati"] = spectrum_json(
      monodromy(tvl, &gain, GainClosure::gain_times_omega), tvl.time_period());
  rep["comparison_spectrum_riccati"] = spectrum_json(
      monodromy(comp, &gain, GainClosure::direct), comp.time_period());

  std::optional<GainSchedule> analytic;
  if (job.system_name == "bh-circle") {
    double a = 1.0;
    if (auto it = job.params.find("a"); it != job.params.end()) a = it->second;
    analytic = analytic_example_gain(a, job.grid_size);
    rep["tvl_spectrum_analytic"] = spectrum_json(
        monodromy(tvl, &*analytic, GainClosure::gain_times_omega),
        tvl.time_period());
    rep["comparison_spectrum_analytic"] = spectrum_json(
        monodromy(comp, &*analytic, GainClosure::direct), comp.time_period());
  }

  const auto sums = exponent_sum_check(system, orbit, gain, job.grid_size);
  rep["exponent_sums"] = {{"tvl", sums.sum_tvl},
                          {"first_approx", sums.sum_first_approx},
                          {"comparison", sums.sum_comparison},
                          {"vanishing_term", sums.vanishing_term},
                          {"pass", sums.pass}};

  // Growth-constant heuristic on the first-approximation closed loop.
  auto heuristic_for = [&](const GainSchedule& K) {
    Vec grid(job.grid_size + 1), rho(job.grid_size + 1);
    std::vector<Mat> A_cl, B_empty;
    double alpha = 0.0;
    for (int i = 0; i <= job.grid_size; ++i) {
      grid[i] = orbit.s0 + orbit.s_T * i / job.grid_size;
      const ProjectionFrame fr = frame_at(system, orbit, grid[i]);
      const Mat A = a_matrix(system, orbit, fr, grid[i]);
      const Mat Acl = A + system.g(fr.x_on_orbit) * K.K(grid[i]) * fr.omega;
      A_cl.push_back(Acl);
      B_empty.push_back(Mat::Zero(system.n, 1));
      rho[i] = fr.rho;
      alpha = std::max(alpha, Acl.operatorNorm());
    }
    A_cl.back() = A_cl.front();
    B_empty.back() = B_empty.front();
    rho[job.grid_size] = rho[0];
    PeriodicLinearSystem cl(grid, std::move(A_cl), std::move(B_empty),
                            std::move(rho), orbit.s_T);
    const auto g = estimate_growth_constants(cl, alpha, 3);
    return json{{"C", g.C},
                {"lambda_M", g.lambda_M},
                {"alpha", g.alpha},
                {"condition_holds", g.condition_holds},
                {"heuristic", g.heuristic}};
  };
  rep["growth_heuristic_riccati"] = heuristic_for(gain);
  if (analytic) rep["growth_heuristic_analytic"] = heuristic_for(*analytic);

  write_json(fs::path(job.out_dir) / "synthesize.json", rep);
  return kExitOk;
}

GainSchedule load_gain_csv(const fs::path& path, int m, int n, double period) {
  std::ifstream in(path);
  if (!in) fail(kExitNumeric, "cannot open gain file " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> grid;
  std::vector<Mat> K;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) != 1 + m * n)
      fail(kExitNumeric, "gain file has wrong column count");
    grid.push_back(row[0]);
    Mat Ki(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        Ki(i, j) = row[static_cast<size_t>(1 + i * n + j)];
    K.push_back(Ki);
  }
  Vec g = Eigen::Map<Vec>(grid.data(), static_cast<long>(grid.size()));
  return GainSchedule(std::move(g), std::move(K), period);
}

GainSchedule simulation_gain(const Job& job) {
  const auto& [system, orbit] = job.reg;
  const std::string kind = job.cfg.str("gain", "riccati");
  if (kind == "analytic") {
    if (job.system_name != "bh-circle")
      fail(kExitConfig, "analytic gain only available for bh-circle");
    double a = 1.0;
    if (auto it = job.params.find("a"); it != job.params.end()) a = it->second;
    return analytic_example_gain(a, job.grid_size);
  }
  if (kind != "riccati")
    fail(kExitConfig, "config key 'gain' must be riccati or analytic");
  const fs::path cached = fs::path(job.out_dir) / "gain.csv";
  if (fs::exists(cached))
    return load_gain_csv(cached, system.m, system.n, orbit.s_T);
  const auto comp = comparison_system(system, orbit, job.grid_size);
  const Mat Q = diag_or_identity(job.cfg, "Q", system.n);
  const Mat Rw = diag_or_identity(job.cfg, "Rw", system.m);
  const auto sol = solve_prde(comp, Q, Rw, job.cfg.integer("max_sweeps", 200));
  return gain_from_riccati(sol, comp, Rw);
}

int cmd_simulate(const Job& job) {
  const auto& [system, orbit] = job.reg;
  const auto x0_list = job.cfg.list("x0");
  if (static_cast<int>(x0_list.size()) != system.n)
    fail(kExitConfig, "config key 'x0' needs " + std::to_string(system.n) +
                          " entries");
  Vec x0 = Eigen::Map<const Vec>(x0_list.data(),
                                 static_cast<long>(x0_list.size()));
  const int horizon = job.cfg.integer("horizon_periods", 10);
  if (horizon < 1) fail(kExitConfig, "horizon_periods must be >= 1");

  GainSchedule gain = simulation_gain(job);
  const auto trace = simulate_closed_loop(system, orbit, gain, x0, horizon);
  write_text(fs::path(job.out_dir) / "trace.csv", trace.to_csv());

  json rep = job_header(job);
  rep["truncated"] = trace.truncated;
  json events = json::array();
  for (const auto& ev : trace.events)
    events.push_back({{"time", ev.time}, {"what", ev.what}});
  rep["events"] = events;

  if (trace.truncated) {
    rep["final_z_norm"] = trace.z_norms.back();
    write_json(fs::path(job.out_dir) / "simulate.json", rep);
    json err = {{"error", "trajectory left the projection tube"},
                {"event_time", trace.events.back().time}};
    std::cerr << err.dump() << "\n";
    return kExitNumeric;
  }

  const auto metrics = orbital_convergence_metrics(trace, system, orbit);
  rep["metrics"] = {{"final_distance", metrics.final_distance},
                    {"fitted_decay_rate", metrics.fitted_decay_rate},
                    {"phase_drift", metrics.phase_drift},
                    {"fit_samples", metrics.fit_samples}};
  write_json(fs::path(job.out_dir) / "simulate.json", rep);
  return kExitOk;
}

int cmd_report(const Job& job) {
  json rep = job_header(job);
  json stages = json::object();
  for (const char* stage : {"analyze", "synthesize", "simulate"}) {
    const fs::path p = fs::path(job.out_dir) / (std::string(stage) + ".json");
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    json j;
    in >> j;
    // Drop the bulky sampled systems from the combined document.
    j.erase("tvl");
    j.erase("comparison");
    stages[stage] = std::move(j);
  }
  if (stages.empty())
    fail(kExitConfig, "no stage artifacts found in " + job.out_dir);
  rep["stages"] = std::move(stages);
  write_json(fs::path(job.out_dir) / "report.json", rep);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbital stabilization toolchain for periodic motions"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";

  auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "flat key = value config file")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    return sub;
  };
  CLI::App* analyze = add("analyze", "orbit verification, frames, linearizations");
  CLI::App* synthesize = add("synthesize", "periodic Riccati gain design");
  CLI::App* simulate = add("simulate", "nonlinear closed-loop simulation");
  CLI::App* report = add("report", "merge stage artifacts into one document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const Job job = make_job(config_path, out_dir);
    if (analyze->parsed()) return cmd_analyze(job);
    if (synthesize->parsed()) return cmd_synthesize(job);
    if (simulate->parsed()) return cmd_simulate(job);
    if (report->parsed()) return cmd_report(job);
    return kExitConfig;
  } catch (const CliError& e) {
    std::cerr << json{{"error", e.message}, {"code", e.code}}.dump() << "\n";
    return e.code;
  } catch (const NotConverged& e) {
    std::cerr << json{{"error", e.what()},
                      {"periodicity_gap", e.periodicity_gap}}
                     .dump()
              << "\n";
    return kExitNotConverged;
  } catch (const NumericError& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitNumeric}}.dump()
              << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitNumeric}}.dump()
              << "\n";
    return kExitNumeric;
  }
}
