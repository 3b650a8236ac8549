#include "htlip/config.hpp"
#include "htlip/footstep_qp.hpp"
#include "htlip/io.hpp"
#include "htlip/simulation.hpp"
#include "htlip/stability.hpp"
#include "htlip/surface_motion.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace htlip;
using htlip::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnbounded = 2;
constexpr int kExitConfig = 64;
constexpr int kExitValidation = 65;
constexpr int kExitIo = 74;

struct Options {
  std::string scenario;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string grid;
  std::string instance;
  unsigned threads = 0;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

config::Document load_document(const Options& opt) {
  config::Document doc;
  if (!opt.scenario.empty()) doc = config::load(opt.scenario);
  for (const auto& o : opt.overrides) config::apply_override(doc, o);
  return doc;
}

Scenario load_scenario(const config::Document& doc, const Options& opt) {
  Scenario scn = config::scenario_from(doc);
  if (opt.seed) scn.seed = *opt.seed;
  try {
    scn.validate();
  } catch (const ModelError& e) {
    throw ValidationError(e.what());
  }
  return scn;
}

fs::path prepare_out(const Options& opt) {
  fs::path out(opt.out);
  fs::create_directories(out);
  return out;
}

void write_run(const fs::path& out, const RunResult& run) {
  fs::create_directories(out);
  io::write_trajectory_csv(out / "trajectory.csv", run.x);
  if (run.y) io::write_trajectory_csv(out / "trajectory_y.csv", *run.y);
  io::write_json(out / "steps.json", io::step_logs_json(run));
  io::write_json(out / "summary.json", io::summary_json(run.summary));
}

bool unbounded(const RunSummary& s) { return s.diverged || s.fallback_steps > 0; }

int cmd_simulate(const Options& opt) {
  const Scenario scn = load_scenario(load_document(opt), opt);
  const RunResult run = run_scenario(scn);
  const fs::path out = prepare_out(opt);
  write_run(out, run);
  const auto& s = run.summary;
  std::cout << "steps " << s.steps << "  max_error " << s.max_error << "  final_error "
            << s.final_error << "  max_contraction " << s.max_contraction_ratio
            << "  qp_infeasible " << s.qp_infeasible << (s.diverged ? "  DIVERGED" : "") << '\n';
  return unbounded(s) ? kExitUnbounded : kExitOk;
}

int cmd_compare(const Options& opt) {
  const Scenario scn = load_scenario(load_document(opt), opt);
  const Comparison cmp = compare_controllers(scn);
  const fs::path out = prepare_out(opt);
  write_run(out / "proposed", cmp.proposed);
  write_run(out / "baseline", cmp.baseline);
  const auto& p = cmp.proposed.summary;
  const auto& b = cmp.baseline.summary;
  const std::string winner = p.max_error < b.max_error   ? "proposed"
                             : b.max_error < p.max_error ? "baseline"
                                                         : "tie";
  json j = {{"proposed", io::summary_json(p)},
            {"baseline", io::summary_json(b)},
            {"baseline_gain", io::vector_json(cmp.baseline_gain)},
            {"lower_max_error", winner}};
  io::write_json(out / "compare.json", j);
  std::cout << "max_error proposed " << p.max_error << "  baseline " << b.max_error
            << "  lower: " << winner << '\n';
  return unbounded(p) ? kExitUnbounded : kExitOk;
}

int cmd_montecarlo(const Options& opt) {
  const auto doc = load_document(opt);
  const Scenario scn = load_scenario(doc, opt);
  auto mc_cfg = config::monte_carlo_from(doc);
  if (opt.trials) mc_cfg.trials = *opt.trials;
  if (mc_cfg.trials == 0) throw config::ConfigError("trials must be at least 1");
  const auto mc = monte_carlo(scn, mc_cfg.trials, mc_cfg.randomization, scn.seed, opt.threads);
  const fs::path out = prepare_out(opt);
  io::write_json(out / "montecarlo.json", io::monte_carlo_json(mc, scn.seed));
  std::cout << "success " << mc.successes << "/" << mc.n_trials << "  max_error " << mc.max_error
            << '\n';
  return mc.successes == mc.n_trials ? kExitOk : kExitUnbounded;
}

struct Range {
  double lo, hi;
  std::size_t n;
};

/// "name=lo:hi:n,name=lo:hi:n"; a single value "name=v" is a one-point range.
std::map<std::string, Range> parse_grid(const std::string& spec) {
  std::map<std::string, Range> grid = {
      {"z0", {0.22, 0.26, 5}},
      {"dtau", {0.15, 0.4, 6}},
      {"k1", {-1.0, 3.0, 81}},
      {"k2", {-0.5, 1.0, 61}},
  };
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw config::ConfigError("grid entry '" + item + "' lacks '='");
    const std::string name = item.substr(0, eq);
    if (!grid.contains(name)) throw config::ConfigError("unknown grid axis '" + name + "'");
    std::vector<std::string> parts;
    std::stringstream ps(item.substr(eq + 1));
    std::string p;
    while (std::getline(ps, p, ':')) parts.push_back(p);
    try {
      if (parts.size() == 1) {
        const double v = std::stod(parts[0]);
        grid[name] = {v, v, 1};
      } else if (parts.size() == 3) {
        grid[name] = {std::stod(parts[0]), std::stod(parts[1]),
                      static_cast<std::size_t>(std::stoul(parts[2]))};
      } else {
        throw config::ConfigError("grid axis '" + name + "' must be lo:hi:n or a value");
      }
    } catch (const std::logic_error&) {
      throw config::ConfigError("grid axis '" + name + "' has a malformed number");
    }
    if (grid[name].n == 0) throw config::ConfigError("grid axis '" + name + "' has zero points");
  }
  return grid;
}

int cmd_sweep(const Options& opt) {
  const Scenario scn = load_scenario(load_document(opt), opt);
  const auto grid = parse_grid(opt.grid);
  auto axis = [&](const char* name) {
    const Range& r = grid.at(name);
    return linspace(r.lo, r.hi, r.n);
  };
  const auto z0s = axis("z0");
  const auto dtaus = axis("dtau");
  const auto k1s = axis("k1");
  const auto k2s = axis("k2");

  const fs::path out = prepare_out(opt);
  std::ofstream csv(out / "sweep.csv");
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  csv << std::setprecision(17);
  json cells = json::array();
  bool all_non_empty = true;
  bool header = true;
  for (const double z0 : z0s) {
    ModelParams params = scn.params;
    params.z0 = z0;
    const double fbar =
        stiffness_supremum(scn.profile, 0.0, scn.duration, z0, params.g) + scn.fbar_margin;
    const std::vector<double> fbar_values{fbar};
    const auto raster = sweep_stability_region(fbar_values, dtaus, k1s, k2s);
    std::ostringstream chunk;
    chunk << std::setprecision(17);
    io::write_sweep_csv(chunk, raster);
    std::string text = chunk.str();
    if (!header) text = text.substr(text.find('\n') + 1);
    header = false;
    csv << text;
    for (const auto& region : raster.regions) {
      const auto ref = make_reference(scn.v_des, region.dtau, params);
      const auto qp = build_qp(fbar, region.dtau, State2d::Zero().eval(), ref.u_xr, params, scn.qp);
      const auto sol = solve_qp(qp);
      const bool feasible = sol.status == QpStatus::Optimal;
      all_non_empty = all_non_empty && region.non_empty() && feasible;
      cells.push_back({{"z0_m", z0},
                       {"fbar", fbar},
                       {"dtau_s", region.dtau},
                       {"n_stable", region.n_stable},
                       {"n_cells", region.n_cells},
                       {"qp_feasible", feasible},
                       {"K", io::vector_json(sol.K)}});
    }
  }
  io::write_json(out / "sweep_regions.json", {{"all_non_empty", all_non_empty}, {"cells", cells}});
  std::cout << "cells " << cells.size() << "  all non-empty: " << (all_non_empty ? "yes" : "no")
            << '\n';
  return kExitOk;
}

template <typename M>
void read_matrix(const json& j, const char* key, M& m, Eigen::Index rows, Eigen::Index cols) {
  if (!j.contains(key)) throw config::ConfigError(std::string("instance lacks '") + key + "'");
  const json& v = j.at(key);
  if (rows < 0) rows = static_cast<Eigen::Index>(v.size());
  m.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = cols == 1 && !v.at(r).is_array() ? v.at(r).get<double>()
                                                 : v.at(r).at(c).get<double>();
}

QpProblem2d load_instance(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw config::ConfigError("cannot read instance '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config::ConfigError(std::string("instance: ") + e.what());
  }
  QpProblem2d qp;
  try {
    Eigen::MatrixXd S, E, c, d;
    read_matrix(j, "S", S, 2, 2);
    read_matrix(j, "c", c, 2, 1);
    read_matrix(j, "E", E, -1, 2);
    read_matrix(j, "d", d, E.rows(), 1);
    qp.S = S;
    qp.c = c;
    qp.E = E;
    qp.d = d;
    qp.eps = j.value("eps", 0.0);
    qp.phi_bar.setZero();
    if (j.contains("phi_bar")) {
      Eigen::MatrixXd P;
      read_matrix(j, "phi_bar", P, 2, 2);
      qp.phi_bar = P;
    }
  } catch (const json::exception& e) {
    throw config::ConfigError(std::string("instance: ") + e.what());
  }
  return qp;
}

int cmd_qp_debug(const Options& opt) {
  QpProblem2d qp;
  if (!opt.instance.empty()) {
    qp = load_instance(opt.instance);
  } else {
    const Scenario scn = load_scenario(load_document(opt), opt);
    const auto ref = scn.reference();
    const double dtau = scn.params.dtau;
    const double fbar = stiffness_supremum(scn.profile, 0.0, dtau, scn.params.z0, scn.params.g) +
                        scn.fbar_margin;
    qp = build_qp(fbar, dtau, scn.e0, ref.u_xr, scn.params, scn.qp);
  }
  const auto sol = solve_qp(qp);
  const fs::path out = prepare_out(opt);
  io::write_json(out / "qp.json", io::qp_json(qp, sol));
  std::cout << "status " << to_string(sol.status) << "  K [" << sol.K(0) << ", " << sol.K(1)
            << "]\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Footstep planning for a pendulum walker on a vertically moving surface"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    auto* s = sub->add_option("--scenario", opt.scenario, "Scenario file");
    if (needs_scenario) s->required();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--override", opt.overrides, "section.key=value (repeatable)");
    sub->add_option("--seed", opt.seed, "Random seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Closed-loop run with logs");
  add_common(simulate, true);
  auto* sweep = app.add_subcommand("sweep", "Stability-region raster over model parameters");
  add_common(sweep, false);
  sweep->add_option("--grid", opt.grid, "z0=lo:hi:n,dtau=lo:hi:n,k1=lo:hi:n,k2=lo:hi:n");
  auto* mc = app.add_subcommand("montecarlo", "Randomized trials");
  add_common(mc, true);
  mc->add_option("--trials", opt.trials, "Number of trials");
  mc->add_option("--threads", opt.threads, "Worker threads (0 = hardware)");
  auto* compare = app.add_subcommand("compare", "QP controller against the static-surface gain");
  add_common(compare, true);
  auto* qp = app.add_subcommand("qp-debug", "Solve one footstep QP and dump it");
  add_common(qp, false);
  qp->add_option("--instance", opt.instance, "Saved QP instance (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*mc) return cmd_montecarlo(opt);
    if (*compare) return cmd_compare(opt);
    if (*qp) return cmd_qp_debug(opt);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
