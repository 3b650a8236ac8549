#include "htlip/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace htlip::io {

namespace {

std::ofstream open_or_throw(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_trajectory_csv(std::ostream& out, const AxisTrace& trace) {
  out << "t,x,xdot,x_ref,e,u_xd,k1,k2,a_dn,fbar,z_s,zdd_s\n";
  for (const auto& s : trace.samples) {
    out << s.t << ',' << s.x << ',' << s.xdot << ',' << s.x_ref << ',' << s.e << ',' << s.u_xd
        << ',' << s.k1 << ',' << s.k2 << ',' << s.a_dn << ',' << s.fbar << ',' << s.z_s << ','
        << s.zdd_s << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const AxisTrace& trace) {
  auto out = open_or_throw(path);
  write_trajectory_csv(out, trace);
}

json step_log_json(const StepLog& s) {
  return {
      {"n", s.n},
      {"axis", to_string(s.axis)},
      {"tau_minus", s.tau_minus},
      {"tau_plus", s.tau_plus},
      {"x_minus", vector_json(s.x_minus)},
      {"x_plus", vector_json(s.x_plus)},
      {"e_minus", vector_json(s.e_minus)},
      {"u_xd", s.u_xd},
      {"gain", vector_json(s.gain)},
      {"fbar", s.fbar},
      {"fbar_true", s.fbar_true},
      {"dtau_next", s.dtau_next},
      {"a_dn", s.a_dn},
      {"certificate_stable", s.certificate_stable},
      {"qp_status", to_string(s.status)},
      {"disturbed", s.disturbed},
      {"contraction_ratio", number_or_null(s.contraction_ratio)},
  };
}

json step_logs_json(const RunResult& run) {
  json out = json::array();
  for (const auto& s : run.x.steps) out.push_back(step_log_json(s));
  if (run.y)
    for (const auto& s : run.y->steps) out.push_back(step_log_json(s));
  return out;
}

json summary_json(const RunSummary& s) {
  return {
      {"steps", s.steps},
      {"final_error", s.final_error},
      {"max_error", s.max_error},
      {"max_contraction_ratio", s.max_contraction_ratio},
      {"contraction_checked", s.contraction_checked},
      {"contraction_violations", s.contraction_violations},
      {"qp_infeasible", s.qp_infeasible},
      {"fallback_steps", s.fallback_steps},
      {"certificate_failures", s.certificate_failures},
      {"step_drift", s.step_drift},
      {"diverged", s.diverged},
      {"divergence_step", s.divergence_step},
  };
}

json monte_carlo_json(const MonteCarloSummary& mc, std::uint64_t base_seed) {
  json trials = json::array();
  for (const auto& t : mc.trials) {
    trials.push_back({{"seed", t.seed},
                      {"success", t.success},
                      {"max_error", t.summary.max_error},
                      {"final_error", t.summary.final_error},
                      {"max_contraction_ratio", t.summary.max_contraction_ratio},
                      {"qp_infeasible", t.summary.qp_infeasible},
                      {"diverged", t.summary.diverged}});
  }
  return {
      {"base_seed", base_seed},
      {"n_trials", mc.n_trials},
      {"successes", mc.successes},
      {"success_rate", mc.success_rate},
      {"mean_contraction_ratio", mc.mean_contraction_ratio},
      {"max_contraction_ratio", mc.max_contraction_ratio},
      {"max_error", mc.max_error},
      {"mean_max_error", mc.mean_max_error},
      {"trials", trials},
  };
}

json qp_json(const QpProblem2d& qp, const QpSolution2d& sol) {
  json j = {
      {"S", matrix_json(qp.S)},
      {"c", vector_json(qp.c)},
      {"E", matrix_json(qp.E)},
      {"d", vector_json(qp.d)},
      {"eps", qp.eps},
      {"phi_bar", matrix_json(qp.phi_bar)},
      {"status", to_string(sol.status)},
      {"K", vector_json(sol.K)},
      {"active_set", sol.active_set},
      {"multipliers", vector_json(sol.multipliers)},
      {"cost", number_or_null(sol.cost)},
      {"systems_solved", sol.systems_solved},
  };
  if (sol.status == QpStatus::Optimal) {
    const auto r = kkt_residuals(qp, sol);
    j["kkt"] = {{"stationarity", r.stationarity},
                {"complementarity", r.complementarity},
                {"primal_violation", r.primal_violation},
                {"dual_violation", r.dual_violation}};
  } else {
    j["phase1_violation"] = sol.phase1_violation;
  }
  return j;
}

void write_sweep_csv(std::ostream& out, const StabilityRaster& raster) {
  out << "fbar,dtau,k1,k2,row1,row2,a_dn,stable\n";
  for (const auto& c : raster.cells) {
    out << c.fbar << ',' << c.dtau << ',' << c.k1 << ',' << c.k2 << ',' << c.report.row1 << ','
        << c.report.row2 << ',' << c.report.a_dn << ',' << (c.report.stable ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const StabilityRaster& raster) {
  auto out = open_or_throw(path);
  write_sweep_csv(out, raster);
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_or_throw(path);
  out << j.dump(2) << '\n';
}

}  // namespace htlip::io
