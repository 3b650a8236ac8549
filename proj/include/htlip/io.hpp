#pragma once

#include "htlip/footstep_qp.hpp"
#include "htlip/simulation.hpp"
#include "htlip/stability.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <ostream>

namespace htlip::io {

using nlohmann::json;

/// Row-major array of a fixed or dynamic Eigen matrix.
template <typename Derived>
json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

template <typename Derived>
json vector_json(const Eigen::MatrixBase<Derived>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// t,x,xdot,x_ref,e,u_xd,k1,k2,a_dn,fbar,z_s,zdd_s
void write_trajectory_csv(std::ostream& out, const AxisTrace& trace);
void write_trajectory_csv(const std::filesystem::path& path, const AxisTrace& trace);

json step_log_json(const StepLog& s);
json step_logs_json(const RunResult& run);
json summary_json(const RunSummary& s);
json monte_carlo_json(const MonteCarloSummary& mc, std::uint64_t base_seed);

/// S, c, E, d, K, status, active_set, cost plus KKT residuals.
json qp_json(const QpProblem2d& qp, const QpSolution2d& sol);

/// fbar,dtau,k1,k2,row1,row2,a_dn,stable
void write_sweep_csv(std::ostream& out, const StabilityRaster& raster);
void write_sweep_csv(const std::filesystem::path& path, const StabilityRaster& raster);

void write_json(const std::filesystem::path& path, const json& j);

}  // namespace htlip::io
