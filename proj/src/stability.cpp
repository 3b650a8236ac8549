#include "htlip/stability.hpp"

namespace htlip {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> v(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + step * static_cast<double>(i);
  v.back() = hi;
  return v;
}

StabilityRaster sweep_stability_region(std::span<const double> fbar_values,
                                       std::span<const double> dtau_values,
                                       std::span<const double> k1_values,
                                       std::span<const double> k2_values, double slack) {
  if (fbar_values.empty() || dtau_values.empty() || k1_values.empty() || k2_values.empty())
    throw ModelError("stability sweep needs non-empty ranges");
  StabilityRaster raster;
  raster.cells.reserve(fbar_values.size() * dtau_values.size() * k1_values.size() *
                       k2_values.size());
  for (double fbar : fbar_values) {
    for (double dtau : dtau_values) {
      SweepRegion region{fbar, dtau};
      for (double k1 : k1_values) {
        for (double k2 : k2_values) {
          const auto report = theorem2_check(fbar, dtau, Gain2d(k1, k2), slack);
          region.n_stable += report.stable ? 1 : 0;
          ++region.n_cells;
          raster.cells.push_back({fbar, dtau, k1, k2, report});
        }
      }
      raster.regions.push_back(region);
    }
  }
  return raster;
}

}  // namespace htlip
