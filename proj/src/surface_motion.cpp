#include "htlip/surface_motion.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace htlip {

namespace {

constexpr std::array<std::string_view, 5> kCaseNames = {"HC1", "HC2", "HC3", "HC4", "HC5"};

double uniform_noise(std::mt19937_64* rng, double amplitude) {
  if (rng == nullptr || amplitude <= 0.0) return 0.0;
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  return dist(*rng);
}

template <typename Fn>
double golden_maximize(Fn&& fn, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  return std::max(fc, fd);
}

// Grid maximum of fn over [t0, t1], refined around the best grid point.
template <typename Fn>
double refined_max(Fn&& fn, double t0, double t1, double step) {
  if (!(t1 >= t0)) throw ModelError("empty interval");
  const auto n = static_cast<long>(std::ceil((t1 - t0) / step));
  double best = fn(t0);
  double best_t = t0;
  for (long i = 1; i <= n; ++i) {
    const double t = std::min(t1, t0 + static_cast<double>(i) * step);
    const double v = fn(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  if (n > 0) {
    const double lo = std::max(t0, best_t - step);
    const double hi = std::min(t1, best_t + step);
    best = std::max(best, golden_maximize(fn, lo, hi));
  }
  return best;
}

}  // namespace

std::string_view to_string(Table1Case c) { return kCaseNames[static_cast<std::size_t>(c)]; }

Table1Case table1_case_from_string(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  for (std::size_t i = 0; i < kCaseNames.size(); ++i)
    if (upper == kCaseNames[i]) return static_cast<Table1Case>(i);
  throw ModelError("unknown surface case '" + std::string(name) + "'");
}

double table1_default_amplitude_deg(Table1Case c) {
  switch (c) {
    case Table1Case::HC1:
    case Table1Case::HC2:
    case Table1Case::HC4:
      return 4.0;
    case Table1Case::HC3:
      return 0.2;
    case Table1Case::HC5:
      return 2.5;
  }
  return 0.0;
}

MotionProfile MotionProfile::static_surface() { return MotionProfile{}; }

MotionProfile MotionProfile::vertical_sinusoid(double amplitude_m, double omega, double phase) {
  MotionProfile p;
  p.kind_ = Kind::Sinusoid;
  p.amplitude_ = amplitude_m;
  p.omega_ = omega;
  p.phase_ = phase;
  return p;
}

MotionProfile MotionProfile::pitch_sinusoid(double amplitude_deg, double omega, double phase,
                                            double lever_arm) {
  MotionProfile p = vertical_sinusoid(amplitude_deg * kDegToRad, omega, phase);
  p.pitch_driven_ = true;
  p.lever_arm_ = lever_arm;
  return p;
}

MotionProfile MotionProfile::table1(Table1Case c, double lever_arm,
                                    std::optional<double> amplitude_deg) {
  if (!(lever_arm > 0.0)) throw ModelError("lever arm must be positive");
  MotionProfile p;
  p.kind_ = Kind::Table1;
  p.case_ = c;
  p.pitch_driven_ = true;
  p.lever_arm_ = lever_arm;
  p.amplitude_ = amplitude_deg.value_or(table1_default_amplitude_deg(c)) * kDegToRad;
  return p;
}

MotionProfile MotionProfile::sampled(std::vector<double> times, std::vector<double> z) {
  if (times.size() != z.size()) throw ModelError("sample buffer: time/value size mismatch");
  if (times.size() < 3) throw ModelError("sample buffer needs at least 3 points");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ModelError("sample times must be strictly increasing");

  // Natural cubic spline: solve the tridiagonal system for knot curvatures.
  const std::size_t n = times.size();
  std::vector<double> m(n, 0.0), diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = times[i] - times[i - 1];
    const double h1 = times[i + 1] - times[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((z[i + 1] - z[i]) / h1 - (z[i] - z[i - 1]) / h0);
  }
  // Thomas sweep on interior rows; m[0] = m[n-1] = 0.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = times[i] - times[i - 1];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    if (i == 1) break;
  }

  MotionProfile p;
  p.kind_ = Kind::Sampled;
  p.times_ = std::move(times);
  p.values_ = std::move(z);
  p.second_derivs_ = std::move(m);
  return p;
}

MotionProfile MotionProfile::sampled_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open sample file '" + path + "'");
  std::vector<double> t, z;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a = 0.0, b = 0.0;
    if (!(ss >> a >> b)) {
      if (first) {
        first = false;
        continue;
      }
      throw ModelError("malformed sample line: '" + line + "'");
    }
    first = false;
    t.push_back(a);
    z.push_back(b);
  }
  return sampled(std::move(t), std::move(z));
}

std::optional<Table1Case> MotionProfile::table1_case() const {
  if (kind_ == Kind::Table1) return case_;
  return std::nullopt;
}

MotionProfile MotionProfile::time_shifted(double offset) const {
  MotionProfile p = *this;
  p.offset_ += offset;
  return p;
}

Jet2<double> MotionProfile::pitch_jet(double t) const {
  const auto tj = Jet2<double>::variable(t + offset_);
  if (kind_ == Kind::Table1) return table1_pitch(case_, amplitude_, tj);
  return amplitude_ * sin(omega_ * tj + phase_);
}

double MotionProfile::pitch(double t) const {
  if (t < 0.0) throw ModelError("profile evaluated at negative time");
  if (!pitch_driven_) throw ModelError("profile kind has no pitch program");
  return pitch_jet(t).v;
}

double MotionProfile::spline_value(double t) const {
  t = std::clamp(t, times_.front(), times_.back());
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - times_.begin()),
                                        times_.size() - 1);
  if (i == 0) i = 1;
  const double t0 = times_[i - 1], t1 = times_[i];
  const double h = t1 - t0;
  const double a = (t1 - t) / h, b = (t - t0) / h;
  return a * values_[i - 1] + b * values_[i] +
         ((a * a * a - a) * second_derivs_[i - 1] + (b * b * b - b) * second_derivs_[i]) *
             (h * h) / 6.0;
}

SurfaceSample MotionProfile::vertical(double t) const {
  if (t < 0.0) throw ModelError("profile evaluated at negative time");
  switch (kind_) {
    case Kind::Static:
      return {};
    case Kind::Sampled: {
      const double h = kFiniteDifferenceStep;
      const double zm = spline_value(t - h), z = spline_value(t), zp = spline_value(t + h);
      return {z, (zp - zm) / (2.0 * h), (zp - 2.0 * z + zm) / (h * h)};
    }
    case Kind::Sinusoid:
    case Kind::Table1: {
      if (pitch_driven_) {
        const auto z = lever_arm_ * sin(pitch_jet(t));
        return {z.v, z.d1, z.d2};
      }
      const auto tj = Jet2<double>::variable(t + offset_);
      const auto z = amplitude_ * sin(omega_ * tj + phase_);
      return {z.v, z.d1, z.d2};
    }
  }
  return {};
}

double MotionProfile::stiffness(double t, double z0, double g) const {
  return (vertical(t).zdd + g) / z0;
}

AccelBoundEstimate estimate_fbar(const MotionProfile& profile, double t_now, double horizon,
                                 double z0, double g, const FbarOptions& opts,
                                 std::mt19937_64* rng) {
  if (!(z0 > 0.0)) throw ModelError("z0 must be positive");
  if (!(horizon > 0.0)) throw ModelError("horizon must be positive");
  const auto n = static_cast<long>(std::ceil(horizon / opts.grid_step));
  double best = -std::numeric_limits<double>::infinity();
  for (long i = 0; i <= n; ++i) {
    const double tau = std::min(t_now + horizon, t_now + static_cast<double>(i) * opts.grid_step);
    best = std::max(best, profile.stiffness(tau, z0, g) + uniform_noise(rng, opts.noise_amplitude));
  }
  const double fbar = best + opts.margin;
  if (!(fbar > 0.0))
    throw ModelError("stiffness bound is not positive: surface near free fall");
  return {fbar, horizon, opts.margin};
}

AccelBoundEstimate estimate_fbar_causal(const MotionProfile& profile, double t_now,
                                        double window, double z0, double g,
                                        const FbarOptions& opts, std::mt19937_64* rng) {
  if (!(window > 0.0)) throw ModelError("window must be positive");
  const double start = std::max(0.0, t_now - window);
  if (t_now <= start) {
    // Nothing observed yet: a single sample at t_now.
    const double fbar =
        profile.stiffness(t_now, z0, g) + uniform_noise(rng, opts.noise_amplitude) + opts.margin;
    if (!(fbar > 0.0))
      throw ModelError("stiffness bound is not positive: surface near free fall");
    return {fbar, window, opts.margin};
  }
  auto est = estimate_fbar(profile, start, t_now - start, z0, g, opts, rng);
  est.window = window;
  return est;
}

double stiffness_supremum(const MotionProfile& profile, double t0, double t1, double z0,
                          double g, double grid_step) {
  return refined_max([&](double t) { return profile.stiffness(t, z0, g); }, t0, t1, grid_step);
}

double stiffness_infimum(const MotionProfile& profile, double t0, double t1, double z0,
                         double g, double grid_step) {
  return -refined_max([&](double t) { return -profile.stiffness(t, z0, g); }, t0, t1,
                      grid_step);
}

double max_abs_vertical_accel(const MotionProfile& profile, double t0, double t1,
                              double grid_step) {
  return refined_max([&](double t) { return std::abs(profile.vertical(t).zdd); }, t0, t1,
                     grid_step);
}

}  // namespace htlip
