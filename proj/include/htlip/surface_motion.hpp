#pragma once

#include "htlip/jet.hpp"
#include "htlip/types.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace htlip {

/// Pre-programmed pitch motions of the moving-treadmill experiments.
enum class Table1Case { HC1, HC2, HC3, HC4, HC5 };

std::string_view to_string(Table1Case c);
Table1Case table1_case_from_string(std::string_view name);

/// Default pitch amplitude of each case, in degrees.
double table1_default_amplitude_deg(Table1Case c);

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kDefaultLeverArm = 0.8;  // m, foothold to pitch axis
inline constexpr double kFiniteDifferenceStep = 1e-4;  // s

/// Pitch program theta_s(t) for a table case; `amplitude_rad` scales the
/// bracketed term (HC3 scales the t^2 envelope). Templated so that the same
/// expression serves plain evaluation and exact differentiation via Jet2.
template <typename T>
T table1_pitch(Table1Case c, double amplitude_rad, const T& t) {
  using std::exp;
  using std::sin;
  using std::sqrt;
  switch (c) {
    case Table1Case::HC1:
    case Table1Case::HC4:
    case Table1Case::HC5:
      return amplitude_rad * (sin(3.0 * t) + sin(t * sqrt(0.5 * t + 1.0)));
    case Table1Case::HC2:
      return amplitude_rad * (sin(6.0 * t) + sin(0.1 * (t * t)));
    case Table1Case::HC3:
      return amplitude_rad * (t * t) * sin(sqrt(100.0 * t + 1.0)) * exp(-0.1 * t);
  }
  return T{};
}

/// Vertical surface displacement, velocity and acceleration at one instant.
struct SurfaceSample {
  double z = 0.0;    // m
  double zd = 0.0;   // m/s
  double zdd = 0.0;  // m/s^2
};

/// Vertical motion of the support surface at the foothold.
///
/// Immutable after construction. Analytic kinds are differentiated exactly;
/// sampled profiles are interpolated with a natural cubic spline and
/// differentiated by central differences with step kFiniteDifferenceStep.
class MotionProfile {
 public:
  enum class Kind { Static, Sinusoid, Table1, Sampled };

  static MotionProfile static_surface();
  /// z_s = amplitude_m * sin(omega t + phase).
  static MotionProfile vertical_sinusoid(double amplitude_m, double omega, double phase = 0.0);
  /// theta_s = amplitude_deg * sin(omega t + phase), z_s = r sin theta_s.
  static MotionProfile pitch_sinusoid(double amplitude_deg, double omega, double phase = 0.0,
                                      double lever_arm = kDefaultLeverArm);
  static MotionProfile table1(Table1Case c, double lever_arm = kDefaultLeverArm,
                              std::optional<double> amplitude_deg = std::nullopt);
  /// Time-stamped vertical positions; times strictly increasing, >= 3 points.
  static MotionProfile sampled(std::vector<double> times, std::vector<double> z);
  /// Two-column CSV (t_s, z_s_m); a non-numeric first line is treated as a header.
  static MotionProfile sampled_from_csv(const std::string& path);

  Kind kind() const { return kind_; }
  std::optional<Table1Case> table1_case() const;
  double lever_arm() const { return lever_arm_; }
  /// Shift applied to the time argument: evaluation at t uses t + offset.
  /// Lets tests start a table program mid-run.
  MotionProfile time_shifted(double offset) const;

  /// Pitch angle [rad]. Throws ModelError for kinds without a pitch program.
  double pitch(double t) const;
  /// Vertical displacement and its derivatives; t >= 0.
  SurfaceSample vertical(double t) const;

  /// Stiffness (zdd_s(t) + g) / z0 of the pendulum on this surface.
  double stiffness(double t, double z0, double g) const;

 private:
  MotionProfile() = default;
  Jet2<double> pitch_jet(double t) const;
  double spline_value(double t) const;

  Kind kind_ = Kind::Static;
  Table1Case case_ = Table1Case::HC1;
  bool pitch_driven_ = false;
  double amplitude_ = 0.0;  // rad for pitch-driven kinds, m otherwise
  double omega_ = 0.0;
  double phase_ = 0.0;
  double lever_arm_ = kDefaultLeverArm;
  double offset_ = 0.0;
  std::vector<double> times_, values_, second_derivs_;
};

/// Upper bound on the pendulum stiffness used by the certificate.
struct AccelBoundEstimate {
  double fbar = 0.0;    // s^-2
  double window = 0.0;  // s
  double margin = 0.0;  // s^-2
};

struct FbarOptions {
  double grid_step = 1e-3;  // s
  double margin = 0.0;      // s^-2
  /// Uniform estimation noise on each stiffness sample, in s^-2.
  double noise_amplitude = 0.0;
};

/// Forward-looking bound: max of f over [t_now, t_now + horizon] plus margin.
/// Throws ModelError when the result is not positive.
AccelBoundEstimate estimate_fbar(const MotionProfile& profile, double t_now, double horizon,
                                 double z0, double g, const FbarOptions& opts = {},
                                 std::mt19937_64* rng = nullptr);

/// Causal bound over the backward window [t_now - window, t_now] (clipped at 0).
AccelBoundEstimate estimate_fbar_causal(const MotionProfile& profile, double t_now,
                                        double window, double z0, double g,
                                        const FbarOptions& opts = {},
                                        std::mt19937_64* rng = nullptr);

/// Supremum of the stiffness over [t0, t1], from a fine grid refined by a
/// local golden-section search around the best sample.
double stiffness_supremum(const MotionProfile& profile, double t0, double t1, double z0,
                          double g, double grid_step = 1e-4);
double stiffness_infimum(const MotionProfile& profile, double t0, double t1, double z0,
                         double g, double grid_step = 1e-4);

/// Largest |zdd_s| over [t0, t1] on a uniform grid.
double max_abs_vertical_accel(const MotionProfile& profile, double t0, double t1,
                              double grid_step = 1e-4);

}  // namespace htlip
