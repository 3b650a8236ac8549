#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace htlip {

/// [x, xdot]: CoM position and velocity relative to the support point.
template <typename Scalar>
using State = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Transition = Eigen::Matrix<Scalar, 2, 2>;

/// Footstep feedback gain [k1, k2]; k2 carries seconds.
template <typename Scalar>
using Gain = Eigen::Matrix<Scalar, 1, 2>;

using State2d = State<double>;
using Transition2d = Transition<double>;
using Gain2d = Gain<double>;

/// Thrown when inputs violate a documented precondition or the model's
/// validity domain (e.g. non-positive stiffness).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelParams {
  double z0 = 0.25;     // m, CoM height above the CoP
  double g = 9.81;      // m/s^2
  double mu = 0.8;      // friction coefficient
  double u_min = -0.15; // m
  double u_max = 0.15;  // m
  double dtau = 0.3;    // s, nominal continuous-phase duration

  // Bounds on dtau accepted at validation (bounded phase durations).
  static constexpr double kMinDtau = 0.05;
  static constexpr double kMaxDtau = 1.0;

  void validate() const {
    if (!(z0 > 0.0)) throw ModelError("z0 must be positive");
    if (!(g > 0.0)) throw ModelError("g must be positive");
    if (!(mu > 0.0)) throw ModelError("mu must be positive");
    if (!(u_min < u_max)) throw ModelError("u_min must be below u_max");
    if (!(dtau >= kMinDtau && dtau <= kMaxDtau))
      throw ModelError("dtau outside [" + std::to_string(kMinDtau) + ", " +
                       std::to_string(kMaxDtau) + "] s");
  }

  /// Nominal static-surface stiffness g / z0.
  double nominal_stiffness() const { return g / z0; }
};

}  // namespace htlip
