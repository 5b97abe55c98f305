#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qfb/control.hpp"
#include "qfb/error.hpp"
#include "qfb/model.hpp"
#include "qfb/rng.hpp"

namespace qfb {

struct SdeConfig {
  double dt = 1e-3;
  double t_final = 10.0;
  /// Negative eigenvalues above -projection_tol are treated as rounding and
  /// are not counted in the reported clipped mass. All negatives are clipped.
  double projection_tol = 1e-12;
  std::uint64_t seed = 42;
  /// Record every log_stride-th step (the final step is always recorded).
  int log_stride = 10;
  /// 0 draws increments directly at dt. r > 0 draws them at dt from a Wiener
  /// path generated at 2^r * dt, so runs that differ only in r share a path.
  int noise_refinement = 0;

  void validate() const;
  std::int64_t n_steps() const;
  bool operator==(const SdeConfig&) const = default;
};

struct ProjectionResult {
  DensityMatrix rho;
  double clipped_mass = 0.0;  // sum of |negative eigenvalues| beyond tolerance
  bool used_eigensolver = false;
};

/// Largest clipped eigenvalue mass a single integration step may produce.
inline constexpr double kStepClippedMassLimit = 1e-3;

/// Hermitize, clip negative eigenvalues, renormalize the trace. Throws
/// ProjectionFailure when the clipped mass exceeds max_clipped_mass or the
/// trace is below 0.5.
ProjectionResult project_to_physical(const Mat4& m, double tol = 1e-12,
                                     double max_clipped_mass = std::numeric_limits<double>::infinity());

struct StepResult {
  DensityMatrix rho;
  double clipped_mass = 0.0;
};

/// One Euler-Maruyama step followed by projection. `dW` holds one increment per
/// measurement channel; `u` is the control evaluated at rho.
StepResult em_step(const DensityMatrix& rho, const ControlVector& u, const OperatorSet& ops,
                   std::span<const double> dW, double dt, double projection_tol = 1e-12);

/// Convenience overload evaluating the feedback law at rho.
StepResult em_step(const DensityMatrix& rho, const FeedbackLaw& law, const OperatorSet& ops,
                   std::span<const double> dW, double dt, double projection_tol = 1e-12);

/// Thrown when a step fails; carries the simulated time of the failing step.
class StepFailure : public Error {
 public:
  StepFailure(const Error& cause, double time)
      : Error(cause.kind(), cause.detail() + " at t=" + std::to_string(time)),
        time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<ControlVector> controls;
  /// noise_path[step] = (dW_1, dW_2); empty unless requested.
  std::vector<std::array<double, 2>> noise_path;
  double total_clipped_mass = 0.0;
  std::int64_t eigensolver_steps = 0;
  std::int64_t steps = 0;
};

/// Called at every logged step with (time, state, control applied at that state).
using TrajectoryObserver =
    std::function<void(double t, const DensityMatrix& rho, const ControlVector& u)>;

struct TrajectoryStats {
  double total_clipped_mass = 0.0;
  std::int64_t eigensolver_steps = 0;
  std::int64_t steps = 0;
};

TrajectoryStats integrate_trajectory(const DensityMatrix& rho0, const FeedbackLaw& law,
                                     const OperatorSet& ops, const SdeConfig& cfg,
                                     const WienerStream& stream,
                                     const TrajectoryObserver& observer);

TrajectoryRecord integrate_trajectory(const DensityMatrix& rho0, const Controller& ctl,
                                      const OperatorSet& ops, const SdeConfig& cfg,
                                      std::uint64_t trajectory_index, bool record_noise = false);

/// Piecewise-constant inputs for the support equation: evaluated once at the
/// start of each step and held over it.
using SupportInput = std::function<std::array<double, 2>(double t, const DensityMatrix& rho)>;

/// The capped reachability input v_j = K P_j(rho) / X(rho) with
/// P_1 = lambda_z - Tr(Lz rho), P_2 = lambda_x - Tr(Lx rho), |v_j| <= cap.
SupportInput reachability_input(BellLabel target, double gain, double cap = 1e3);

struct SupportTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

/// RK4 integration of rho' = F0(rho, u(rho)) + sum_j Fhat_j(rho) + sum_j sqrt(eta_j) G_j(rho) v_j,
/// projecting after each step.
SupportTrajectory integrate_support_ode(const DensityMatrix& rho0, const SupportInput& v,
                                        const FeedbackLaw& law, const OperatorSet& ops, double dt,
                                        double t_final, int log_stride = 1);

}  // namespace qfb
