#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfb/control.hpp"
#include "qfb/metrics.hpp"
#include "qfb/model.hpp"
#include "qfb/sde.hpp"

namespace qfb {

/// Initial state: a named preset ("psi+", "psi-", "phi+", "phi-", "mixed",
/// "fig1_diag") or explicit entries (name empty).
struct InitialState {
  std::string name;
  DensityMatrix rho;

  static InitialState named(const std::string& name);
  static InitialState explicit_matrix(const Mat4& m);
  bool operator==(const InitialState&) const = default;
};

struct CampaignConfig {
  std::string preset;  // informational: the preset this config was expanded from
  int n_traj = 1000;
  ModelParams model;
  Controller controller;
  SdeConfig sde;
  InitialState rho0 = InitialState::named("fig1_diag");
  std::string out_dir = "out";
  int workers = 1;
  double classify_tol = 0.05;
  /// Exponent fit window; unset means [0.2, 0.8] * t_final.
  std::optional<double> fit_t_lo;
  std::optional<double> fit_t_hi;
  bool write_trajectories = false;

  /// Throws ValidationError naming the offending key.
  void validate() const;
  double window_lo() const { return fit_t_lo.value_or(0.2 * sde.t_final); }
  double window_hi() const { return fit_t_hi.value_or(0.8 * sde.t_final); }
  bool operator==(const CampaignConfig&) const = default;
};

enum class ReferenceKind { Qsr, Feedback };

/// qsr: 4 sqrt(3) d_B(rho0, Bell set) e^{-C t}; feedback: sqrt(2) d_B(rho0, target) e^{-C t},
/// with C the model's rate constant.
ScalarSeries reference_curve(const DensityMatrix& rho0, const ModelParams& params,
                             ReferenceKind kind, BellLabel target,
                             const std::vector<double>& times);

struct TrajectoryResult {
  bool failed = false;
  std::string failure;
  std::vector<double> distance;  // d_B to target (controlled) or to the Bell set (u = 0)
  std::vector<double> lyapunov;  // lyapunov_qsr (u = 0) or lyapunov_fb
  std::vector<double> fidelity;  // X_target, only when trajectories are written
  std::vector<ControlVector> controls;
  std::optional<BellLabel> limit;
  double clipped_mass = 0.0;
  std::int64_t eigensolver_steps = 0;
  std::int64_t steps = 0;
};

struct EnsembleSummary {
  ScalarSeries mean_bures;
  ScalarSeries mean_V;
  ScalarSeries reference;
  std::map<BellLabel, int> counts;
  std::map<BellLabel, double> frequencies;
  double unconverged_frequency = 0.0;
  ExponentFit exponent;  // fit of log E[V] over the window
  /// Per-trajectory slope of log d_B over the window; NaN where the fit fails.
  std::vector<double> trajectory_exponents;
  std::vector<double> final_distance;
  double reference_exponent = 0.0;  // -C
  int n_traj = 0;
  int n_failed = 0;
  double mean_clipped_per_step = 0.0;
  double eigensolver_fraction = 0.0;
};

/// Runs one trajectory with the campaign's settings. Never throws for numerical
/// failure; the result is flagged instead.
TrajectoryResult run_trajectory(const CampaignConfig& cfg, const OperatorSet& ops,
                                const FeedbackLaw& law, std::uint64_t index);

/// Deterministic post-pass over an index-ordered result buffer.
EnsembleSummary aggregate(const CampaignConfig& cfg, const std::vector<double>& times,
                          const std::vector<TrajectoryResult>& results);

struct CampaignResult {
  EnsembleSummary summary;
  std::vector<double> times;
  std::vector<TrajectoryResult> trajectories;
};

/// Runs cfg.n_traj trajectories on cfg.workers threads. Throws CampaignFailure
/// if more than 1% of the trajectories fail.
CampaignResult run_campaign_detailed(const CampaignConfig& cfg);
EnsembleSummary run_campaign(const CampaignConfig& cfg);

/// summary.json, series.csv and (optionally) trajectory_NNNNN.csv under dir.
void write_outputs(const CampaignConfig& cfg, const CampaignResult& result,
                   const std::string& dir);

}  // namespace qfb
