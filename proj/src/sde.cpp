#include "qfb/sde.hpp"

#include <algorithm>
#include <cmath>

namespace qfb {

namespace {

constexpr double kMinTraceBeforeNormalization = 0.5;
constexpr double kProjectionHermitianTol = 1e-6;

Mat4 normalized(const Mat4& m) {
  const double tr = trace(m).real();
  return (1.0 / tr) * m;
}

}  // namespace

void SdeConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidParameter, what); };
  if (!(dt > 0.0 && dt <= 1e-2)) bad("dt must lie in (0, 1e-2]");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) bad("t_final must be positive");
  if (!(projection_tol >= 1e-12 && projection_tol <= 1e-6))
    bad("projection_tol must lie in [1e-12, 1e-6]");
  if (log_stride < 1) bad("log_stride must be positive");
  if (noise_refinement < 0 || noise_refinement > 20) bad("noise_refinement must lie in [0, 20]");
}

std::int64_t SdeConfig::n_steps() const {
  return static_cast<std::int64_t>(std::llround(t_final / dt));
}

ProjectionResult project_to_physical(const Mat4& m, double tol, double max_clipped_mass) {
  if (!all_finite(m)) throw Error(ErrorKind::NonFinite, "projection input has non-finite entries");
  const double defect = hermitian_defect(m);
  if (defect > kProjectionHermitianTol)
    throw Error(ErrorKind::NonHermitianInput,
                "projection input asymmetry " + std::to_string(defect) + " exceeds 1e-6");
  const Mat4 h = hermitize(m);
  const double tr = trace(h).real();
  if (tr < kMinTraceBeforeNormalization)
    throw Error(ErrorKind::ProjectionFailure, "trace " + std::to_string(tr) + " below 0.5");

  if (is_positive_definite(h)) return {DensityMatrix::trusted(normalized(h)), 0.0, false};

  EigDecomp4 e = herm_eig(h);
  double clipped = 0.0;
  for (double& lambda : e.eigenvalues) {
    if (lambda < 0.0) {
      if (lambda < -tol) clipped -= lambda;
      lambda = 0.0;
    }
  }
  if (clipped > max_clipped_mass)
    throw Error(ErrorKind::ProjectionFailure, "clipped eigenvalue mass " + std::to_string(clipped) +
                                                  " exceeds " + std::to_string(max_clipped_mass));
  const Mat4 repaired = hermitize(e.reconstruct());
  const double tr_repaired = trace(repaired).real();
  if (tr_repaired < kMinTraceBeforeNormalization)
    throw Error(ErrorKind::ProjectionFailure, "trace after clipping below 0.5");
  return {DensityMatrix::trusted(normalized(repaired)), clipped, true};
}

StepResult em_step(const DensityMatrix& rho, const ControlVector& u, const OperatorSet& ops,
                   std::span<const double> dW, double dt, double projection_tol) {
  if (dW.size() != static_cast<std::size_t>(ops.n_channels))
    throw Error(ErrorKind::DimensionMismatch, "one Wiener increment per channel expected");
  if (dt == 0.0 && std::all_of(dW.begin(), dW.end(), [](double w) { return w == 0.0; }))
    return {rho, 0.0};

  const VectorFields f = sme_fields(rho.matrix(), u.span(), ops);
  Mat4 next = rho.matrix();
  next += dt * f.drift;
  for (int k = 0; k < ops.n_channels; ++k) next += dW[k] * f.diffusion[k];
  if (!all_finite(next)) throw Error(ErrorKind::NonFinite, "Euler-Maruyama update is not finite");

  const ProjectionResult p = project_to_physical(next, projection_tol, kStepClippedMassLimit);
  return {p.rho, p.clipped_mass};
}

StepResult em_step(const DensityMatrix& rho, const FeedbackLaw& law, const OperatorSet& ops,
                   std::span<const double> dW, double dt, double projection_tol) {
  return em_step(rho, law(rho.matrix()), ops, dW, dt, projection_tol);
}

TrajectoryStats integrate_trajectory(const DensityMatrix& rho0, const FeedbackLaw& law,
                                     const OperatorSet& ops, const SdeConfig& cfg,
                                     const WienerStream& stream,
                                     const TrajectoryObserver& observer) {
  cfg.validate();
  const std::int64_t n = cfg.n_steps();
  TrajectoryStats stats;
  DensityMatrix rho = rho0;
  std::array<double, 2> dw{};
  const auto channels = static_cast<std::size_t>(ops.n_channels);

  for (std::int64_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    const ControlVector u = law(rho.matrix());
    if (observer && (step % cfg.log_stride == 0 || step == n)) observer(t, rho, u);
    if (step == n) break;

    dw = stream.increments(static_cast<std::uint64_t>(step));
    try {
      const VectorFields f = sme_fields(rho.matrix(), u.span(), ops);
      Mat4 next = rho.matrix();
      next += cfg.dt * f.drift;
      for (std::size_t k = 0; k < channels; ++k) next += dw[k] * f.diffusion[k];
      if (!all_finite(next))
        throw Error(ErrorKind::NonFinite, "Euler-Maruyama update is not finite");
      ProjectionResult p = project_to_physical(next, cfg.projection_tol, kStepClippedMassLimit);
      stats.total_clipped_mass += p.clipped_mass;
      stats.eigensolver_steps += p.used_eigensolver ? 1 : 0;
      rho = p.rho;
    } catch (const Error& e) {
      throw StepFailure(e, t);
    }
    ++stats.steps;
  }
  return stats;
}

TrajectoryRecord integrate_trajectory(const DensityMatrix& rho0, const Controller& ctl,
                                      const OperatorSet& ops, const SdeConfig& cfg,
                                      std::uint64_t trajectory_index, bool record_noise) {
  cfg.validate();
  const FeedbackLaw law(ctl, ops);
  const WienerStream stream(cfg.seed, trajectory_index, std::ldexp(cfg.dt, cfg.noise_refinement),
                            cfg.noise_refinement);
  TrajectoryRecord rec;
  const TrajectoryStats stats =
      integrate_trajectory(rho0, law, ops, cfg, stream,
                           [&](double t, const DensityMatrix& rho, const ControlVector& u) {
                             rec.times.push_back(t);
                             rec.states.push_back(rho);
                             rec.controls.push_back(u);
                           });
  rec.total_clipped_mass = stats.total_clipped_mass;
  rec.eigensolver_steps = stats.eigensolver_steps;
  rec.steps = stats.steps;
  if (record_noise) {
    rec.noise_path.reserve(static_cast<std::size_t>(cfg.n_steps()));
    for (std::int64_t s = 0; s < cfg.n_steps(); ++s)
      rec.noise_path.push_back(stream.increments(static_cast<std::uint64_t>(s)));
  }
  return rec;
}

SupportInput reachability_input(BellLabel target, double gain, double cap) {
  const BellState b = bell(target);
  const Mat4 lz = lz_operator();
  const Mat4 lx = lx_operator();
  return [b, lz, lx, gain, cap](double, const DensityMatrix& rho) -> std::array<double, 2> {
    const double x = fidelity_X(rho.matrix(), b);
    const double p1 = b.lz_eigenvalue - trace_product(lz, rho.matrix()).real();
    const double p2 = b.lx_eigenvalue - trace_product(lx, rho.matrix()).real();
    auto capped = [&](double p) {
      if (p == 0.0) return 0.0;
      if (x <= 0.0) return std::copysign(cap, p);
      return std::clamp(gain * p / x, -cap, cap);
    };
    return {capped(p1), capped(p2)};
  };
}

SupportTrajectory integrate_support_ode(const DensityMatrix& rho0, const SupportInput& v,
                                        const FeedbackLaw& law, const OperatorSet& ops, double dt,
                                        double t_final, int log_stride) {
  if (!(dt > 0.0) || !(t_final > 0.0))
    throw Error(ErrorKind::InvalidParameter, "dt and t_final must be positive");
  if (log_stride < 1) throw Error(ErrorKind::InvalidParameter, "log_stride must be positive");

  auto field = [&](const Mat4& rho, const std::array<double, 2>& input) {
    Mat4 out = drift_F0(rho, law(rho).span(), ops);
    for (int j = 0; j < ops.n_channels; ++j) {
      out += support_Fhat(rho, j, ops);
      out += (ops.sqrt_eta[j] * input[j]) * diffusion_Gk(rho, ops.L[j]);
    }
    return out;
  };

  const auto n = static_cast<std::int64_t>(std::llround(t_final / dt));
  SupportTrajectory traj;
  DensityMatrix rho = rho0;
  for (std::int64_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * dt;
    if (step % log_stride == 0 || step == n) {
      traj.times.push_back(t);
      traj.states.push_back(rho);
    }
    if (step == n) break;
    try {
      const auto input = v(t, rho);
      const Mat4& y = rho.matrix();
      const Mat4 k1 = field(y, input);
      const Mat4 k2 = field(y + (0.5 * dt) * k1, input);
      const Mat4 k3 = field(y + (0.5 * dt) * k2, input);
      const Mat4 k4 = field(y + dt * k3, input);
      const Mat4 next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!all_finite(next)) throw Error(ErrorKind::NonFinite, "support step is not finite");
      rho = project_to_physical(next, 1e-12, kStepClippedMassLimit).rho;
    } catch (const Error& e) {
      throw StepFailure(e, t);
    }
  }
  return traj;
}

}  // namespace qfb
