#include "qfb/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "qfb/config.hpp"
#include "qfb/error.hpp"

namespace qfb {

InitialState InitialState::named(const std::string& name) {
  InitialState s;
  s.name = name;
  if (name == "mixed") {
    s.rho = DensityMatrix::maximally_mixed();
  } else if (name == "fig1_diag") {
    s.rho = DensityMatrix::from(Mat4::diag(0.2, 0.3, 0.1, 0.4));
  } else {
    s.rho = bell(parse_bell(name)).projector;
  }
  return s;
}

InitialState InitialState::explicit_matrix(const Mat4& m) {
  InitialState s;
  s.rho = DensityMatrix::from(m);
  return s;
}

void CampaignConfig::validate() const {
  auto bad = [](const std::string& key, const std::string& what) {
    throw Error(ErrorKind::ValidationError, key + ": " + what);
  };
  if (n_traj < 1) bad("campaign.n_traj", "must be at least 1");
  if (workers < 1) bad("campaign.workers", "must be at least 1");
  if (!(classify_tol > 0.0)) bad("campaign.classify_tol", "must be positive");
  try {
    model.validate();
  } catch (const Error& e) {
    bad("model", e.detail());
  }
  try {
    controller.validate();
  } catch (const Error& e) {
    bad("controller", e.detail());
  }
  try {
    sde.validate();
  } catch (const Error& e) {
    bad("sde", e.detail());
  }
  if (controller.kind == ControllerKind::TwoChannel && model.n_channels != 2)
    bad("controller.kind", "two_channel requires model.n_channels = 2");
  if (controller.kind == ControllerKind::OneChannel && model.n_channels != 1)
    bad("controller.kind", "one_channel requires model.n_channels = 1");
  if (controller.kind != ControllerKind::Zero && controller.target != model.target)
    bad("controller.target", "must equal model.target");
  if (!(window_lo() < window_hi()) || window_lo() < 0.0 || window_hi() > sde.t_final)
    bad("campaign.fit_t_lo", "fit window must satisfy 0 <= t_lo < t_hi <= t_final");
}

ScalarSeries reference_curve(const DensityMatrix& rho0, const ModelParams& params,
                             ReferenceKind kind, BellLabel target,
                             const std::vector<double>& times) {
  const double c = params.rate_constant();
  const double amplitude = kind == ReferenceKind::Qsr
                               ? 4.0 * std::sqrt(3.0) * bures_to_bell_set(rho0.matrix())
                               : std::sqrt(2.0) * bures_to_bell(rho0.matrix(), target);
  ScalarSeries s;
  s.times = times;
  s.values.reserve(times.size());
  for (double t : times) s.values.push_back(amplitude * std::exp(-c * t));
  return s;
}

namespace {

bool is_uncontrolled(const CampaignConfig& cfg) {
  return cfg.controller.kind == ControllerKind::Zero;
}

std::vector<double> log_times(const SdeConfig& sde) {
  std::vector<double> times;
  const std::int64_t n = sde.n_steps();
  for (std::int64_t s = 0; s <= n; ++s)
    if (s % sde.log_stride == 0 || s == n) times.push_back(static_cast<double>(s) * sde.dt);
  return times;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

TrajectoryResult run_trajectory(const CampaignConfig& cfg, const OperatorSet& ops,
                                const FeedbackLaw& law, std::uint64_t index) {
  TrajectoryResult out;
  const bool qsr = is_uncontrolled(cfg);
  const BellLabel target = cfg.controller.target;
  const WienerStream stream(cfg.sde.seed, index,
                            std::ldexp(cfg.sde.dt, cfg.sde.noise_refinement),
                            cfg.sde.noise_refinement);
  const auto expected = static_cast<std::size_t>(cfg.sde.n_steps() / cfg.sde.log_stride + 2);
  out.distance.reserve(expected);
  out.lyapunov.reserve(expected);
  Mat4 last;
  try {
    const TrajectoryStats stats = integrate_trajectory(
        cfg.rho0.rho, law, ops, cfg.sde, stream,
        [&](double, const DensityMatrix& rho, const ControlVector& u) {
          const Mat4& m = rho.matrix();
          out.distance.push_back(qsr ? bures_to_bell_set(m) : bures_to_bell(m, target));
          out.lyapunov.push_back(qsr ? lyapunov_qsr(m) : lyapunov_fb(m, target));
          if (cfg.write_trajectories) {
            out.fidelity.push_back(1.0 - infidelity(m, target));
            out.controls.push_back(u);
          }
          last = m;
        });
    out.clipped_mass = stats.total_clipped_mass;
    out.eigensolver_steps = stats.eigensolver_steps;
    out.steps = stats.steps;
    out.limit = classify_limit(last, cfg.classify_tol);
  } catch (const Error& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

EnsembleSummary aggregate(const CampaignConfig& cfg, const std::vector<double>& times,
                          const std::vector<TrajectoryResult>& results) {
  EnsembleSummary s;
  s.n_traj = static_cast<int>(results.size());
  s.mean_bures.times = times;
  s.mean_V.times = times;
  s.mean_bures.values.assign(times.size(), 0.0);
  s.mean_V.values.assign(times.size(), 0.0);
  for (BellLabel b : kAllBell) s.counts[b] = 0;

  int ok = 0;
  int unconverged = 0;
  double clipped = 0.0;
  double eig_steps = 0.0, steps = 0.0;
  for (const auto& r : results) {
    if (r.failed) {
      ++s.n_failed;
      s.trajectory_exponents.push_back(std::numeric_limits<double>::quiet_NaN());
      s.final_distance.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    ++ok;
    for (std::size_t i = 0; i < times.size(); ++i) {
      s.mean_bures.values[i] += r.distance[i];
      s.mean_V.values[i] += r.lyapunov[i];
    }
    if (r.limit)
      ++s.counts[*r.limit];
    else
      ++unconverged;
    clipped += r.clipped_mass;
    eig_steps += static_cast<double>(r.eigensolver_steps);
    steps += static_cast<double>(r.steps);
    s.final_distance.push_back(r.distance.back());
    double slope = std::numeric_limits<double>::quiet_NaN();
    try {
      slope = fit_sample_exponent(ScalarSeries{times, r.distance}, cfg.window_lo(),
                                  cfg.window_hi())
                  .slope;
    } catch (const Error&) {
    }
    s.trajectory_exponents.push_back(slope);
  }
  if (ok > 0) {
    for (auto& v : s.mean_bures.values) v /= ok;
    for (auto& v : s.mean_V.values) v /= ok;
  }
  const double n = static_cast<double>(results.size());
  for (BellLabel b : kAllBell) s.frequencies[b] = s.counts[b] / n;
  s.unconverged_frequency = unconverged / n;
  s.mean_clipped_per_step = steps > 0 ? clipped / steps : 0.0;
  s.eigensolver_fraction = steps > 0 ? eig_steps / steps : 0.0;

  const ReferenceKind kind = is_uncontrolled(cfg) ? ReferenceKind::Qsr : ReferenceKind::Feedback;
  s.reference = reference_curve(cfg.rho0.rho, cfg.model, kind, cfg.controller.target, times);
  s.reference_exponent = -cfg.model.rate_constant();
  if (ok > 0) {
    try {
      s.exponent = fit_sample_exponent(s.mean_V, cfg.window_lo(), cfg.window_hi());
    } catch (const Error&) {
      s.exponent.slope = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return s;
}

CampaignResult run_campaign_detailed(const CampaignConfig& cfg) {
  cfg.validate();
  const OperatorSet ops = operators(cfg.model);
  const FeedbackLaw law(cfg.controller, ops);
  CampaignResult out;
  out.times = log_times(cfg.sde);
  out.trajectories.resize(static_cast<std::size_t>(cfg.n_traj));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < out.trajectories.size(); i = next.fetch_add(1))
      out.trajectories[i] = run_trajectory(cfg, ops, law, i);
  };
  const int n_workers = std::min(cfg.workers, cfg.n_traj);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  out.summary = aggregate(cfg, out.times, out.trajectories);
  if (out.summary.n_failed * 100 > cfg.n_traj) {
    std::string first;
    for (const auto& r : out.trajectories)
      if (r.failed) {
        first = r.failure;
        break;
      }
    throw Error(ErrorKind::CampaignFailure, std::to_string(out.summary.n_failed) + " of " +
                                                std::to_string(cfg.n_traj) +
                                                " trajectories failed; first: " + first);
  }
  return out;
}

EnsembleSummary run_campaign(const CampaignConfig& cfg) {
  return run_campaign_detailed(cfg).summary;
}

void write_outputs(const CampaignConfig& cfg, const CampaignResult& result,
                   const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
  const EnsembleSummary& s = result.summary;

  auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  nlohmann::json freq;
  for (BellLabel b : kAllBell) freq[std::string(to_string(b))] = s.frequencies.at(b);
  freq["unconverged"] = s.unconverged_frequency;
  j["frequencies"] = freq;
  j["exponent"] = {{"slope", finite_or_null(s.exponent.slope)},
                   {"intercept", finite_or_null(s.exponent.intercept)},
                   {"t_lo", s.exponent.t_lo},
                   {"t_hi", s.exponent.t_hi},
                   {"r_squared", finite_or_null(s.exponent.r_squared)}};
  j["reference_exponent"] = s.reference_exponent;
  j["n_traj"] = s.n_traj;
  j["n_failed"] = s.n_failed;
  j["mean_clipped_per_step"] = s.mean_clipped_per_step;

  {
    std::ofstream f(fs::path(dir) / "summary.json");
    if (!f) throw Error(ErrorKind::IoError, "cannot write summary.json");
    f << j.dump(2) << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "series.csv");
    if (!f) throw Error(ErrorKind::IoError, "cannot write series.csv");
    f << "t,mean_bures,mean_V,reference\n";
    for (std::size_t i = 0; i < result.times.size(); ++i)
      f << format_number(result.times[i]) << ',' << format_number(s.mean_bures.values[i]) << ','
        << format_number(s.mean_V.values[i]) << ',' << format_number(s.reference.values[i])
        << '\n';
  }
  if (!cfg.write_trajectories) return;
  for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
    const TrajectoryResult& r = result.trajectories[k];
    if (r.failed) continue;
    char name[64];
    std::snprintf(name, sizeof name, "trajectory_%05zu.csv", k);
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw Error(ErrorKind::IoError, std::string("cannot write ") + name);
    f << "t,d_B,V,X,u1,u2\n";
    for (std::size_t i = 0; i < result.times.size(); ++i) {
      const ControlVector& u = r.controls[i];
      f << format_number(result.times[i]) << ',' << format_number(r.distance[i]) << ','
        << format_number(r.lyapunov[i]) << ',' << format_number(r.fidelity[i]) << ','
        << format_number(u.size > 0 ? u[0] : 0.0) << ','
        << format_number(u.size > 1 ? u[1] : 0.0) << '\n';
    }
  }
}

}  // namespace qfb
