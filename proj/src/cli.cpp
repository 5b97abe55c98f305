#include "qfb/cli.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfb/checks.hpp"
#include "qfb/config.hpp"
#include "qfb/ensemble.hpp"
#include "qfb/error.hpp"

namespace qfb {
namespace {

struct RunOptions {
  std::string preset;
  std::string config;
  std::optional<int> n_traj;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

struct CheckOptions {
  RunOptions base;
  std::string suite = "all";
  std::optional<std::size_t> samples;
};

void add_common_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--preset", o.preset, "built-in scenario name");
  cmd->add_option("--config", o.config, "config file (sectioned key = value)");
  cmd->add_option("--n-traj", o.n_traj, "number of trajectories");
  cmd->add_option("--seed", o.seed, "noise seed");
  cmd->add_option("--dt", o.dt, "time step");
  cmd->add_option("--t-final", o.t_final, "final time");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads");
}

CampaignConfig resolve_config(const RunOptions& o) {
  if (!o.preset.empty() && !o.config.empty())
    throw Error(ErrorKind::ValidationError, "--preset and --config are mutually exclusive");
  CampaignConfig cfg;
  if (!o.config.empty())
    cfg = parse_config(o.config);
  else if (!o.preset.empty())
    cfg = expand_preset(o.preset);
  else
    cfg = expand_preset("fig1_qsr");
  if (o.n_traj) cfg.n_traj = *o.n_traj;
  if (o.seed) cfg.sde.seed = *o.seed;
  if (o.dt) cfg.sde.dt = *o.dt;
  if (o.t_final) cfg.sde.t_final = *o.t_final;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const CampaignConfig cfg = resolve_config(o);
  const CampaignResult result = run_campaign_detailed(cfg);
  write_outputs(cfg, result, cfg.out_dir);
  const EnsembleSummary& s = result.summary;
  std::string line = "run";
  if (!cfg.preset.empty()) line += " preset=" + cfg.preset;
  line += " n_traj=" + std::to_string(s.n_traj) + " failed=" + std::to_string(s.n_failed);
  for (BellLabel b : kAllBell)
    line += " freq[" + std::string(to_string(b)) + "]=" + fmt(s.frequencies.at(b));
  line += " freq[none]=" + fmt(s.unconverged_frequency);
  line += " exponent=" + fmt(s.exponent.slope);
  line += " reference_exponent=" + fmt(s.reference_exponent);
  line += " out=" + cfg.out_dir;
  out << line << '\n';
  return kExitOk;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"qsr-lyapunov", "bures-sandwich", "feedback-theta",
                                                 "martingale-drift", "feedback-local-rate"};
  return names;
}

CheckReport run_suite(const std::string& suite, const CampaignConfig& cfg,
                      std::optional<std::size_t> samples) {
  const std::uint64_t seed = cfg.sde.seed;
  ModelParams two = cfg.model;
  two.n_channels = 2;
  Controller fb = cfg.controller;
  if (fb.kind != ControllerKind::TwoChannel) fb = Controller::two_channel(cfg.model.target);
  if (suite == "qsr-lyapunov") return check_qsr_lyapunov(two, samples.value_or(10000), seed);
  if (suite == "bures-sandwich") return check_bures_sandwich(samples.value_or(100000), seed);
  if (suite == "feedback-theta")
    return check_feedback_theta(two, fb, samples.value_or(100000), 100, seed);
  if (suite == "martingale-drift") return check_martingale_drift(two, samples.value_or(10000), seed);
  if (suite == "feedback-local-rate")
    return check_feedback_local_rate(two, fb, samples.value_or(2000), seed);
  throw Error(ErrorKind::ValidationError, "suite: unknown suite '" + suite + "'");
}

int cmd_check(const CheckOptions& o, std::ostream& out) {
  const CampaignConfig cfg = resolve_config(o.base);
  std::vector<std::string> suites;
  if (o.suite == "all")
    suites = suite_names();
  else
    suites.push_back(o.suite);
  bool all_passed = true;
  for (const auto& name : suites) {
    const CheckReport r = run_suite(name, cfg, o.samples);
    out << "check " << r.suite << ' ' << (r.passed ? "PASS" : "FAIL") << " samples=" << r.samples
        << '\n';
    for (const auto& [k, v] : r.values) out << "  " << k << " = " << fmt(v) << '\n';
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kExitOk : kExitViolation;
}

int error_exit(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  switch (e.kind()) {
    case ErrorKind::CampaignFailure:
      return kExitCampaign;
    case ErrorKind::IoError:
    case ErrorKind::NonFinite:
    case ErrorKind::ProjectionFailure:
      return kExitRuntime;
    default:
      return kExitValidation;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Measurement-based feedback stabilization of two-qubit Bell states"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run a trajectory campaign and write outputs");
  add_common_flags(run, run_opts);

  CheckOptions check_opts;
  auto* check = app.add_subcommand("check", "pointwise sampling suites");
  add_common_flags(check, check_opts.base);
  check->add_option("--suite", check_opts.suite, "suite name or 'all'")
      ->check(CLI::IsMember([] {
        auto v = suite_names();
        v.push_back("all");
        return v;
      }()));
  check->add_option("--samples", check_opts.samples, "sample count override");

  auto* presets = app.add_subcommand("presets", "list or show built-in scenarios");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "print preset names");
  std::string show_name;
  auto* show = presets->add_subcommand("show", "print a preset as a config file");
  show->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_opts, out);
    if (*check) return cmd_check(check_opts, out);
    if (*list) {
      for (const auto& n : preset_names()) out << n << '\n';
      return kExitOk;
    }
    if (*show) {
      out << serialize_config(expand_preset(show_name));
      return kExitOk;
    }
  } catch (const Error& e) {
    return error_exit(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace qfb
