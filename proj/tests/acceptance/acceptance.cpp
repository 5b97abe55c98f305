// Acceptance suite: one PASS/FAIL line per criterion, with measured values.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "qfb/checks.hpp"
#include "qfb/config.hpp"
#include "qfb/ensemble.hpp"
#include "qfb/error.hpp"
#include "qfb/metrics.hpp"
#include "qfb/sde.hpp"

using namespace qfb;

namespace {

constexpr std::uint64_t kSeed = 20240601;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

CampaignConfig campaign(const std::string& preset, int n, double t_final) {
  CampaignConfig c = expand_preset(preset);
  c.n_traj = n;
  c.sde.t_final = t_final;
  c.sde.seed = kSeed;
  c.workers = workers();
  return c;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rel_change(double a, double b) { return std::abs(b - a) / std::abs(a); }

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.passed) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared between criteria 1 and 10.
double qsr_exponent_coarse = std::nan("");
// Shared between criteria 3 and 10: median per-trajectory slope, fig2.
double stab2_median_fine = std::nan("");

Outcome qsr_rate() {
  CampaignConfig c = campaign("fig1_qsr", 1000, 10.0);
  c.fit_t_lo = 2.0;
  c.fit_t_hi = 8.0;
  const EnsembleSummary s = run_campaign(c);
  double worst_ratio = 0.0;
  std::size_t above = 0;
  for (std::size_t i = 0; i < s.mean_bures.size(); ++i) {
    worst_ratio = std::max(worst_ratio, s.mean_bures.values[i] / s.reference.values[i]);
    if (s.mean_bures.values[i] > s.reference.values[i]) ++above;
  }
  qsr_exponent_coarse = s.exponent.slope;
  const bool ok = above == 0 && s.exponent.slope <= -0.3 + 0.05 && s.n_failed == 0;
  return {ok, fmt("grid points above reference=%zu of %zu, max E[d_B]/reference=%.4f, "
                  "slope of log E[V] on [2,8]=%.4f (bound -0.25), failed=%d",
                  above, s.mean_bures.size(), worst_ratio, s.exponent.slope, s.n_failed)};
}

Outcome qsr_probabilities() {
  const EnsembleSummary s = run_campaign(campaign("fig1_qsr", 1000, 30.0));
  const double expected[4] = {0.30, 0.30, 0.20, 0.20};
  bool ok = s.n_failed == 0;
  std::string d;
  for (int b = 0; b < 4; ++b) {
    const double f = s.frequencies.at(kAllBell[b]);
    ok = ok && std::abs(f - expected[b]) <= 0.05;
    d += fmt("%s=%.3f (want %.2f) ", std::string(to_string(kAllBell[b])).c_str(), f, expected[b]);
  }
  d += fmt("unconverged=%.3f failed=%d", s.unconverged_frequency, s.n_failed);
  return {ok, d};
}

Outcome two_channel() {
  bool ok = true;
  std::string d;
  for (const char* preset : {"fig2_stab2_psi+", "fig3_stab2_phi-"}) {
    const CampaignConfig c = campaign(preset, 500, 10.0);
    const EnsembleSummary s = run_campaign(c);
    std::size_t fast = 0;
    for (double e : s.trajectory_exponents)
      if (std::isfinite(e) && e <= -0.3 + 0.05) ++fast;
    const double frac = static_cast<double>(fast) / s.n_traj;
    const double target_freq = s.frequencies.at(c.model.target);
    const double med = median(s.trajectory_exponents);
    if (c.model.target == BellLabel::PsiPlus) stab2_median_fine = med;
    ok = ok && frac >= 0.95 && target_freq >= 0.99;
    d += fmt("%s: slope<=-0.25 fraction=%.3f (want >=0.95), target frequency=%.3f "
             "(want >=0.99), median slope=%.3f, dt=%g, failed=%d; ",
             preset, frac, target_freq, med, c.sde.dt, s.n_failed);
  }
  return {ok, d};
}

Outcome one_channel() {
  bool ok = true;
  std::string d;
  for (const char* preset : {"fig4_stab1_psi+", "fig5_stab1_phi-"}) {
    const EnsembleSummary s = run_campaign(campaign(preset, 500, 30.0));
    std::size_t close = 0;
    for (double x : s.final_distance)
      if (x < 0.1) ++close;
    const double frac = static_cast<double>(close) / s.n_traj;
    ok = ok && frac >= 0.90;
    d += fmt("%s: final d_B<0.1 fraction=%.3f (want >=0.90), dt=%g, failed=%d; ", preset, frac,
             campaign(preset, 1, 1.0).sde.dt, s.n_failed);
  }
  return {ok, d};
}

Outcome lyapunov_suite() {
  const CheckReport r = check_qsr_lyapunov(ModelParams{}, 10000, kSeed);
  return {r.passed, fmt("samples=%zu, max(LV + 0.3 V)=%.4g (tolerance 1e-3), max(LV/V)=%.4f",
                        r.samples, r.value("max(LV + C V)"), r.value("max(LV / V)"))};
}

Outcome sandwich() {
  const CheckReport r = check_bures_sandwich(100000, kSeed);
  return {r.passed, fmt("samples=%zu, violations=%.0f, V/d_B in [%.4f, %.4f] vs [%.4f, %.4f]",
                        r.samples, r.value("violations"), r.value("min V/d_B"),
                        r.value("max V/d_B"), 1.0 / std::sqrt(6.0), 2.0 * std::sqrt(2.0))};
}

Outcome feedback_conditions() {
  bool ok = true;
  std::string d;
  for (BellLabel t : {BellLabel::PsiPlus, BellLabel::PhiMinus}) {
    ModelParams p;
    p.target = t;
    const CheckReport r = check_feedback_theta(p, Controller::two_channel(t), 100000, 100, kSeed);
    ok = ok && r.passed;
    d += fmt("%s: sup |Theta|/(1-X)=%.4f, worst ratio(1e-4)/ratio(1e-1)=%.3g (want <=1e-2), "
             "path failures=%.0f/100; ",
             std::string(to_string(t)).c_str(), r.value("sup |Theta_u| / (1 - X)"),
             r.value("max |ratio(1e-4)| / |ratio(1e-1)|"), r.value("path failures"));
  }
  return {ok, d};
}

Outcome martingale() {
  const CheckReport r = check_martingale_drift(ModelParams{}, 10000, kSeed);
  return {r.passed, fmt("samples=%zu, max|drift Lambda2|=%.3g, max|drift Gamma|=%.3g "
                        "(want <=1e-12), max diffusion error=%.3g (want <=1e-10)",
                        r.samples, r.value("max |drift Lambda2|"), r.value("max |drift Gamma|"),
                        r.value("max diffusion coefficient error"))};
}

Outcome reachability() {
  const ModelParams p;
  const OperatorSet ops = operators(p);
  const FeedbackLaw law(Controller::two_channel(BellLabel::PsiPlus), ops);
  const double gain = 5.0;
  const SupportTrajectory tr =
      integrate_support_ode(DensityMatrix::maximally_mixed(),
                            reachability_input(BellLabel::PsiPlus, gain), law, ops, 1e-3, 50.0, 10);
  ScalarSeries d;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    d.times.push_back(tr.times[i]);
    d.values.push_back(bures_to_bell(tr.states[i].matrix(), BellLabel::PsiPlus));
  }
  const auto hit = first_hit_time(d, 0.1);
  if (!hit) return {false, fmt("never entered B_0.1 by t=50; final d_B=%.4f", d.values.back())};
  return {*hit <= 50.0, fmt("gain K=%g, cap 1e3, entered B_0.1 at t=%.3f (want <=50)", gain, *hit)};
}

Outcome discretization() {
  // Criterion 1 exponent, dt 1e-3 vs 5e-4 on a shared Wiener path.
  CampaignConfig fine = campaign("fig1_qsr", 1000, 10.0);
  fine.sde.dt = 5e-4;
  fine.sde.noise_refinement = 1;
  fine.sde.log_stride = 20;
  fine.fit_t_lo = 2.0;
  fine.fit_t_hi = 8.0;
  const double qsr_fine = run_campaign(fine).exponent.slope;
  const double qsr_rel = rel_change(qsr_exponent_coarse, qsr_fine);
  bool ok = qsr_rel < 0.05;
  std::string d = fmt("criterion 1 exponent %.4f -> %.4f (rel change %.3f, want <0.05); ",
                      qsr_exponent_coarse, qsr_fine, qsr_rel);

  // Criterion 3 exponent (fig2 median per-trajectory slope), dt 1e-3 vs 5e-4.
  auto stab2 = [](double dt, int refinement) {
    CampaignConfig c = campaign("fig2_stab2_psi+", 500, 10.0);
    c.sde.dt = dt;
    c.sde.noise_refinement = refinement;
    c.sde.log_stride = static_cast<int>(std::lround(1e-2 / dt));
    return run_campaign(c);
  };
  double coarse = std::nan("");
  try {
    coarse = median(stab2(1e-3, 0).trajectory_exponents);
  } catch (const Error& e) {
    d += std::string("criterion 3 at dt=1e-3: ") + e.what() + "; ";
  }
  const double mid = median(stab2(5e-4, 1).trajectory_exponents);
  if (std::isfinite(coarse)) {
    const double rel = rel_change(coarse, mid);
    ok = ok && rel < 0.05;
    d += fmt("criterion 3 exponent %.4f -> %.4f (rel change %.3f, want <0.05); ", coarse, mid, rel);
  } else {
    ok = false;
  }
  if (std::isfinite(stab2_median_fine))
    d += fmt("informational: criterion 3 exponent dt 5e-4 -> 2.5e-4: %.4f -> %.4f (rel %.3f)", mid,
             stab2_median_fine, rel_change(mid, stab2_median_fine));
  return {ok, d};
}

}  // namespace

int main() {
  std::printf("acceptance suite, seed=%llu, workers=%d\n", static_cast<unsigned long long>(kSeed),
              workers());
  report(1, "reduction rate", qsr_rate);
  report(2, "reduction probabilities", qsr_probabilities);
  report(3, "two-channel exponential stabilization", two_channel);
  report(4, "one-channel asymptotic stabilization", one_channel);
  report(5, "Lyapunov inequality", lyapunov_suite);
  report(6, "sandwich constants", sandwich);
  report(7, "feedback conditions", feedback_conditions);
  report(8, "martingale drift", martingale);
  report(9, "support reachability", reachability);
  report(10, "discretization robustness", discretization);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
