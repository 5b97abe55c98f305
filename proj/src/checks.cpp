#include "qfb/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qfb/error.hpp"
#include "qfb/metrics.hpp"

namespace qfb {

Mat4 random_density_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat4 g;
  for (auto& z : g.a) z = Cplx(normal(rng), normal(rng));
  const Mat4 p = hermitize(g * adjoint(g));
  return (1.0 / trace(p).real()) * p;
}

double CheckReport::value(const std::string& name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  throw Error(ErrorKind::InvalidParameter, "report has no value '" + name + "'");
}

CheckReport check_qsr_lyapunov(const ModelParams& params, std::size_t samples, std::uint64_t seed,
                               double tol, double h) {
  ModelParams p = params;
  p.n_channels = 2;
  const OperatorSet ops = operators(p);
  const FeedbackLaw law(Controller::zero(p.target), ops);
  const double rate = p.rate_constant();
  std::mt19937_64 rng(seed);

  double worst = -std::numeric_limits<double>::infinity();
  double worst_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const Mat4 rho = random_density_matrix(rng);
    const double v = lyapunov_qsr(rho);
    const double lv = generator_apply(lyapunov_qsr, rho, law, ops, h);
    worst = std::max(worst, lv + rate * v);
    worst_ratio = std::max(worst_ratio, lv / v);
  }
  CheckReport r;
  r.suite = "qsr-lyapunov";
  r.samples = samples;
  r.values = {{"max(LV + C V)", worst}, {"max(LV / V)", worst_ratio}, {"-C", -rate},
              {"tolerance", tol}};
  r.passed = worst <= tol;
  return r;
}

CheckReport check_bures_sandwich(std::size_t samples, std::uint64_t seed, double slack) {
  const double c1 = 1.0 / std::sqrt(6.0);
  const double c2 = 2.0 * std::sqrt(2.0);
  std::mt19937_64 rng(seed);
  std::size_t violations = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  double worst_lower = -std::numeric_limits<double>::infinity();  // C1 d - V
  double worst_upper = -std::numeric_limits<double>::infinity();  // V - C2 d
  for (std::size_t i = 0; i < samples; ++i) {
    const Mat4 rho = random_density_matrix(rng);
    const double d = bures_to_bell_set(rho);
    const double v = lyapunov_qsr(rho);
    worst_lower = std::max(worst_lower, c1 * d - v);
    worst_upper = std::max(worst_upper, v - c2 * d);
    if (c1 * d - v > slack || v - c2 * d > slack) ++violations;
    if (d > 0.0) {
      min_ratio = std::min(min_ratio, v / d);
      max_ratio = std::max(max_ratio, v / d);
    }
  }
  CheckReport r;
  r.suite = "bures-sandwich";
  r.samples = samples;
  r.values = {{"violations", static_cast<double>(violations)},
              {"min V/d_B", min_ratio},
              {"max V/d_B", max_ratio},
              {"C1", c1},
              {"C2", c2},
              {"max(C1 d_B - V)", worst_lower},
              {"max(V - C2 d_B)", worst_upper}};
  r.passed = violations == 0;
  return r;
}

CheckReport check_feedback_theta(const ModelParams& params, const Controller& ctl,
                                 std::size_t samples, std::size_t directions, std::uint64_t seed) {
  const OperatorSet ops = operators(params);
  const FeedbackLaw law(ctl, ops);
  const BellState target = bell(ctl.target);
  std::mt19937_64 rng(seed);
  auto theta = [&](const Mat4& rho) { return law(rho)[0] * law.commutator_overlap(rho, 0); };

  double sup = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Mat4 rho = random_density_matrix(rng);
    const double one_minus_x = infidelity(rho, ctl.target);
    if (one_minus_x > 1e-12) sup = std::max(sup, std::abs(theta(rho)) / one_minus_x);
  }

  std::size_t path_failures = 0;
  double worst_decay = 0.0;  // max |ratio(1e-4)| / |ratio(1e-1)|
  const Mat4& rho_bar = target.projector.matrix();
  for (std::size_t i = 0; i < directions; ++i) {
    const Mat4 sigma = random_density_matrix(rng);
    auto ratio = [&](double s) {
      const Mat4 rho = (1.0 - s) * rho_bar + s * sigma;
      const double d = bures_to_bell(rho, ctl.target);
      return theta(rho) / (d * d);
    };
    const double far = std::abs(ratio(1e-1));
    const double near = std::abs(ratio(1e-4));
    const double decay = far > 0.0 ? near / far : std::numeric_limits<double>::infinity();
    worst_decay = std::max(worst_decay, decay);
    if (!(near <= 1e-2 * far)) ++path_failures;
  }

  CheckReport r;
  r.suite = "feedback-theta";
  r.samples = samples;
  r.values = {{"sup |Theta_u| / (1 - X)", sup},
              {"max |ratio(1e-4)| / |ratio(1e-1)|", worst_decay},
              {"path failures", static_cast<double>(path_failures)},
              {"directions", static_cast<double>(directions)}};
  r.passed = std::isfinite(sup) && path_failures == 0;
  return r;
}

CheckReport check_martingale_drift(const ModelParams& params, std::size_t samples,
                                   std::uint64_t seed) {
  ModelParams p = params;
  p.n_channels = 2;
  const OperatorSet ops = operators(p);
  const double zero_u[1] = {0.0};
  const double a1 = std::sqrt(p.eta1 * p.M1);
  const double a2 = std::sqrt(p.eta2 * p.M2);
  std::mt19937_64 rng(seed);

  auto lambda2 = [](const Mat4& m) { return m(1, 1).real() + m(2, 2).real(); };
  auto gamma = [](const Mat4& m) { return 2.0 * m(1, 2).real() + 2.0 * m(0, 3).real(); };

  double max_drift_lambda2 = 0.0, max_drift_gamma = 0.0, max_coeff_err = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Mat4 rho = random_density_matrix(rng);
    const VectorFields f = sme_fields(rho, zero_u, ops);
    const Coordinates c = coordinates(rho);
    max_drift_lambda2 = std::max(max_drift_lambda2, std::abs(lambda2(f.drift)));
    max_drift_gamma = std::max(max_drift_gamma, std::abs(gamma(f.drift)));
    const double errs[4] = {
        lambda2(f.diffusion[0]) - (-4.0 * a1 * c.lambda1 * c.lambda2),
        lambda2(f.diffusion[1]) - (4.0 * a2 * c.delta),
        gamma(f.diffusion[1]) - (2.0 * a2 * (1.0 - c.gamma * c.gamma)),
        gamma(f.diffusion[0]) - (-8.0 * a1 * c.delta),
    };
    for (double e : errs) max_coeff_err = std::max(max_coeff_err, std::abs(e));
  }
  CheckReport r;
  r.suite = "martingale-drift";
  r.samples = samples;
  r.values = {{"max |drift Lambda2|", max_drift_lambda2},
              {"max |drift Gamma|", max_drift_gamma},
              {"max diffusion coefficient error", max_coeff_err}};
  r.passed = max_drift_lambda2 <= 1e-12 && max_drift_gamma <= 1e-12 && max_coeff_err <= 1e-10;
  return r;
}

CheckReport check_feedback_local_rate(const ModelParams& params, const Controller& ctl,
                                      std::size_t samples, std::uint64_t seed, double radius,
                                      double margin) {
  const OperatorSet ops = operators(params);
  const FeedbackLaw law(ctl, ops);
  const double rate = params.rate_constant();
  const BellLabel target = ctl.target;
  const Mat4 rho_bar = bell(target).projector.matrix();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_s(std::log(1e-4), std::log(radius * radius));
  const ScalarField V = [target](const Mat4& m) { return lyapunov_fb(m, target); };

  double worst_ratio = -std::numeric_limits<double>::infinity();
  double worst_gain_margin = std::numeric_limits<double>::infinity();  // (g1^2 + g2^2) - C X^2
  std::size_t used = 0;
  while (used < samples) {
    const Mat4 sigma = random_density_matrix(rng);
    const double s = std::exp(log_s(rng));
    const Mat4 rho = (1.0 - s) * rho_bar + s * sigma;
    if (!(bures_to_bell(rho, target) < radius)) continue;
    ++used;
    const double v = V(rho);
    worst_ratio = std::max(worst_ratio, generator_apply(V, rho, law, ops) / v);
    double g2 = 0.0;
    for (int k = 0; k < ops.n_channels; ++k) {
      const double g = noise_gain(V, rho, ops, k);
      g2 += g * g;
    }
    const double x = 1.0 - infidelity(rho, target);
    worst_gain_margin = std::min(worst_gain_margin, g2 - rate * x * x);
  }
  CheckReport r;
  r.suite = "feedback-local-rate";
  r.samples = samples;
  r.values = {{"max LV/V", worst_ratio},
              {"bound -C/2 + margin", -0.5 * rate + margin},
              {"min (g1^2 + g2^2 - C X^2)", worst_gain_margin}};
  r.passed = worst_ratio <= -0.5 * rate + margin && worst_gain_margin >= -1e-9;
  return r;
}

}  // namespace qfb
