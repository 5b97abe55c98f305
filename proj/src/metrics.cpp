#include "qfb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qfb/error.hpp"

namespace qfb {

void ScalarSeries::validate() const {
  if (times.size() != values.size())
    throw Error(ErrorKind::InvalidParameter, "series times and values differ in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw Error(ErrorKind::InvalidParameter, "series times must increase");
}

double bures_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const Mat4 sb = psd_sqrt(b.matrix());
  const Mat4 inner_m = hermitize(sb * a.matrix() * sb);
  const EigDecomp4 e = herm_eig(inner_m);
  double fidelity_root = 0.0;
  for (double lambda : e.eigenvalues) {
    if (lambda < -1e-10)
      throw Error(ErrorKind::NotPSD, "sqrt(rho_b) rho_a sqrt(rho_b) has a negative eigenvalue");
    fidelity_root += std::sqrt(std::max(lambda, 0.0));
  }
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * fidelity_root));
}

double bures_to_bell(const Mat4& rho, BellLabel target) {
  // 2 - 2 sqrt(X) = 2 (1 - X) / (1 + sqrt(X))
  const double outside = std::max(0.0, infidelity(rho, target));
  const double x = std::max(0.0, 1.0 - outside);
  return std::sqrt(2.0 * outside / (1.0 + std::sqrt(x)));
}

double bures_to_set(const DensityMatrix& rho, std::span<const DensityMatrix> set) {
  if (set.empty()) throw Error(ErrorKind::InvalidParameter, "set must be nonempty");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& member : set) best = std::min(best, bures_distance(rho, member));
  return best;
}

double bures_to_bell_set(const Mat4& rho) {
  double best = std::numeric_limits<double>::infinity();
  for (BellLabel b : kAllBell) best = std::min(best, bures_to_bell(rho, b));
  return best;
}

Coordinates coordinates(const Mat4& rho) {
  Coordinates c;
  c.lambda1 = rho(0, 0).real() + rho(3, 3).real();
  c.lambda2 = rho(1, 1).real() + rho(2, 2).real();
  c.gamma = 2.0 * rho(1, 2).real() + 2.0 * rho(0, 3).real();
  c.delta = c.lambda1 * rho(1, 2).real() - c.lambda2 * rho(0, 3).real();
  return c;
}

double lyapunov_qsr(const Mat4& rho) {
  // With populations p = (psi+, psi-, phi+, phi-):
  //   lambda1 = p0 + p1, lambda2 = p2 + p3,
  //   1 - gamma = 2 (p1 + p3), 1 + gamma = 2 (p0 + p2).
  const auto p = bell_populations(rho);
  const double vz = (p[0] + p[1]) * (p[2] + p[3]);
  const double vx = 4.0 * (p[1] + p[3]) * (p[0] + p[2]);
  return std::sqrt(std::max(0.0, vz + vx));
}

double lyapunov_fb(const Mat4& rho, BellLabel target) {
  return std::sqrt(std::max(0.0, infidelity(rho, target)));
}

double generator_apply(const ScalarField& V, const Mat4& rho, const FeedbackLaw& law,
                       const OperatorSet& ops, double h) {
  const VectorFields f = sme_fields(rho, law(rho).span(), ops);
  const double v0 = V(rho);
  double result = (V(rho + h * f.drift) - V(rho - h * f.drift)) / (2.0 * h);
  for (int k = 0; k < ops.n_channels; ++k) {
    const Mat4& g = f.diffusion[k];
    result += 0.5 * (V(rho + h * g) - 2.0 * v0 + V(rho - h * g)) / (h * h);
  }
  if (!std::isfinite(result)) throw Error(ErrorKind::NonFinite, "generator evaluation failed");
  return result;
}

double noise_gain(const ScalarField& V, const Mat4& rho, const OperatorSet& ops, int channel,
                  double h) {
  if (channel < 0 || channel >= ops.n_channels)
    throw Error(ErrorKind::DimensionMismatch, "channel index out of range");
  const double v0 = V(rho);
  if (!(v0 > 1e-12)) throw Error(ErrorKind::DivisionByZero, "V(rho) <= 1e-12");
  const Mat4 g = diffusion_Gk(rho, ops.L[channel]);
  const double dv = (V(rho + h * g) - V(rho - h * g)) / (2.0 * h);
  const double out = ops.sqrt_eta[channel] * dv / v0;
  if (!std::isfinite(out)) throw Error(ErrorKind::NonFinite, "noise gain evaluation failed");
  return out;
}

ExponentFit fit_sample_exponent(const ScalarSeries& series, double t_lo, double t_hi) {
  series.validate();
  if (!(t_lo < t_hi)) throw Error(ErrorKind::InvalidParameter, "fit window must have t_lo < t_hi");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.times[i];
    if (t < t_lo || t > t_hi) continue;
    const double value = series.values[i];
    if (!(value > 0.0))
      throw Error(ErrorKind::NonPositiveValue,
                  "value " + std::to_string(value) + " at t=" + std::to_string(t));
    const double y = std::log(value);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    syy += y * y;
    ++n;
  }
  if (n < 2) throw Error(ErrorKind::InvalidParameter, "fit window holds fewer than two samples");
  const double dn = static_cast<double>(n);
  const double mt = st / dn, my = sy / dn;
  const double sxx = stt - dn * mt * mt;
  const double sxy = sty - dn * mt * my;
  const double syy_c = syy - dn * my * my;
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mt;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.n_points = n;
  fit.r_squared = syy_c > 0.0 ? std::clamp(sxy * sxy / (sxx * syy_c), 0.0, 1.0) : 1.0;
  return fit;
}

std::optional<BellLabel> classify_limit(const Mat4& rho, double tol) {
  std::optional<BellLabel> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (BellLabel b : kAllBell) {
    const double d = bures_to_bell(rho, b);
    if (d < best_d) {
      best_d = d;
      best = b;
    }
  }
  if (best_d < tol) return best;
  return std::nullopt;
}

std::optional<double> first_hit_time(const ScalarSeries& series, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidParameter, "radius must be positive");
  series.validate();
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series.values[i] < r) return series.times[i];
  return std::nullopt;
}

}  // namespace qfb
