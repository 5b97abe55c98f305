#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qfb/control.hpp"
#include "qfb/model.hpp"

namespace qfb {

struct ScalarSeries {
  std::vector<double> times;
  std::vector<double> values;

  /// Throws InvalidParameter unless lengths match and times increase.
  void validate() const;
  std::size_t size() const { return times.size(); }
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

double bures_distance(const DensityMatrix& a, const DensityMatrix& b);
/// Closed form sqrt(2 - 2 sqrt(<xi|rho|xi>)) for a Bell-state second argument,
/// evaluated from the outside population so it stays accurate near zero.
double bures_to_bell(const Mat4& rho, BellLabel target);
double bures_to_set(const DensityMatrix& rho, std::span<const DensityMatrix> set);
/// Distance to the set of the four Bell projectors.
double bures_to_bell_set(const Mat4& rho);

struct Coordinates {
  double lambda1;  // rho_11 + rho_44
  double lambda2;  // rho_22 + rho_33
  double gamma;    // 2 Re rho_23 + 2 Re rho_14
  double delta;    // lambda1 Re rho_23 - lambda2 Re rho_14
};

Coordinates coordinates(const Mat4& rho);

/// sqrt(lambda1 lambda2 + 1 - gamma^2), the quantum-state-reduction Lyapunov
/// function. Evaluated from Bell-basis populations, which is algebraically
/// the same for unit-trace input and free of cancellation near the Bell set.
double lyapunov_qsr(const Mat4& rho);
/// sqrt(1 - X_target(rho)).
double lyapunov_fb(const Mat4& rho, BellLabel target);

using ScalarField = std::function<double(const Mat4&)>;

/// Numerical Ito generator: DV[drift] + 1/2 sum_k D^2V[sqrt(eta_k) G_k, sqrt(eta_k) G_k],
/// central differences with step h.
double generator_apply(const ScalarField& V, const Mat4& rho, const FeedbackLaw& law,
                       const OperatorSet& ops, double h = 1e-5);

/// sqrt(eta_j) DV[G_j] / V for channel j (0-based).
double noise_gain(const ScalarField& V, const Mat4& rho, const OperatorSet& ops, int channel,
                  double h = 1e-5);

/// Least-squares line through (t, log value) for t in [t_lo, t_hi].
ExponentFit fit_sample_exponent(const ScalarSeries& series, double t_lo, double t_hi);

std::optional<BellLabel> classify_limit(const Mat4& rho, double tol = 0.05);

/// First sampled time with value < r.
std::optional<double> first_hit_time(const ScalarSeries& series, double r);

}  // namespace qfb
