#pragma once

// Pointwise sampling suites for the Lyapunov inequalities, the feedback
// conditions and the martingale structure of the uncontrolled dynamics.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qfb/control.hpp"
#include "qfb/model.hpp"

namespace qfb {

/// G G* / Tr(G G*) with i.i.d. standard complex Gaussian G.
Mat4 random_density_matrix(std::mt19937_64& rng);

struct CheckReport {
  std::string suite;
  bool passed = false;
  std::size_t samples = 0;
  /// Named scalar results, printed in order.
  std::vector<std::pair<std::string, double>> values;

  double value(const std::string& name) const;
};

/// max over random states of L V + C V for the reduction Lyapunov function
/// with u = 0. Passes when the maximum is <= tol.
CheckReport check_qsr_lyapunov(const ModelParams& params, std::size_t samples, std::uint64_t seed,
                               double tol = 1e-3, double h = 1e-5);

/// (1/sqrt 6) d_B(rho, Bell set) <= V(rho) <= 2 sqrt 2 d_B(rho, Bell set).
CheckReport check_bures_sandwich(std::size_t samples, std::uint64_t seed, double slack = 1e-9);

/// Empirical sup |Theta_u| / (1 - X) over random states, and the decay of
/// Theta_u / d_B^2 along rho_s = (1 - s) rho_bar + s sigma between s = 1e-1 and 1e-4.
CheckReport check_feedback_theta(const ModelParams& params, const Controller& ctl,
                                 std::size_t samples, std::size_t directions, std::uint64_t seed);

/// Drift of Lambda_2 and Gamma under u = 0, and their diffusion coefficients
/// against the closed forms.
CheckReport check_martingale_drift(const ModelParams& params, std::size_t samples,
                                   std::uint64_t seed);

/// L V / V <= -C/2 + margin for V = sqrt(1 - X) near the target under the
/// two-channel law, and g_1^2 + g_2^2 >= C X^2 there.
CheckReport check_feedback_local_rate(const ModelParams& params, const Controller& ctl,
                                      std::size_t samples, std::uint64_t seed,
                                      double radius = 0.1, double margin = 0.05);

}  // namespace qfb
