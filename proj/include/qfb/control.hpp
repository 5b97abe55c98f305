#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "qfb/model.hpp"

namespace qfb {

enum class ControllerKind { Zero, TwoChannel, OneChannel };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view name);

struct Controller {
  ControllerKind kind = ControllerKind::Zero;
  BellLabel target = BellLabel::PsiPlus;
  // two-channel law
  double alpha = 10.0;
  double beta = 12.0;
  double gamma = 1.0;
  // one-channel law
  double gamma1 = 4.0;
  double gamma2 = 4.0;
  double epsilon = 0.15;

  static Controller zero(BellLabel target = BellLabel::PsiPlus);
  static Controller two_channel(BellLabel target, double alpha = 10.0, double beta = 12.0,
                                double gamma = 1.0);
  /// gamma1 = gamma > 0 and gamma2 = one_channel_sign(target) * gamma.
  static Controller one_channel(BellLabel target, double gamma = 4.0, double epsilon = 0.15);

  /// Throws InvalidParameter.
  void validate() const;
  bool operator==(const Controller&) const = default;
};

/// Sign s with gamma2 = s * gamma1 that makes the target an eigenvector of
/// gamma1 H1 + gamma2 H2 (so the target is a closed-loop equilibrium).
double one_channel_sign(BellLabel target);

/// Fixed-capacity control vector (at most two control Hamiltonians).
struct ControlVector {
  std::array<double, 2> values{};
  std::size_t size = 0;

  std::span<const double> span() const { return {values.data(), size}; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Precomputed target data so the control law costs two mat-vec products.
class FeedbackLaw {
 public:
  FeedbackLaw(const Controller& ctl, const OperatorSet& ops);

  ControlVector operator()(const Mat4& rho) const;
  const Controller& controller() const { return ctl_; }
  const BellState& target() const { return target_; }
  /// Tr(i[H_j, rho] rho_bar), evaluated as -2 Im <xi|H_j rho|xi>.
  double commutator_overlap(const Mat4& rho, int j) const;

 private:
  Controller ctl_;
  BellState target_;
  int n_controls_;
  std::array<Vec4, 2> h_xi_{};  // H_j xi
};

double fidelity_X(const Mat4& rho, const BellState& target);
/// 1 - X computed as the population outside the target, without cancellation.
double infidelity(const Mat4& rho, BellLabel target);

ControlVector control_signal(const Mat4& rho, const Controller& ctl, const OperatorSet& ops);

double smoothing_f(double x, double epsilon);

/// u(rho) Tr(i[H1, rho] rho_bar) for the two-channel law.
double theta_u(const Mat4& rho, const Controller& ctl, const OperatorSet& ops);

}  // namespace qfb
