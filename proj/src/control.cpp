#include "qfb/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qfb/error.hpp"

namespace qfb {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Zero: return "zero";
    case ControllerKind::TwoChannel: return "two_channel";
    case ControllerKind::OneChannel: return "one_channel";
  }
  return "?";
}

ControllerKind parse_controller_kind(std::string_view name) {
  for (auto k : {ControllerKind::Zero, ControllerKind::TwoChannel, ControllerKind::OneChannel})
    if (to_string(k) == name) return k;
  throw Error(ErrorKind::InvalidParameter, "unknown controller kind '" + std::string(name) + "'");
}

Controller Controller::zero(BellLabel target) {
  Controller c;
  c.kind = ControllerKind::Zero;
  c.target = target;
  return c;
}

Controller Controller::two_channel(BellLabel target, double alpha, double beta, double gamma) {
  Controller c;
  c.kind = ControllerKind::TwoChannel;
  c.target = target;
  c.alpha = alpha;
  c.beta = beta;
  c.gamma = gamma;
  return c;
}

Controller Controller::one_channel(BellLabel target, double gamma, double epsilon) {
  Controller c;
  c.kind = ControllerKind::OneChannel;
  c.target = target;
  c.gamma1 = gamma;
  c.gamma2 = one_channel_sign(target) * gamma;
  c.epsilon = epsilon;
  return c;
}

double one_channel_sign(BellLabel target) {
  switch (target) {
    case BellLabel::PsiPlus: return 1.0;
    case BellLabel::PsiMinus: return -1.0;
    case BellLabel::PhiPlus: return -1.0;
    case BellLabel::PhiMinus: return 1.0;
  }
  return 1.0;
}

void Controller::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidParameter, what); };
  switch (kind) {
    case ControllerKind::Zero:
      break;
    case ControllerKind::TwoChannel:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha must be positive");
      if (!(beta > 1.0) || !std::isfinite(beta)) bad("beta must exceed 1");
      if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("gamma must be positive");
      break;
    case ControllerKind::OneChannel:
      if (!(gamma1 > 0.0) || !std::isfinite(gamma1)) bad("gamma1 must be positive");
      if (gamma2 != one_channel_sign(target) * gamma1)
        bad("gamma2 must equal " + std::string(one_channel_sign(target) > 0 ? "+" : "-") +
            "gamma1 for target " + std::string(to_string(target)));
      if (!(epsilon > 0.0 && epsilon < 0.5)) bad("epsilon must lie in (0, 1/2)");
      break;
  }
}

FeedbackLaw::FeedbackLaw(const Controller& ctl, const OperatorSet& ops)
    : ctl_(ctl), target_(bell(ctl.target)), n_controls_(ops.n_controls) {
  ctl.validate();
  if (ctl.kind == ControllerKind::TwoChannel && ops.n_controls != 1)
    throw Error(ErrorKind::ConfigurationMismatch, "two-channel law needs the two-channel model");
  if (ctl.kind == ControllerKind::OneChannel && ops.n_controls != 2)
    throw Error(ErrorKind::ConfigurationMismatch, "one-channel law needs the one-channel model");
  for (int j = 0; j < ops.n_controls; ++j) h_xi_[j] = ops.H[j] * target_.vector;
}

double FeedbackLaw::commutator_overlap(const Mat4& rho, int j) const {
  // <xi|H rho|xi> = (H xi)* (rho xi) for Hermitian H.
  const Vec4 rho_xi = rho * target_.vector;
  return -2.0 * inner(h_xi_[j], rho_xi).imag();
}

ControlVector FeedbackLaw::operator()(const Mat4& rho) const {
  ControlVector u;
  u.size = static_cast<std::size_t>(n_controls_);
  switch (ctl_.kind) {
    case ControllerKind::Zero:
      break;
    case ControllerKind::TwoChannel: {
      const double one_minus_x = infidelity(rho, ctl_.target);
      u.values[0] = ctl_.alpha * std::pow(std::max(one_minus_x, 0.0), ctl_.beta) -
                    ctl_.gamma * commutator_overlap(rho, 0);
      break;
    }
    case ControllerKind::OneChannel: {
      const double x = std::clamp(1.0 - infidelity(rho, ctl_.target), 0.0, 1.0);
      u.values[0] = ctl_.gamma1 - commutator_overlap(rho, 0);
      const double gate = smoothing_f(x, ctl_.epsilon);
      u.values[1] = gate == 0.0 ? 0.0 : gate * (ctl_.gamma2 - commutator_overlap(rho, 1));
      break;
    }
  }
  return u;
}

double fidelity_X(const Mat4& rho, const BellState& target) {
  return expectation(rho, target.vector);
}

double infidelity(const Mat4& rho, BellLabel target) {
  const auto pops = bell_populations(rho);
  double s = 0.0;
  for (std::size_t b = 0; b < 4; ++b)
    if (kAllBell[b] != target) s += pops[b];
  return s;
}

ControlVector control_signal(const Mat4& rho, const Controller& ctl, const OperatorSet& ops) {
  return FeedbackLaw(ctl, ops)(rho);
}

double smoothing_f(double x, double epsilon) {
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(ErrorKind::DomainViolation, "smoothing_f argument " + std::to_string(x) +
                                                " outside [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw Error(ErrorKind::DomainViolation, "epsilon must lie in (0, 1/2)");
  if (x < epsilon) return 0.0;
  if (x >= 1.0 - epsilon) return 1.0;
  return 0.5 * std::sin(std::numbers::pi * (x - 0.5) / (1.0 - 2.0 * epsilon)) + 0.5;
}

double theta_u(const Mat4& rho, const Controller& ctl, const OperatorSet& ops) {
  if (ctl.kind == ControllerKind::OneChannel)
    throw Error(ErrorKind::ConfigurationMismatch, "theta_u is defined for the two-channel law");
  const FeedbackLaw law(ctl, ops);
  return law(rho)[0] * law.commutator_overlap(rho, 0);
}

}  // namespace qfb
