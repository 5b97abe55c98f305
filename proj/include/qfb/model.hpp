#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "qfb/linalg4.hpp"

namespace qfb {

enum class PauliAxis { X, Y, Z };

Mat2 pauli(PauliAxis axis);

/// sigma_z (x) sigma_z and sigma_x (x) sigma_x.
Mat4 lz_operator();
Mat4 lx_operator();

enum class BellLabel { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

inline constexpr std::array<BellLabel, 4> kAllBell = {BellLabel::PsiPlus, BellLabel::PsiMinus,
                                                      BellLabel::PhiPlus, BellLabel::PhiMinus};

std::string_view to_string(BellLabel label);
/// Accepts "psi+", "psi-", "phi+", "phi-".
BellLabel parse_bell(std::string_view name);

/// A validated two-qubit density matrix: Hermitian, unit trace, PSD (all within
/// 1e-9). Construction through `from` checks; `trusted` is for callers that
/// produced the matrix by projection.
class DensityMatrix {
 public:
  DensityMatrix();  // maximally mixed state

  static DensityMatrix from(const Mat4& m);
  static DensityMatrix trusted(const Mat4& m) { return DensityMatrix(m); }
  static DensityMatrix maximally_mixed();

  const Mat4& matrix() const { return m_; }
  Cplx operator()(int i, int j) const { return m_(i, j); }

  bool operator==(const DensityMatrix&) const = default;

 private:
  explicit DensityMatrix(const Mat4& m) : m_(m) {}
  Mat4 m_;
};

/// Throws InvalidState naming the violated invariant.
void check_density_invariants(const Mat4& m, double tol = 1e-9);

struct BellState {
  BellLabel label;
  Vec4 vector;
  DensityMatrix projector;
  double lz_eigenvalue;  // eigenvalue of sigma_z (x) sigma_z
  double lx_eigenvalue;  // eigenvalue of sigma_x (x) sigma_x
};

BellState bell(BellLabel label);

/// X_b(rho) = <b|rho|b> for every Bell state b, in kAllBell order. These are
/// the diagonal of rho in the Bell basis and sum to Tr(rho).
std::array<double, 4> bell_populations(const Mat4& rho);

struct ModelParams {
  int n_channels = 2;
  double eta1 = 0.3;
  double M1 = 1.0;
  double eta2 = 0.4;
  double M2 = 0.9;
  double omega = 0.3;
  BellLabel target = BellLabel::PsiPlus;

  /// Throws InvalidParameter.
  void validate() const;
  /// min over active channels of eta_k M_k.
  double rate_constant() const;
  double eta(int k) const { return k == 0 ? eta1 : eta2; }
  double strength(int k) const { return k == 0 ? M1 : M2; }

  bool operator==(const ModelParams&) const = default;
};

struct OperatorSet {
  int n_channels = 2;
  std::array<Mat4, 2> L{};       // L[0] = sqrt(M1) Lz, L[1] = sqrt(M2) Lx
  std::array<Mat4, 2> L_sq{};    // L_k^2
  std::array<double, 2> sqrt_eta{};
  std::array<double, 2> eta{};
  Mat4 H0;
  /// Control Hamiltonians: {H1} for two channels, {H1, H2} for one.
  std::array<Mat4, 2> H{};
  int n_controls = 1;

  std::span<const Mat4> controls() const { return {H.data(), static_cast<std::size_t>(n_controls)}; }
};

/// sigma_z (x) sigma_y - 3 (1 (x) sigma_y).
Mat4 control_hamiltonian_h1();
/// -sigma_y (x) sigma_z - 3 (sigma_y (x) 1), used for Psi targets with one channel.
Mat4 control_hamiltonian_pi1();
/// sigma_y (x) sigma_z - 3 (sigma_y (x) 1), used for Phi targets with one channel.
Mat4 control_hamiltonian_pi2();

OperatorSet operators(const ModelParams& params);

/// -i[H0, rho] - i sum_j u_j [H_j, rho]. `u` must have ops.n_controls entries.
Mat4 drift_F0(const Mat4& rho, std::span<const double> u, const OperatorSet& ops);
/// L rho L - L^2 rho / 2 - rho L^2 / 2.
Mat4 drift_Fk(const Mat4& rho, const Mat4& L);
/// L rho + rho L - 2 Tr(L rho) rho.
Mat4 diffusion_Gk(const Mat4& rho, const Mat4& L);

/// Drift of the deterministic support equation for channel k (0-based):
/// (1 - eta_k) F_k(rho) + 2 eta_k Tr(L_k rho) G_k(rho).
Mat4 support_Fhat(const Mat4& rho, int k, const OperatorSet& ops);

/// Summed uncontrolled-plus-control drift and per-channel diffusion,
/// computed with shared products. diffusion[k] already includes sqrt(eta_k).
struct VectorFields {
  Mat4 drift;
  std::array<Mat4, 2> diffusion;
};
VectorFields sme_fields(const Mat4& rho, std::span<const double> u, const OperatorSet& ops);

}  // namespace qfb
