#include "qfb/model.hpp"

#include <cmath>
#include <string>

#include "qfb/error.hpp"

namespace qfb {

namespace {

const Cplx I(0.0, 1.0);

// Hermitian L with L rho computed once: returns (L rho, L rho L).
struct Sandwich {
  Mat4 l_rho;
  Mat4 l_rho_l;
};

Sandwich sandwich(const Mat4& rho, const Mat4& L) {
  Sandwich s;
  s.l_rho = L * rho;
  s.l_rho_l = s.l_rho * L;
  return s;
}

// For Hermitian x and rho, (x rho)* = rho x.
Mat4 plus_adjoint(const Mat4& x) { return x + adjoint(x); }
Mat4 minus_adjoint(const Mat4& x) { return x - adjoint(x); }

}  // namespace

Mat2 pauli(PauliAxis axis) {
  Mat2 m;
  switch (axis) {
    case PauliAxis::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case PauliAxis::Y:
      m(0, 1) = -I;
      m(1, 0) = I;
      break;
    case PauliAxis::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

Mat4 lz_operator() { return kron(pauli(PauliAxis::Z), pauli(PauliAxis::Z)); }
Mat4 lx_operator() { return kron(pauli(PauliAxis::X), pauli(PauliAxis::X)); }

std::string_view to_string(BellLabel label) {
  switch (label) {
    case BellLabel::PsiPlus: return "psi+";
    case BellLabel::PsiMinus: return "psi-";
    case BellLabel::PhiPlus: return "phi+";
    case BellLabel::PhiMinus: return "phi-";
  }
  return "?";
}

BellLabel parse_bell(std::string_view name) {
  for (BellLabel b : kAllBell)
    if (to_string(b) == name) return b;
  throw Error(ErrorKind::InvalidParameter, "unknown Bell state '" + std::string(name) + "'");
}

DensityMatrix::DensityMatrix() : m_(Mat4::diag(0.25, 0.25, 0.25, 0.25)) {}

DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(); }

void check_density_invariants(const Mat4& m, double tol) {
  if (!all_finite(m)) throw Error(ErrorKind::InvalidState, "non-finite entries");
  if (hermitian_defect(m) > tol) throw Error(ErrorKind::InvalidState, "matrix is not Hermitian");
  const double tr = trace(m).real();
  if (std::abs(tr - 1.0) > tol)
    throw Error(ErrorKind::InvalidState, "trace " + std::to_string(tr) + " differs from 1");
  const EigDecomp4 e = herm_eig(m);
  if (e.eigenvalues[0] < -tol)
    throw Error(ErrorKind::InvalidState,
                "negative eigenvalue " + std::to_string(e.eigenvalues[0]));
}

DensityMatrix DensityMatrix::from(const Mat4& m) {
  check_density_invariants(m);
  return DensityMatrix(hermitize(m));
}

BellState bell(BellLabel label) {
  const double h = 1.0 / std::sqrt(2.0);
  Vec4 v{};
  double lz = 0.0, lx = 0.0;
  switch (label) {
    case BellLabel::PsiPlus:
      v = {h, 0.0, 0.0, h};
      lz = 1.0;
      lx = 1.0;
      break;
    case BellLabel::PsiMinus:
      v = {h, 0.0, 0.0, -h};
      lz = 1.0;
      lx = -1.0;
      break;
    case BellLabel::PhiPlus:
      v = {0.0, h, h, 0.0};
      lz = -1.0;
      lx = 1.0;
      break;
    case BellLabel::PhiMinus:
      v = {0.0, h, -h, 0.0};
      lz = -1.0;
      lx = -1.0;
      break;
  }
  return BellState{label, v, DensityMatrix::trusted(outer(v, v)), lz, lx};
}

std::array<double, 4> bell_populations(const Mat4& rho) {
  // The Bell vectors have two nonzero entries each, so <b|rho|b> reduces to
  // half a 2x2 block sum.
  const double d00 = rho(0, 0).real(), d11 = rho(1, 1).real();
  const double d22 = rho(2, 2).real(), d33 = rho(3, 3).real();
  const double r03 = rho(0, 3).real(), r12 = rho(1, 2).real();
  return {0.5 * (d00 + d33) + r03, 0.5 * (d00 + d33) - r03, 0.5 * (d11 + d22) + r12,
          0.5 * (d11 + d22) - r12};
}

void ModelParams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidParameter, what); };
  if (n_channels != 1 && n_channels != 2) bad("n_channels must be 1 or 2");
  if (!(eta1 > 0.0 && eta1 <= 1.0)) bad("eta1 must lie in (0, 1]");
  if (!(M1 > 0.0) || !std::isfinite(M1)) bad("M1 must be positive");
  if (n_channels == 2) {
    if (!(eta2 > 0.0 && eta2 <= 1.0)) bad("eta2 must lie in (0, 1]");
    if (!(M2 > 0.0) || !std::isfinite(M2)) bad("M2 must be positive");
  }
  if (!(omega >= 0.0) || !std::isfinite(omega)) bad("omega must be non-negative");
}

double ModelParams::rate_constant() const {
  const double c1 = eta1 * M1;
  return n_channels == 2 ? std::min(c1, eta2 * M2) : c1;
}

Mat4 control_hamiltonian_h1() {
  const Mat2 sy = pauli(PauliAxis::Y), sz = pauli(PauliAxis::Z);
  return kron(sz, sy) - 3.0 * kron(Mat2::identity(), sy);
}

Mat4 control_hamiltonian_pi1() {
  const Mat2 sy = pauli(PauliAxis::Y), sz = pauli(PauliAxis::Z);
  return -kron(sy, sz) - 3.0 * kron(sy, Mat2::identity());
}

Mat4 control_hamiltonian_pi2() {
  const Mat2 sy = pauli(PauliAxis::Y), sz = pauli(PauliAxis::Z);
  return kron(sy, sz) - 3.0 * kron(sy, Mat2::identity());
}

OperatorSet operators(const ModelParams& params) {
  params.validate();
  OperatorSet ops;
  ops.n_channels = params.n_channels;
  const Mat4 lz = lz_operator();
  ops.L[0] = std::sqrt(params.M1) * lz;
  ops.eta[0] = params.eta1;
  if (params.n_channels == 2) {
    ops.L[1] = std::sqrt(params.M2) * lx_operator();
    ops.eta[1] = params.eta2;
  }
  for (int k = 0; k < 2; ++k) {
    ops.L_sq[k] = ops.L[k] * ops.L[k];
    ops.sqrt_eta[k] = std::sqrt(ops.eta[k]);
  }
  ops.H0 = params.omega * lz;
  ops.H[0] = control_hamiltonian_h1();
  if (params.n_channels == 1) {
    const bool psi =
        params.target == BellLabel::PsiPlus || params.target == BellLabel::PsiMinus;
    ops.H[1] = psi ? control_hamiltonian_pi1() : control_hamiltonian_pi2();
    ops.n_controls = 2;
  } else {
    ops.n_controls = 1;
  }
  return ops;
}

Mat4 drift_F0(const Mat4& rho, std::span<const double> u, const OperatorSet& ops) {
  if (u.size() != static_cast<std::size_t>(ops.n_controls))
    throw Error(ErrorKind::DimensionMismatch,
                "control vector has " + std::to_string(u.size()) + " entries, expected " +
                    std::to_string(ops.n_controls));
  // -i[H, rho] = -i (H rho - (H rho)*)
  Mat4 h_total = ops.H0;
  for (int j = 0; j < ops.n_controls; ++j)
    if (u[j] != 0.0) h_total += u[j] * ops.H[j];
  return Cplx(0.0, -1.0) * minus_adjoint(h_total * rho);
}

Mat4 drift_Fk(const Mat4& rho, const Mat4& L) {
  const Sandwich s = sandwich(rho, L);
  return s.l_rho_l - 0.5 * plus_adjoint((L * L) * rho);
}

Mat4 diffusion_Gk(const Mat4& rho, const Mat4& L) {
  const Mat4 l_rho = L * rho;
  return plus_adjoint(l_rho) - (2.0 * trace(l_rho).real()) * rho;
}

Mat4 support_Fhat(const Mat4& rho, int k, const OperatorSet& ops) {
  if (k < 0 || k >= ops.n_channels)
    throw Error(ErrorKind::DimensionMismatch, "channel index out of range");
  const Mat4& L = ops.L[k];
  const double eta = ops.eta[k];
  const Sandwich s = sandwich(rho, L);
  const Mat4 fk = s.l_rho_l - 0.5 * plus_adjoint(ops.L_sq[k] * rho);
  const double mean_l = trace(s.l_rho).real();
  const Mat4 gk = plus_adjoint(s.l_rho) - (2.0 * mean_l) * rho;
  return (1.0 - eta) * fk + (2.0 * eta * mean_l) * gk;
}

VectorFields sme_fields(const Mat4& rho, std::span<const double> u, const OperatorSet& ops) {
  VectorFields out;
  out.drift = drift_F0(rho, u, ops);
  for (int k = 0; k < ops.n_channels; ++k) {
    const Sandwich s = sandwich(rho, ops.L[k]);
    out.drift += s.l_rho_l - 0.5 * plus_adjoint(ops.L_sq[k] * rho);
    const double mean_l = trace(s.l_rho).real();
    out.diffusion[k] = ops.sqrt_eta[k] * (plus_adjoint(s.l_rho) - (2.0 * mean_l) * rho);
  }
  return out;
}

}  // namespace qfb
