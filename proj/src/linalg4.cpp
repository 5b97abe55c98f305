#include "qfb/linalg4.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qfb/error.hpp"

namespace qfb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ConfigurationMismatch: return "ConfigurationMismatch";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ProjectionFailure: return "ProjectionFailure";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::CampaignFailure: return "CampaignFailure";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Mat2 Mat2::identity() {
  Mat2 m;
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  return m;
}

Mat4 Mat4::identity() { return diag(1.0, 1.0, 1.0, 1.0); }

Mat4 Mat4::diag(double d0, double d1, double d2, double d3) {
  Mat4 m;
  m(0, 0) = d0;
  m(1, 1) = d1;
  m(2, 2) = d2;
  m(3, 3) = d3;
  return m;
}

Mat2 operator+(const Mat2& x, const Mat2& y) {
  Mat2 r;
  for (int k = 0; k < 4; ++k) r.a[k] = x.a[k] + y.a[k];
  return r;
}

Mat2 operator-(const Mat2& x, const Mat2& y) {
  Mat2 r;
  for (int k = 0; k < 4; ++k) r.a[k] = x.a[k] - y.a[k];
  return r;
}

Mat2 operator*(Cplx s, const Mat2& x) {
  Mat2 r;
  for (int k = 0; k < 4; ++k) r.a[k] = s * x.a[k];
  return r;
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
  return r;
}

Mat4 operator+(const Mat4& x, const Mat4& y) {
  Mat4 r;
  for (int k = 0; k < 16; ++k) r.a[k] = x.a[k] + y.a[k];
  return r;
}

Mat4 operator-(const Mat4& x, const Mat4& y) {
  Mat4 r;
  for (int k = 0; k < 16; ++k) r.a[k] = x.a[k] - y.a[k];
  return r;
}

Mat4 operator-(const Mat4& x) {
  Mat4 r;
  for (int k = 0; k < 16; ++k) r.a[k] = -x.a[k];
  return r;
}

Mat4 operator*(Cplx s, const Mat4& x) {
  Mat4 r;
  for (int k = 0; k < 16; ++k) r.a[k] = s * x.a[k];
  return r;
}

Mat4 operator*(double s, const Mat4& x) {
  Mat4 r;
  for (int k = 0; k < 16; ++k) r.a[k] = s * x.a[k];
  return r;
}

Mat4& operator+=(Mat4& x, const Mat4& y) {
  for (int k = 0; k < 16; ++k) x.a[k] += y.a[k];
  return x;
}

namespace {

// std::complex multiplication carries NaN-recovery branches; the plain
// formula is what we want in the inner loops.
inline void fma_into(double& re, double& im, const Cplx& x, const Cplx& y) {
  re += x.real() * y.real() - x.imag() * y.imag();
  im += x.real() * y.imag() + x.imag() * y.real();
}

}  // namespace

Mat4 operator*(const Mat4& x, const Mat4& y) {
  Mat4 r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double re = 0.0, im = 0.0;
      for (int k = 0; k < 4; ++k) fma_into(re, im, x(i, k), y(k, j));
      r(i, j) = Cplx(re, im);
    }
  }
  return r;
}

Vec4 operator*(const Mat4& x, const Vec4& v) {
  Vec4 r{};
  for (int i = 0; i < 4; ++i) {
    double re = 0.0, im = 0.0;
    for (int k = 0; k < 4; ++k) fma_into(re, im, x(i, k), v[k]);
    r[i] = Cplx(re, im);
  }
  return r;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) r(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return r;
}

Mat4 adjoint(const Mat4& x) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = std::conj(x(j, i));
  return r;
}

Mat4 commutator(const Mat4& a, const Mat4& b) { return a * b - b * a; }

Cplx trace(const Mat4& x) { return x(0, 0) + x(1, 1) + x(2, 2) + x(3, 3); }

Cplx trace_product(const Mat4& x, const Mat4& y) {
  double re = 0.0, im = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) fma_into(re, im, x(i, k), y(k, i));
  return {re, im};
}

Mat4 outer(const Vec4& u, const Vec4& v) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = u[i] * std::conj(v[j]);
  return r;
}

Cplx inner(const Vec4& u, const Vec4& v) {
  Cplx s = 0.0;
  for (int i = 0; i < 4; ++i) s += std::conj(u[i]) * v[i];
  return s;
}

double expectation(const Mat4& x, const Vec4& v) { return inner(v, x * v).real(); }

double max_abs(const Mat4& x) {
  double m = 0.0;
  for (const auto& z : x.a) m = std::max(m, std::abs(z));
  return m;
}

double frobenius_norm(const Mat4& x) {
  double s = 0.0;
  for (const auto& z : x.a) s += std::norm(z);
  return std::sqrt(s);
}

double hermitian_defect(const Mat4& x) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) m = std::max(m, std::abs(x(i, j) - std::conj(x(j, i))));
  return m;
}

Mat4 hermitize(const Mat4& x) {
  Mat4 r;
  for (int i = 0; i < 4; ++i) {
    r(i, i) = x(i, i).real();
    for (int j = i + 1; j < 4; ++j) {
      const Cplx z = 0.5 * (x(i, j) + std::conj(x(j, i)));
      r(i, j) = z;
      r(j, i) = std::conj(z);
    }
  }
  return r;
}

bool all_finite(const Mat4& x) {
  return std::all_of(x.a.begin(), x.a.end(), [](const Cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

Mat4 EigDecomp4::reconstruct() const {
  Mat4 r;
  for (int k = 0; k < 4; ++k) {
    const auto& v = eigenvectors[k];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r(i, j) += eigenvalues[k] * v[i] * std::conj(v[j]);
  }
  return r;
}

namespace {

constexpr double kHermitianTol = 1e-9;
constexpr double kOffDiagTol = 1e-14;
constexpr int kMaxSweeps = 60;

double off_diagonal_norm(const Mat4& a) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Annihilates a(p,q) with the unitary U = diag(1, e^{-i phi}) * R(c, s)
// acting on rows/columns p and q, and accumulates U into v.
void jacobi_rotate(Mat4& a, Mat4& v, int p, int q) {
  const Cplx apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const Cplx phase = apq / r;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * r);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const Cplx u00 = c;
  const Cplx u01 = s;
  const Cplx u10 = -s * std::conj(phase);
  const Cplx u11 = c * std::conj(phase);

  for (int k = 0; k < 4; ++k) {
    const Cplx akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * u00 + akq * u10;
    a(k, q) = akp * u01 + akq * u11;
  }
  for (int k = 0; k < 4; ++k) {
    const Cplx apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(u00) * apk + std::conj(u10) * aqk;
    a(q, k) = std::conj(u01) * apk + std::conj(u11) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = app - t * r;
  a(q, q) = aqq + t * r;

  for (int k = 0; k < 4; ++k) {
    const Cplx vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * u00 + vkq * u10;
    v(k, q) = vkp * u01 + vkq * u11;
  }
}

}  // namespace

EigDecomp4 herm_eig(const Mat4& input) {
  if (!all_finite(input)) throw Error(ErrorKind::NonFinite, "herm_eig input has non-finite entries");
  const double defect = hermitian_defect(input);
  if (defect > kHermitianTol)
    throw Error(ErrorKind::NonHermitianInput,
                "asymmetry " + std::to_string(defect) + " exceeds 1e-9");

  Mat4 a = hermitize(input);
  Mat4 v = Mat4::identity();
  const double scale = std::max(1.0, frobenius_norm(a));
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) < kOffDiagTol * scale) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 4; ++q) jacobi_rotate(a, v, p, q);
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  EigDecomp4 out;
  for (int k = 0; k < 4; ++k) {
    const int col = order[k];
    out.eigenvalues[k] = a(col, col).real();
    for (int i = 0; i < 4; ++i) out.eigenvectors[k][i] = v(i, col);
  }
  return out;
}

Mat4 psd_sqrt(const Mat4& a) {
  const EigDecomp4 e = herm_eig(a);
  EigDecomp4 root = e;
  for (int k = 0; k < 4; ++k) {
    const double lambda = e.eigenvalues[k];
    if (lambda < -1e-10)
      throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(lambda) + " below -1e-10");
    root.eigenvalues[k] = std::sqrt(std::max(lambda, 0.0));
  }
  return hermitize(root.reconstruct());
}

bool is_positive_definite(const Mat4& a) {
  // In-place lower Cholesky on the Hermitian part.
  std::array<Cplx, 16> l{};
  for (int j = 0; j < 4; ++j) {
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l[4 * j + k]);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    l[4 * j + j] = ljj;
    for (int i = j + 1; i < 4; ++i) {
      Cplx s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l[4 * i + k] * std::conj(l[4 * j + k]);
      l[4 * i + j] = s / ljj;
    }
  }
  return true;
}

}  // namespace qfb
