#pragma once

// Fixed-size complex linear algebra for the two-qubit problem: 2x2 factors,
// 4x4 operators, and a Jacobi eigensolver for 4x4 Hermitian matrices.

#include <array>
#include <complex>
#include <cstddef>

namespace qfb {

using Cplx = std::complex<double>;
using Vec4 = std::array<Cplx, 4>;

struct Mat2 {
  std::array<Cplx, 4> a{};

  Cplx& operator()(int i, int j) { return a[2 * i + j]; }
  const Cplx& operator()(int i, int j) const { return a[2 * i + j]; }

  static Mat2 identity();
  bool operator==(const Mat2&) const = default;
};

struct Mat4 {
  std::array<Cplx, 16> a{};

  Cplx& operator()(int i, int j) { return a[4 * i + j]; }
  const Cplx& operator()(int i, int j) const { return a[4 * i + j]; }

  static Mat4 identity();
  static Mat4 diag(double d0, double d1, double d2, double d3);
  bool operator==(const Mat4&) const = default;
};

Mat2 operator+(const Mat2& x, const Mat2& y);
Mat2 operator-(const Mat2& x, const Mat2& y);
Mat2 operator*(Cplx s, const Mat2& x);
Mat2 operator*(const Mat2& x, const Mat2& y);

Mat4 operator+(const Mat4& x, const Mat4& y);
Mat4 operator-(const Mat4& x, const Mat4& y);
Mat4 operator-(const Mat4& x);
Mat4 operator*(Cplx s, const Mat4& x);
Mat4 operator*(double s, const Mat4& x);
Mat4 operator*(const Mat4& x, const Mat4& y);
Mat4& operator+=(Mat4& x, const Mat4& y);
Vec4 operator*(const Mat4& x, const Vec4& v);

Mat4 kron(const Mat2& a, const Mat2& b);
Mat4 adjoint(const Mat4& x);
Mat4 commutator(const Mat4& a, const Mat4& b);
Cplx trace(const Mat4& x);
/// Tr(x y) without forming the product.
Cplx trace_product(const Mat4& x, const Mat4& y);
Mat4 outer(const Vec4& u, const Vec4& v);  // u v*
Cplx inner(const Vec4& u, const Vec4& v);  // u* v
/// v* x v for Hermitian x, real part only.
double expectation(const Mat4& x, const Vec4& v);

double max_abs(const Mat4& x);
double frobenius_norm(const Mat4& x);
/// max |x - x*| entrywise.
double hermitian_defect(const Mat4& x);
Mat4 hermitize(const Mat4& x);
bool all_finite(const Mat4& x);

struct EigDecomp4 {
  std::array<double, 4> eigenvalues{};  // ascending
  std::array<Vec4, 4> eigenvectors{};   // eigenvectors[i] pairs with eigenvalues[i]

  Mat4 reconstruct() const;
};

/// Cyclic complex Jacobi. The input is Hermitized if its asymmetry is within
/// 1e-9; anything larger throws NonHermitianInput.
EigDecomp4 herm_eig(const Mat4& a);

/// Principal square root of a PSD matrix. Eigenvalues in [-1e-10, 0) are
/// treated as zero; more negative ones throw NotPSD.
Mat4 psd_sqrt(const Mat4& a);

/// Cholesky attempt on a Hermitian matrix: true iff every pivot is strictly
/// positive, i.e. the matrix is numerically positive definite.
bool is_positive_definite(const Mat4& a);

}  // namespace qfb
