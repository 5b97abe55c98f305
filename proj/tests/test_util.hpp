#pragma once

#include <cmath>
#include <random>

#include "qfb/checks.hpp"
#include "qfb/linalg4.hpp"

namespace qfb::test {

inline double max_diff(const Mat4& a, const Mat4& b) { return max_abs(a - b); }

inline Mat4 random_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat4 m;
  for (auto& z : m.a) z = Cplx(n(rng), n(rng));
  return m;
}

inline Mat4 random_hermitian(std::mt19937_64& rng) {
  const Mat4 m = random_matrix(rng);
  return 0.5 * (m + adjoint(m));
}

inline Mat2 random_mat2(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat2 m;
  for (auto& z : m.a) z = Cplx(n(rng), n(rng));
  return m;
}

/// Entry-by-entry matrix product, independent of the library's operator*.
inline Mat4 naive_mul(const Mat4& a, const Mat4& b) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Cplx s = 0.0;
      for (int k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

inline Mat4 from_rows(std::initializer_list<std::initializer_list<Cplx>> rows) {
  Mat4 m;
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace qfb::test
