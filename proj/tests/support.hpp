#pragma once

// Random operators and small helpers shared by the unit tests and the
// acceptance driver.

#include <random>
#include <vector>

#include "wavecone/cone.hpp"

namespace wavecone::testing {

inline std::vector<MultiIndex> monomials(int d, int k) {
  std::vector<MultiIndex> out;
  std::vector<int> e(d, 0);
  auto rec = [&](auto&& self, int axis, int left) -> void {
    if (axis == d - 1) {
      e[axis] = left;
      out.emplace_back(e);
      return;
    }
    for (int i = left; i >= 0; --i) {
      e[axis] = i;
      self(self, axis + 1, left - i);
    }
  };
  rec(rec, 0, k);
  return out;
}

inline Vector random_unit(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> g;
  Vector v(m);
  for (int i = 0; i < m; ++i) v(i) = g(rng);
  return v.normalized();
}

/// Homogeneous operator of order k. Each monomial is kept with probability
/// density (at least one is kept). Entries are Gaussian, or small integers
/// when integer is set, which produces structured kernels.
inline OperatorSpec random_operator(std::mt19937_64& rng, int d, int m, int n, int k, double density = 1.0,
                                    bool integer = false) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(-2, 2);
  for (;;) {
    OperatorSpec::TermMap terms;
    for (const MultiIndex& a : monomials(d, k)) {
      if (u(rng) > density) continue;
      Matrix A(n, m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) A(i, j) = integer ? small(rng) : g(rng);
      }
      if (A.norm() > 0.0) terms.emplace(a, A);
    }
    if (!terms.empty()) return OperatorSpec(d, m, n, k, std::move(terms));
  }
}

/// Same, with top-order coefficients sharing a planted kernel of dimension r.
inline OperatorSpec planted_kernel_operator(std::mt19937_64& rng, int d, int m, int n, int k, int r) {
  const OperatorSpec base = random_operator(rng, d, m, n, k);
  Matrix K(m, r);
  for (int j = 0; j < r; ++j) K.col(j) = random_unit(rng, m);
  const Matrix P = r > 0 ? Matrix(Matrix::Identity(m, m) - K * (K.transpose() * K).inverse() * K.transpose())
                         : Matrix(Matrix::Identity(m, m));
  OperatorSpec::TermMap terms;
  for (const auto& [a, A] : base.terms()) terms.emplace(a, A * P);
  return OperatorSpec(d, m, n, k, std::move(terms));
}

/// Distance between the column spans of two orthonormal bases, as the
/// spectral norm of the projector difference.
inline double subspace_distance(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  const Matrix diff = a * a.transpose() - b * b.transpose();
  return Eigen::JacobiSVD<Matrix>(diff).singularValues()(0);
}

/// Intersection of ker A^k(xi) over sampled directions: the null space of
/// the stacked symbols.
inline Matrix sampled_kernel_intersection(const OperatorSpec& op, std::mt19937_64& rng, int samples) {
  Matrix stack(0, op.m());
  for (int s = 0; s < samples; ++s) {
    const Matrix S = principal_symbol(op, random_unit(rng, op.d())).matrix;
    Matrix next(stack.rows() + S.rows(), op.m());
    next << stack, S;
    stack = next;
  }
  Eigen::JacobiSVD<Matrix> svd(stack, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * top;
  return svd.matrixV().rightCols(op.m() - rank);
}

}  // namespace wavecone::testing
