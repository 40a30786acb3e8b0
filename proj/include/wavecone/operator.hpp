#pragma once

// Constant-coefficient linear differential operators
//
//     A phi = sum_{|alpha| <= k} A_alpha d^alpha phi,   A_alpha in R^{n x m},
//
// acting on R^m-valued fields over R^d, together with their principal
// symbols, restrictions to linear subspaces, and the named operators used
// throughout the library.

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavecone/errors.hpp"

namespace wavecone {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Plane;

/// Multi-index alpha = (alpha_1, ..., alpha_d) of non-negative integers.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  static MultiIndex zero(int dimension);
  /// power * e_axis
  static MultiIndex unit(int dimension, int axis, int power = 1);

  int dimension() const { return static_cast<int>(entries_.size()); }
  int order() const { return order_; }
  int operator[](int i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }

  /// xi^alpha = prod_i xi_i^{alpha_i}; 0^0 = 1.
  double monomial(const Vector& xi) const;

  MultiIndex operator+(const MultiIndex& other) const;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> entries_;
  int order_ = 0;
};

/// Colexicographic order: the last coordinate is most significant.
struct ColexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// Identity of a named operator, kept so that closed-form classifications
/// can be applied without re-deriving them from coefficients.
struct BuiltinTag {
  std::string name;
  int d = 0;
  int p = 0;
  friend bool operator==(const BuiltinTag&, const BuiltinTag&) = default;
};

class OperatorSpec {
 public:
  using TermMap = std::map<MultiIndex, Matrix, ColexLess>;

  /// Whether a vanishing top-order part is tolerated. User-facing operators
  /// must have a nonzero A_alpha with |alpha| = k; restrictions of an
  /// operator to a subspace may vanish identically.
  enum class TopOrder { required_nonzero, may_vanish };

  OperatorSpec(int d, int m, int n, int k, TermMap terms,
               std::optional<BuiltinTag> tag = std::nullopt,
               TopOrder top = TopOrder::required_nonzero);

  int d() const { return d_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int k() const { return k_; }
  bool homogeneous() const { return homogeneous_; }
  const TermMap& terms() const { return terms_; }
  const std::optional<BuiltinTag>& builtin() const { return tag_; }

  /// Operator made of the |alpha| = k terms only. Keeps the builtin tag.
  OperatorSpec principal_part() const;

  /// Largest Frobenius norm among the top-order coefficient matrices; the
  /// reference scale for every "numerically zero" decision.
  double coefficient_scale() const;

  /// Sum of spectral norms of the top-order coefficients. Bounds
  /// |A^k(xi) v| / |v| on the unit sphere.
  double symbol_bound() const;

  /// k * symbol_bound(): Lipschitz constant of xi -> A^k(xi) on the unit ball.
  double symbol_lipschitz() const;

  /// Lipschitz constant of xi -> A^k(xi) lambda on the unit ball,
  /// k * sum |A_alpha lambda|.
  double applied_lipschitz(const Vector& lambda) const;

  /// Termwise sum; both operators must share (d, m, n). The builtin tag is
  /// dropped.
  OperatorSpec operator+(const OperatorSpec& other) const;

 private:
  int d_, m_, n_, k_;
  TermMap terms_;
  std::optional<BuiltinTag> tag_;
  bool homogeneous_ = true;
};

struct SymbolValue {
  Matrix matrix;
  Vector at;
};

/// A^k(xi) = sum_{|alpha| = k} A_alpha xi^alpha.
SymbolValue principal_symbol(const OperatorSpec& op, const Vector& xi);

/// sum over all stored alpha of A_alpha xi^alpha.
SymbolValue full_symbol(const OperatorSpec& op, const Vector& xi);

/// Principal part of op composed with the projection onto the plane,
/// written in the plane's orthonormal coordinates: the returned operator B on
/// R^l satisfies B(xi') = A^k(basis * xi'). Coefficients come from exact
/// multinomial expansion.
OperatorSpec restrict_to_plane(const OperatorSpec& op, const Plane& plane);

/// Same expansion for an arbitrary d x l basis (no orthonormality check).
/// Used by the Grassmannian searches, which move through non-orthonormal
/// frames.
OperatorSpec restrict_to_basis(const OperatorSpec& op, const Matrix& basis);

/// Top-order coefficients stacked vertically into a (#alpha * n) x m matrix.
Matrix stacked_principal_coefficients(const OperatorSpec& op);

/// xi -> A^k(xi) lambda, precompiled for repeated evaluation.
class AppliedSymbol {
 public:
  AppliedSymbol(const OperatorSpec& op, const Vector& lambda);

  int d() const { return d_; }
  int n() const { return n_; }
  Vector value(const Vector& xi) const;
  double norm(const Vector& xi) const { return value(xi).norm(); }
  /// n x d matrix of partial derivatives.
  Matrix jacobian(const Vector& xi) const;
  double lipschitz() const { return lipschitz_; }

 private:
  int d_, n_;
  std::vector<std::vector<int>> exponents_;
  std::vector<Vector> columns_;
  double lipschitz_ = 0.0;
};

/// xi -> A^k(xi), precompiled.
class PrincipalSymbol {
 public:
  explicit PrincipalSymbol(const OperatorSpec& op);
  Matrix operator()(const Vector& xi) const;
  int d() const { return d_; }
  int m() const { return m_; }
  int n() const { return n_; }

 private:
  int d_, m_, n_;
  std::vector<std::vector<int>> exponents_;
  std::vector<Matrix> coefficients_;
};

struct BuiltinParams {
  std::optional<int> d;
  std::optional<int> p;
};

/// Named operators: curl, curlcurl, div-matrix, div-vector, gradient,
/// laplacian, cubic3d, sextic3d.
OperatorSpec builtin_operator(const std::string& name, const BuiltinParams& params = {});

std::vector<std::string> builtin_names();

/// Index of the symmetric-matrix coordinate (j, k) used by curlcurl, with
/// the upper triangle stored row by row.
int symmetric_index(int j, int k, int d);

}  // namespace wavecone
