#include "wavecone/operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wavecone/grassmannian.hpp"

namespace wavecone {

namespace {

double int_power(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

double monomial_of(const std::vector<int>& e, const Vector& xi) {
  double v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i) v *= int_power(xi[static_cast<Eigen::Index>(i)], e[i]);
  return v;
}

// d/dxi_j of xi^e
double monomial_derivative(const std::vector<int>& e, const Vector& xi, int j) {
  if (e[j] == 0) return 0.0;
  double v = e[j];
  for (std::size_t i = 0; i < e.size(); ++i) {
    const int p = static_cast<int>(i) == j ? e[i] - 1 : e[i];
    v *= int_power(xi[static_cast<Eigen::Index>(i)], p);
  }
  return v;
}

void require_length(const Vector& xi, int d, const char* what) {
  if (xi.size() != d) {
    std::ostringstream os;
    os << what << ": expected a vector of length " << d << ", got " << xi.size();
    throw InputError(os.str());
  }
}

// Polynomial in l variables, exponent vector -> coefficient.
using Poly = std::map<std::vector<int>, double>;

Poly multiply_linear(const Poly& p, const Eigen::RowVectorXd& form) {
  Poly out;
  for (const auto& [e, c] : p) {
    for (Eigen::Index j = 0; j < form.size(); ++j) {
      if (form[j] == 0.0) continue;
      auto f = e;
      ++f[static_cast<std::size_t>(j)];
      out[f] += c * form[j];
    }
  }
  return out;
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int a : entries_) {
    if (a < 0) throw InputError("multi-index entries must be non-negative");
    order_ += a;
  }
}

MultiIndex MultiIndex::zero(int dimension) { return MultiIndex(std::vector<int>(dimension, 0)); }

MultiIndex MultiIndex::unit(int dimension, int axis, int power) {
  std::vector<int> e(dimension, 0);
  e.at(axis) = power;
  return MultiIndex(std::move(e));
}

double MultiIndex::monomial(const Vector& xi) const { return monomial_of(entries_, xi); }

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.dimension() != dimension()) throw InputError("multi-index dimension mismatch");
  auto e = entries_;
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.entries_[i];
  return MultiIndex(std::move(e));
}

bool ColexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  if (a.dimension() != b.dimension()) return a.dimension() < b.dimension();
  for (int i = a.dimension() - 1; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

OperatorSpec::OperatorSpec(int d, int m, int n, int k, TermMap terms, std::optional<BuiltinTag> tag,
                           TopOrder top)
    : d_(d), m_(m), n_(n), k_(k), terms_(std::move(terms)), tag_(std::move(tag)) {
  if (d < 1) throw InputError("operator: d must be positive");
  if (m < 1 || n < 1) throw InputError("operator: m and n must be positive");
  if (k < 0) throw InputError("operator: order k must be non-negative");
  bool top_nonzero = false;
  for (const auto& [alpha, A] : terms_) {
    if (alpha.dimension() != d) {
      std::ostringstream os;
      os << "operator: multi-index of length " << alpha.dimension() << " in an operator with d = " << d;
      throw InputError(os.str());
    }
    if (alpha.order() > k) {
      std::ostringstream os;
      os << "operator: multi-index of order " << alpha.order() << " exceeds k = " << k;
      throw InputError(os.str());
    }
    if (A.rows() != n || A.cols() != m) {
      std::ostringstream os;
      os << "operator: coefficient of shape " << A.rows() << "x" << A.cols() << ", expected " << n << "x" << m;
      throw InputError(os.str());
    }
    if (!A.allFinite()) throw InputError("operator: coefficient entries must be finite");
    if (alpha.order() == k) {
      if (A.cwiseAbs().maxCoeff() > 0.0) top_nonzero = true;
    } else {
      homogeneous_ = false;
    }
  }
  if (!top_nonzero && top == TopOrder::required_nonzero) {
    throw InputError("operator: at least one coefficient with |alpha| = k must be nonzero");
  }
}

OperatorSpec OperatorSpec::principal_part() const {
  TermMap top;
  for (const auto& [alpha, A] : terms_) {
    if (alpha.order() == k_) top.emplace(alpha, A);
  }
  return OperatorSpec(d_, m_, n_, k_, std::move(top), tag_, TopOrder::may_vanish);
}

double OperatorSpec::coefficient_scale() const {
  double s = 0.0;
  for (const auto& [alpha, A] : terms_) {
    if (alpha.order() == k_) s = std::max(s, A.norm());
  }
  return s;
}

double OperatorSpec::symbol_bound() const {
  double s = 0.0;
  for (const auto& [alpha, A] : terms_) {
    if (alpha.order() != k_) continue;
    s += A.rows() == 1 || A.cols() == 1 ? A.norm() : Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
  }
  return s;
}

double OperatorSpec::symbol_lipschitz() const { return k_ * symbol_bound(); }

double OperatorSpec::applied_lipschitz(const Vector& lambda) const {
  require_length(lambda, m_, "applied_lipschitz");
  double s = 0.0;
  for (const auto& [alpha, A] : terms_) {
    if (alpha.order() == k_) s += (A * lambda).norm();
  }
  return k_ * s;
}

OperatorSpec OperatorSpec::operator+(const OperatorSpec& other) const {
  if (other.d_ != d_ || other.m_ != m_ || other.n_ != n_) {
    throw InputError("operator sum: dimensions (d, m, n) must agree");
  }
  TermMap sum = terms_;
  for (const auto& [alpha, A] : other.terms_) {
    auto it = sum.find(alpha);
    if (it == sum.end()) {
      sum.emplace(alpha, A);
    } else {
      it->second += A;
    }
  }
  return OperatorSpec(d_, m_, n_, std::max(k_, other.k_), std::move(sum), std::nullopt, TopOrder::may_vanish);
}

SymbolValue principal_symbol(const OperatorSpec& op, const Vector& xi) {
  require_length(xi, op.d(), "principal_symbol");
  Matrix S = Matrix::Zero(op.n(), op.m());
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() == op.k()) S += alpha.monomial(xi) * A;
  }
  return {S, xi};
}

SymbolValue full_symbol(const OperatorSpec& op, const Vector& xi) {
  require_length(xi, op.d(), "full_symbol");
  Matrix S = Matrix::Zero(op.n(), op.m());
  for (const auto& [alpha, A] : op.terms()) S += alpha.monomial(xi) * A;
  return {S, xi};
}

OperatorSpec restrict_to_basis(const OperatorSpec& op, const Matrix& basis) {
  if (basis.rows() != op.d()) throw InputError("restriction: basis has the wrong ambient dimension");
  const int l = static_cast<int>(basis.cols());
  if (l == 0) throw InputError("restriction: the plane must have positive dimension");

  // Powers (B_i . eta)^p for every axis i and every power used.
  std::vector<std::vector<Poly>> powers(static_cast<std::size_t>(op.d()));
  for (int i = 0; i < op.d(); ++i) {
    auto& pw = powers[static_cast<std::size_t>(i)];
    pw.push_back(Poly{{std::vector<int>(static_cast<std::size_t>(l), 0), 1.0}});
    for (int p = 1; p <= op.k(); ++p) pw.push_back(multiply_linear(pw.back(), basis.row(i)));
  }

  std::map<std::vector<int>, Matrix> acc;
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() != op.k()) continue;
    Poly p{{std::vector<int>(static_cast<std::size_t>(l), 0), 1.0}};
    for (int i = 0; i < op.d(); ++i) {
      if (alpha[i] == 0) continue;
      const Poly& q = powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(alpha[i])];
      Poly r;
      for (const auto& [e1, c1] : p) {
        for (const auto& [e2, c2] : q) {
          auto e = e1;
          for (std::size_t j = 0; j < e.size(); ++j) e[j] += e2[j];
          r[e] += c1 * c2;
        }
      }
      p = std::move(r);
    }
    for (const auto& [e, c] : p) {
      if (c == 0.0) continue;
      auto it = acc.find(e);
      if (it == acc.end()) {
        acc.emplace(e, c * A);
      } else {
        it->second += c * A;
      }
    }
  }

  OperatorSpec::TermMap terms;
  for (auto& [e, M] : acc) terms.emplace(MultiIndex(e), std::move(M));
  return OperatorSpec(l, op.m(), op.n(), op.k(), std::move(terms), std::nullopt,
                      OperatorSpec::TopOrder::may_vanish);
}

OperatorSpec restrict_to_plane(const OperatorSpec& op, const Plane& plane) {
  if (plane.dimension() == 0) throw InputError("restrict_to_plane: the plane must have positive dimension");
  if (plane.ambient() != op.d()) throw InputError("restrict_to_plane: plane lives in the wrong ambient space");
  const Matrix& B = plane.basis();
  const double dev = (B.transpose() * B - Matrix::Identity(B.cols(), B.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10) throw InputError("restrict_to_plane: basis is not orthonormal");
  return restrict_to_basis(op, B);
}

Matrix stacked_principal_coefficients(const OperatorSpec& op) {
  std::vector<const Matrix*> blocks;
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() == op.k()) blocks.push_back(&A);
  }
  Matrix S(static_cast<Eigen::Index>(blocks.size()) * op.n(), op.m());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    S.middleRows(static_cast<Eigen::Index>(b) * op.n(), op.n()) = *blocks[b];
  }
  return S;
}

AppliedSymbol::AppliedSymbol(const OperatorSpec& op, const Vector& lambda) : d_(op.d()), n_(op.n()) {
  require_length(lambda, op.m(), "applied symbol");
  double s = 0.0;
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() != op.k()) continue;
    Vector c = A * lambda;
    s += c.norm();
    exponents_.push_back(alpha.entries());
    columns_.push_back(std::move(c));
  }
  lipschitz_ = op.k() * s;
}

Vector AppliedSymbol::value(const Vector& xi) const {
  Vector v = Vector::Zero(n_);
  for (std::size_t t = 0; t < exponents_.size(); ++t) v += monomial_of(exponents_[t], xi) * columns_[t];
  return v;
}

Matrix AppliedSymbol::jacobian(const Vector& xi) const {
  Matrix J = Matrix::Zero(n_, d_);
  for (std::size_t t = 0; t < exponents_.size(); ++t) {
    for (int j = 0; j < d_; ++j) {
      const double g = monomial_derivative(exponents_[t], xi, j);
      if (g != 0.0) J.col(j) += g * columns_[t];
    }
  }
  return J;
}

PrincipalSymbol::PrincipalSymbol(const OperatorSpec& op) : d_(op.d()), m_(op.m()), n_(op.n()) {
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() != op.k()) continue;
    exponents_.push_back(alpha.entries());
    coefficients_.push_back(A);
  }
}

Matrix PrincipalSymbol::operator()(const Vector& xi) const {
  Matrix S = Matrix::Zero(n_, m_);
  for (std::size_t t = 0; t < exponents_.size(); ++t) S += monomial_of(exponents_[t], xi) * coefficients_[t];
  return S;
}

// ---------------------------------------------------------------------------
// Named operators

int symmetric_index(int j, int k, int d) {
  if (j > k) std::swap(j, k);
  return j * d - j * (j - 1) / 2 + (k - j);
}

namespace {

class TermBuilder {
 public:
  TermBuilder(int d, int m, int n) : d_(d), m_(m), n_(n) {}

  void add(const MultiIndex& alpha, int row, int col, double value) {
    auto it = terms_.find(alpha);
    if (it == terms_.end()) it = terms_.emplace(alpha, Matrix::Zero(n_, m_)).first;
    it->second(row, col) += value;
  }

  MultiIndex e(int i, int power = 1) const { return MultiIndex::unit(d_, i, power); }

  OperatorSpec::TermMap take() {
    // Cancelling contributions leave zero blocks behind; drop them.
    for (auto it = terms_.begin(); it != terms_.end();) {
      it = it->second.isZero(0.0) ? terms_.erase(it) : std::next(it);
    }
    return std::move(terms_);
  }

 private:
  int d_, m_, n_;
  OperatorSpec::TermMap terms_;
};

int need_dimension(const BuiltinParams& p, int fallback, int min_d, const std::string& name) {
  const int d = p.d.value_or(fallback);
  if (d < min_d) {
    std::ostringstream os;
    os << "builtin " << name << ": requires d >= " << min_d << ", got " << d;
    throw InputError(os.str());
  }
  if (d > 8) throw InputError("builtin " + name + ": d above 8 is not supported");
  return d;
}

OperatorSpec make_curl(const BuiltinParams& prm) {
  const int d = need_dimension(prm, 3, 2, "curl");
  const int p = prm.p.value_or(1);
  if (p < 1 || p > 8) throw InputError("builtin curl: p must lie in [1, 8]");
  const int m = p * d;
  const int n = p * d * (d - 1) / 2;
  TermBuilder tb(d, m, n);
  int row = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k, ++row) {
        tb.add(tb.e(j), row, i * d + k, 1.0);
        tb.add(tb.e(k), row, i * d + j, -1.0);
      }
    }
  }
  return OperatorSpec(d, m, n, 1, tb.take(), BuiltinTag{"curl", d, p});
}

OperatorSpec make_curlcurl(const BuiltinParams& prm) {
  const int d = need_dimension(prm, 3, 2, "curlcurl");
  if (prm.p && *prm.p != d) {
    throw InputError("builtin curlcurl: acts on symmetric d x d fields, p must equal d");
  }
  const int s = d * (d + 1) / 2;
  TermBuilder tb(d, s, s);
  for (int j = 0; j < d; ++j) {
    for (int k = j; k < d; ++k) {
      const int row = symmetric_index(j, k, d);
      for (int i = 0; i < d; ++i) {
        tb.add(tb.e(i) + tb.e(k), row, symmetric_index(i, j, d), 1.0);
        tb.add(tb.e(i) + tb.e(j), row, symmetric_index(i, k, d), 1.0);
        tb.add(tb.e(j) + tb.e(k), row, symmetric_index(i, i, d), -1.0);
        tb.add(tb.e(i, 2), row, symmetric_index(j, k, d), -1.0);
      }
    }
  }
  return OperatorSpec(d, s, s, 2, tb.take(), BuiltinTag{"curlcurl", d, d});
}

OperatorSpec make_div_matrix(const BuiltinParams& prm) {
  const int d = need_dimension(prm, 3, 1, "div-matrix");
  const int p = prm.p.value_or(d);
  if (p < 1 || p > 8) throw InputError("builtin div-matrix: p must lie in [1, 8]");
  TermBuilder tb(d, p * d, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < d; ++j) tb.add(tb.e(j), i, i * d + j, 1.0);
  }
  return OperatorSpec(d, p * d, p, 1, tb.take(), BuiltinTag{"div-matrix", d, p});
}

OperatorSpec make_div_vector(const BuiltinParams& prm) {
  const int d = need_dimension(prm, 3, 1, "div-vector");
  TermBuilder tb(d, d, 1);
  for (int j = 0; j < d; ++j) tb.add(tb.e(j), 0, j, 1.0);
  return OperatorSpec(d, d, 1, 1, tb.take(), BuiltinTag{"div-vector", d, 1});
}

OperatorSpec make_gradient(const BuiltinParams& prm) {
  const int d = need_dimension(prm, 3, 1, "gradient");
  TermBuilder tb(d, 1, d);
  for (int j = 0; j < d; ++j) tb.add(tb.e(j), j, 0, 1.0);
  return OperatorSpec(d, 1, d, 1, tb.take(), BuiltinTag{"gradient", d, 1});
}

OperatorSpec make_laplacian(const BuiltinParams& prm) {
  const int d = need_dimension(prm, 3, 1, "laplacian");
  TermBuilder tb(d, 1, 1);
  for (int j = 0; j < d; ++j) tb.add(tb.e(j, 2), 0, 0, 1.0);
  return OperatorSpec(d, 1, 1, 2, tb.take(), BuiltinTag{"laplacian", d, 1});
}

void require_fixed_d3(const BuiltinParams& prm, const std::string& name) {
  if (prm.d && *prm.d != 3) throw InputError("builtin " + name + ": defined only for d = 3");
  if (prm.p) throw InputError("builtin " + name + ": takes no parameter p");
}

OperatorSpec make_cubic3d(const BuiltinParams& prm) {
  require_fixed_d3(prm, "cubic3d");
  TermBuilder tb(3, 1, 1);
  for (int j = 0; j < 3; ++j) tb.add(tb.e(j, 3), 0, 0, 1.0);
  return OperatorSpec(3, 1, 1, 3, tb.take(), BuiltinTag{"cubic3d", 3, 1});
}

// (xi1^6 + xi2^6 + xi3^6) w1 + (xi1^3 + xi2^3 + xi3^3)^2 w2
OperatorSpec make_sextic3d(const BuiltinParams& prm) {
  require_fixed_d3(prm, "sextic3d");
  TermBuilder tb(3, 2, 1);
  for (int i = 0; i < 3; ++i) {
    tb.add(tb.e(i, 6), 0, 0, 1.0);
    tb.add(tb.e(i, 6), 0, 1, 1.0);
    for (int j = i + 1; j < 3; ++j) tb.add(tb.e(i, 3) + tb.e(j, 3), 0, 1, 2.0);
  }
  return OperatorSpec(3, 2, 1, 6, tb.take(), BuiltinTag{"sextic3d", 3, 1});
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"curl", "curlcurl", "div-matrix", "div-vector", "gradient", "laplacian", "cubic3d", "sextic3d"};
}

OperatorSpec builtin_operator(const std::string& name, const BuiltinParams& params) {
  if (name == "curl") return make_curl(params);
  if (name == "curlcurl") return make_curlcurl(params);
  if (name == "div-matrix" || name == "div") return make_div_matrix(params);
  if (name == "div-vector") return make_div_vector(params);
  if (name == "gradient") return make_gradient(params);
  if (name == "laplacian") return make_laplacian(params);
  if (name == "cubic3d") return make_cubic3d(params);
  if (name == "sextic3d") return make_sextic3d(params);
  throw InputError("unknown builtin operator '" + name + "'");
}

}  // namespace wavecone
