#include "wavecone/closed_form.hpp"

#include <cmath>

namespace wavecone {

namespace {

enum class Family { none, curl, curlcurl, div, elliptic };

Family family_of(const OperatorSpec& op) {
  if (!op.builtin()) return Family::none;
  const auto& n = op.builtin()->name;
  if (n == "curl") return Family::curl;
  if (n == "curlcurl") return Family::curlcurl;
  if (n == "div-matrix" || n == "div-vector") return Family::div;
  if (n == "gradient" || n == "laplacian") return Family::elliptic;
  return Family::none;
}

// div-vector is the one-row case of div-matrix.
int rows_of(const OperatorSpec& op) {
  return op.builtin()->name == "div-vector" ? 1 : op.builtin()->p;
}

Matrix as_rows(const Vector& lambda, int p, int d) {
  Matrix L(p, d);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < d; ++j) L(i, j) = lambda[i * d + j];
  }
  return L;
}

Matrix as_symmetric(const Vector& lambda, int d) {
  Matrix S(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) S(j, k) = lambda[symmetric_index(j, k, d)];
  }
  return S;
}

// Lines xi with lambda in ker A(xi); empty when lambda is not in the wave cone.
std::vector<Vector> kernel_lines(Family f, const OperatorSpec& op, const Vector& lambda, double tol) {
  const int d = op.d();
  if (f == Family::curl) {
    Eigen::JacobiSVD<Matrix> svd(as_rows(lambda, op.builtin()->p, d), Eigen::ComputeFullV);
    if (numeric_rank(svd.singularValues(), tol) > 1) return {};
    return {svd.matrixV().col(0)};
  }
  if (f == Family::curlcurl) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(as_symmetric(lambda, d));
    const Vector& mu = es.eigenvalues();
    const double ref = mu.cwiseAbs().maxCoeff();
    std::vector<int> nz;
    for (int i = 0; i < d; ++i) {
      if (std::abs(mu[i]) > tol * ref) nz.push_back(i);
    }
    if (nz.size() == 1) return {es.eigenvectors().col(nz[0])};
    if (nz.size() == 2 && mu[nz[0]] * mu[nz[1]] < 0) {
      const int neg = mu[nz[0]] < 0 ? nz[0] : nz[1];
      const int pos = neg == nz[0] ? nz[1] : nz[0];
      const Vector a = std::sqrt(mu[pos]) * es.eigenvectors().col(pos);
      const Vector b = std::sqrt(-mu[neg]) * es.eigenvectors().col(neg);
      return {(a + b).normalized(), (a - b).normalized()};
    }
    return {};
  }
  return {};
}

// An l-plane meeting none of the given lines (l < d).
Plane plane_avoiding(const std::vector<Vector>& lines, int d, int l) {
  if (lines.empty()) return Plane::first_coordinates(d, l);
  Vector nu = lines[0];
  for (std::size_t i = 1; i < lines.size(); ++i) nu += (nu.dot(lines[i]) >= 0 ? 1.0 : -1.0) * lines[i];
  const Plane perp = orthogonal_complement(Plane(nu.normalized()));
  return Plane(perp.basis().leftCols(l));
}

}  // namespace

bool has_closed_form(const OperatorSpec& op) { return family_of(op) != Family::none; }

Vector symmetric_product(const Vector& a, const Vector& xi) {
  const auto d = static_cast<int>(a.size());
  Vector out = Vector::Zero(d * (d + 1) / 2);
  for (int j = 0; j < d; ++j) {
    for (int k = j; k < d; ++k) out[symmetric_index(j, k, d)] = 0.5 * (a[j] * xi[k] + a[k] * xi[j]);
  }
  return out;
}

std::optional<ClosedFormAnswer> closed_form_ell(const OperatorSpec& op, const Vector& lambda, int l, double tol) {
  const Family f = family_of(op);
  if (f == Family::none) return std::nullopt;
  const int d = op.d();
  ClosedFormAnswer ans;
  switch (f) {
    case Family::elliptic:
      ans.decision = Decision::non_member;
      ans.plane = Plane::first_coordinates(d, l);
      ans.rule = "elliptic symbol: every cone is {0}";
      return ans;
    case Family::curl:
    case Family::curlcurl: {
      const auto lines = kernel_lines(f, op, lambda, tol);
      if (l == d && !lines.empty()) {
        ans.decision = Decision::member;
        ans.direction = lines[0];
        ans.rule = f == Family::curl ? "lambda = a (x) xi" : "lambda = a (.) xi";
      } else {
        ans.decision = Decision::non_member;
        ans.plane = l == d ? Plane::first_coordinates(d, d) : plane_avoiding(lines, d, l);
        ans.rule = lines.empty() ? "lambda outside the wave cone"
                                 : "kernel lines of lambda avoided by an l-plane, l < d";
      }
      return ans;
    }
    case Family::div: {
      const int p = rows_of(op);
      Eigen::JacobiSVD<Matrix> svd(as_rows(lambda, p, d), Eigen::ComputeFullV);
      const int r = numeric_rank(svd.singularValues(), tol);
      if (r < l) {
        ans.decision = Decision::member;
        ans.direction = svd.matrixV().col(d - 1);
        ans.rule = "rank M < l: every l-plane meets ker M";
      } else {
        ans.decision = Decision::non_member;
        ans.plane = Plane(svd.matrixV().leftCols(l));
        ans.rule = "rank M >= l: the row space of M avoids ker M";
      }
      return ans;
    }
    case Family::none:
      break;
  }
  return std::nullopt;
}

std::optional<ClosedFormAnswer> closed_form_n(const OperatorSpec& op, const Vector& lambda, int l, double tol) {
  const Family f = family_of(op);
  if (f == Family::none) return std::nullopt;
  const int d = op.d();
  ClosedFormAnswer ans;
  switch (f) {
    case Family::elliptic:
      ans.decision = Decision::non_member;
      ans.rule = "elliptic symbol: every cone is {0}";
      return ans;
    case Family::curl:
    case Family::curlcurl: {
      const auto lines = kernel_lines(f, op, lambda, tol);
      if (l == d - 1 && !lines.empty()) {
        ans.decision = Decision::member;
        ans.normal_space = Plane(lines[0]);
        ans.rule = "N^{d-1} equals the wave cone";
      } else {
        ans.decision = Decision::non_member;
        ans.rule = lines.empty() ? "lambda outside the wave cone"
                                 : "a single kernel line cannot contain a subspace of dimension >= 2";
      }
      return ans;
    }
    case Family::div: {
      const int p = rows_of(op);
      Eigen::JacobiSVD<Matrix> svd(as_rows(lambda, p, d), Eigen::ComputeFullV);
      const int r = numeric_rank(svd.singularValues(), tol);
      if (r <= l) {
        ans.decision = Decision::member;
        if (l < d) ans.normal_space = Plane(svd.matrixV().rightCols(d - l));
        ans.rule = "rank M <= l: ker M contains a (d-l)-plane";
      } else {
        ans.decision = Decision::non_member;
        ans.rule = "rank M > l: dim ker M < d - l";
      }
      return ans;
    }
    case Family::none:
      break;
  }
  return std::nullopt;
}

std::optional<ClosedFormTriviality> closed_form_lambda_trivial(const OperatorSpec& op, int l) {
  const Family f = family_of(op);
  if (f == Family::none) return std::nullopt;
  const int d = op.d();
  ClosedFormTriviality t;
  Vector e0 = Vector::Zero(op.m());
  e0[0] = 1.0;
  switch (f) {
    case Family::elliptic:
      t.status = Triviality::confirmed_trivial;
      t.rule = "elliptic symbol";
      break;
    case Family::curl:
    case Family::curlcurl:
      if (l < d) {
        t.status = Triviality::confirmed_trivial;
        t.rule = "each lambda in the wave cone has at most two kernel lines; an l-plane with l < d avoids them";
      } else {
        t.status = Triviality::found_nontrivial;
        t.lambda = e0;
        t.rule = "e1 (x) e1 lies in the wave cone";
      }
      break;
    case Family::div:
      if (l == 1) {
        t.status = Triviality::confirmed_trivial;
        t.rule = "rank M < 1 forces M = 0";
      } else {
        t.status = Triviality::found_nontrivial;
        t.lambda = e0;
        t.rule = "e1 (x) e1 has rank 1 < l";
      }
      break;
    case Family::none:
      return std::nullopt;
  }
  return t;
}

std::optional<ClosedFormTriviality> closed_form_n_trivial(const OperatorSpec& op, int l) {
  const Family f = family_of(op);
  if (f == Family::none) return std::nullopt;
  const int d = op.d();
  ClosedFormTriviality t;
  Vector e0 = Vector::Zero(op.m());
  e0[0] = 1.0;
  switch (f) {
    case Family::elliptic:
      t.status = Triviality::confirmed_trivial;
      t.rule = "elliptic symbol";
      break;
    case Family::curl:
    case Family::curlcurl:
      if (l < d - 1) {
        t.status = Triviality::confirmed_trivial;
        t.rule = "kernel lines cannot contain a subspace of dimension >= 2";
      } else {
        t.status = Triviality::found_nontrivial;
        t.lambda = e0;
        t.rule = "N^{d-1} equals the wave cone, which contains e1 (x) e1";
      }
      break;
    case Family::div:
      if (l == 0) {
        t.status = Triviality::confirmed_trivial;
        t.rule = "rank M <= 0 forces M = 0";
      } else {
        t.status = Triviality::found_nontrivial;
        t.lambda = e0;
        t.rule = "e1 (x) e1 has rank 1 <= l";
      }
      break;
    case Family::none:
      return std::nullopt;
  }
  return t;
}

}  // namespace wavecone
