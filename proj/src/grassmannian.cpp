#include "wavecone/grassmannian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wavecone {

Matrix qr_orthonormalize(const Matrix& a) {
  const Eigen::Index l = a.cols();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), l);
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < l; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Plane::Plane(const Matrix& basis) {
  if (basis.rows() < 1) throw InputError("plane: ambient dimension must be positive");
  if (basis.cols() < 1 || basis.cols() > basis.rows()) {
    throw InputError("plane: dimension must satisfy 1 <= l <= d");
  }
  if (!basis.allFinite()) throw InputError("plane: basis entries must be finite");
  const Matrix g = basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols());
  if (g.cwiseAbs().maxCoeff() > 1e-10) throw InputError("plane: basis columns are not orthonormal");
  basis_ = qr_orthonormalize(basis);
}

Plane Plane::zero(int d) { return Plane(Matrix(d, 0), Unchecked{}); }

Plane Plane::span_of(const Matrix& vectors) {
  if (vectors.cols() < 1) throw InputError("plane: empty spanning set");
  Eigen::JacobiSVD<Matrix> svd(vectors);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0)) || s.size() < vectors.cols()) {
    throw InputError("plane: spanning vectors are linearly dependent");
  }
  return Plane(qr_orthonormalize(vectors), Unchecked{});
}

Plane Plane::coordinate(int d, const std::vector<int>& axes) {
  Matrix b = Matrix::Zero(d, static_cast<Eigen::Index>(axes.size()));
  for (std::size_t j = 0; j < axes.size(); ++j) {
    if (axes[j] < 0 || axes[j] >= d) throw InputError("plane: coordinate axis out of range");
    b(axes[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return Plane(b);
}

Plane Plane::first_coordinates(int d, int l) {
  std::vector<int> axes(static_cast<std::size_t>(l));
  for (int j = 0; j < l; ++j) axes[static_cast<std::size_t>(j)] = j;
  return coordinate(d, axes);
}

Matrix projector(const Plane& plane) { return plane.basis() * plane.basis().transpose(); }

Plane orthogonal_complement(const Plane& plane) {
  const int d = plane.ambient();
  const int l = plane.dimension();
  if (l == d) return Plane::zero(d);
  if (l == 0) return Plane(Matrix::Identity(d, d));
  Eigen::HouseholderQR<Matrix> qr(plane.basis());
  Matrix q = qr.householderQ();
  return Plane(q.rightCols(d - l));
}

std::vector<double> principal_angles(const Plane& a, const Plane& b) {
  if (a.ambient() != b.ambient() || a.dimension() != b.dimension()) {
    throw InputError("principal angles: planes must share ambient space and dimension");
  }
  if (a.is_zero()) return {};
  // cos from the overlap for large angles, sin from the residual for small
  // ones; each is accurate where the other is not.
  Eigen::JacobiSVD<Matrix> cs(a.basis().transpose() * b.basis());
  const Matrix resid = b.basis() - projector(a) * b.basis();
  Eigen::JacobiSVD<Matrix> sn(resid);
  const auto l = static_cast<std::size_t>(a.dimension());
  std::vector<double> out(l);
  for (std::size_t i = 0; i < l; ++i) {
    const double c = std::clamp(cs.singularValues()(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    const double s = std::clamp(sn.singularValues()(static_cast<Eigen::Index>(l - 1 - i)), 0.0, 1.0);
    out[i] = c > std::sqrt(0.5) ? std::asin(s) : std::acos(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double principal_angle_distance(const Plane& a, const Plane& b) {
  double s = 0.0;
  for (double t : principal_angles(a, b)) s += t * t;
  return std::sqrt(s);
}

Plane uniform_plane(int l, int d, std::mt19937_64& rng) {
  if (d < 1 || l < 1 || l > d) {
    std::ostringstream os;
    os << "uniform_plane: need 1 <= l <= d, got l = " << l << ", d = " << d;
    throw InputError(os.str());
  }
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(d, l);
  for (int j = 0; j < l; ++j) {
    for (int i = 0; i < d; ++i) a(i, j) = g(rng);
  }
  return Plane(qr_orthonormalize(a));
}

Vector uniform_direction(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = g(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

namespace {

constexpr double kPi = std::numbers::pi;

// The pole is the last coordinate; rings sit at polar angles pi * i / res and
// carry a grid of the (d-2)-sphere scaled by sin(theta).
std::vector<Vector> lift_ring(const std::vector<Vector>& ring, double theta) {
  std::vector<Vector> out;
  out.reserve(ring.size());
  for (const Vector& u : ring) {
    Vector x(u.size() + 1);
    x.head(u.size()) = std::sin(theta) * u;
    x[u.size()] = std::cos(theta);
    out.push_back(x);
  }
  return out;
}

std::vector<Vector> circle(int count, double span) {
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) {
    const double a = span * i / count;
    Vector v(2);
    v << std::cos(a), std::sin(a);
    // keep axis points exact
    for (Eigen::Index j = 0; j < 2; ++j) {
      if (std::abs(v[j]) < 1e-15) v[j] = 0.0;
      if (std::abs(std::abs(v[j]) - 1.0) < 1e-15) v[j] = v[j] > 0 ? 1.0 : -1.0;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<Vector> sphere_grid(int d, int resolution) {
  if (d < 1 || resolution < 1) throw InputError("sphere_grid: need d >= 1 and resolution >= 1");
  if (d == 1) return {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
  if (d == 2) return circle(2 * resolution, 2 * kPi);
  std::vector<Vector> out;
  for (int i = 0; i <= resolution; ++i) {
    const double theta = kPi * i / resolution;
    if (i == 0 || i == resolution) {
      Vector x = Vector::Zero(d);
      x[d - 1] = i == 0 ? 1.0 : -1.0;
      out.push_back(x);
      continue;
    }
    const int sub = std::max(1, static_cast<int>(std::ceil(resolution * std::sin(theta) - 1e-9)));
    for (auto& x : lift_ring(sphere_grid(d - 1, sub), theta)) out.push_back(std::move(x));
  }
  return out;
}

std::vector<Vector> projective_grid(int d, int resolution) {
  if (d < 1 || resolution < 1) throw InputError("projective_grid: need d >= 1 and resolution >= 1");
  if (d == 1) return {Vector::Constant(1, 1.0)};
  if (d == 2) {
    auto out = circle(resolution, kPi);
    if (resolution % 2 == 1) {
      Vector e2(2);
      e2 << 0.0, 1.0;
      out.insert(out.begin() + (resolution + 1) / 2, e2);
    }
    return out;
  }
  std::vector<Vector> out;
  for (int i = 0; 2 * i < resolution; ++i) {
    const double theta = kPi * i / resolution;
    if (i == 0) {
      Vector x = Vector::Zero(d);
      x[d - 1] = 1.0;
      out.push_back(x);
      continue;
    }
    const int sub = std::max(1, static_cast<int>(std::ceil(resolution * std::sin(theta) - 1e-9)));
    for (auto& x : lift_ring(sphere_grid(d - 1, sub), theta)) out.push_back(std::move(x));
  }
  // The equator is itself a projective space one dimension down.
  for (auto& x : lift_ring(projective_grid(d - 1, resolution), kPi / 2)) {
    x[d - 1] = 0.0;
    out.push_back(std::move(x));
  }
  return out;
}

bool plane_grid_supported(int l, int d) {
  if (d < 1 || l < 1 || l > d) return false;
  if (l == d) return true;
  if (d <= 3) return true;
  return d <= 4 && (l == 1 || l == d - 1);
}

std::vector<Plane> plane_grid(int l, int d, int resolution) {
  if (resolution < 1) throw InputError("plane_grid: resolution must be positive");
  if (d < 1 || l < 1 || l > d) throw InputError("plane_grid: need 1 <= l <= d");
  if (!plane_grid_supported(l, d)) {
    std::ostringstream os;
    os << "plane_grid: no grid for l = " << l << " in d = " << d
       << " (supported: d <= 3, or d = 4 with l in {1, 3})";
    throw UnsupportedError(os.str());
  }
  std::vector<Plane> out;
  if (l == d) {
    out.emplace_back(Matrix::Identity(d, d));
    return out;
  }
  const auto lines = projective_grid(d, resolution);
  out.reserve(lines.size());
  for (const Vector& v : lines) {
    Plane line(v);
    out.push_back(l == 1 ? line : orthogonal_complement(line));
  }
  return out;
}

double grid_mesh_constant(int d) { return (d - 1) * kPi / 2; }

}  // namespace wavecone
