#pragma once

// Linear subspaces of R^d and the Grassmannian Gr(l, d): uniform sampling,
// deterministic grids, projections and complements.

#include <random>
#include <vector>

#include "wavecone/operator.hpp"

namespace wavecone {

/// Thin QR factor of a full-column-rank matrix with the sign convention
/// diag(R) >= 0, which makes the factor unique.
Matrix qr_orthonormalize(const Matrix& a);

/// Orthonormal basis of an l-dimensional subspace of R^d.
class Plane {
 public:
  /// basis must have orthonormal columns up to 1e-10; it is re-orthonormalized
  /// so that the stored deviation is at rounding level.
  explicit Plane(const Matrix& basis);

  /// The zero-dimensional subspace of R^d. Only produced as the orthogonal
  /// complement of the full space.
  static Plane zero(int d);
  /// Orthonormal basis of the column span of arbitrary vectors; the vectors
  /// must be linearly independent.
  static Plane span_of(const Matrix& vectors);
  static Plane coordinate(int d, const std::vector<int>& axes);
  /// span{e_1, ..., e_l}
  static Plane first_coordinates(int d, int l);

  int ambient() const { return static_cast<int>(basis_.rows()); }
  int dimension() const { return static_cast<int>(basis_.cols()); }
  bool is_zero() const { return basis_.cols() == 0; }
  const Matrix& basis() const { return basis_; }

 private:
  struct Unchecked {};
  Plane(Matrix basis, Unchecked) : basis_(std::move(basis)) {}
  Matrix basis_;
};

/// basis * basis^T
Matrix projector(const Plane& plane);

/// Complement of dimension d - l. The complement of R^d is Plane::zero(d),
/// the complement of Plane::zero(d) is R^d.
Plane orthogonal_complement(const Plane& plane);

/// Principal angles in increasing order.
std::vector<double> principal_angles(const Plane& a, const Plane& b);

/// Geodesic distance sqrt(sum theta_i^2) over the principal angles. Planes
/// must have equal dimension.
double principal_angle_distance(const Plane& a, const Plane& b);

/// Draw from the O(d)-invariant probability on Gr(l, d): QR of a d x l
/// matrix of independent standard Gaussians.
Plane uniform_plane(int l, int d, std::mt19937_64& rng);

/// Unit vector drawn uniformly from S^{d-1}.
Vector uniform_direction(int d, std::mt19937_64& rng);

/// Grid of unit vectors covering S^{d-1} with spacing about pi / resolution.
std::vector<Vector> sphere_grid(int d, int resolution);

/// Grid of unit vectors, one per line through the origin, covering RP^{d-1}
/// with spacing about pi / resolution. Contains every coordinate axis.
std::vector<Vector> projective_grid(int d, int resolution);

/// Deterministic grid on Gr(l, d). Supported: l = d (one plane), d <= 4 with
/// l in {1, d - 1}, and every l when d <= 3; anything else throws
/// UnsupportedError. Every uniform plane lies within principal-angle
/// distance grid_mesh_constant(d) / resolution of some grid element, and the
/// coordinate planes span{e_1..e_l} are members.
std::vector<Plane> plane_grid(int l, int d, int resolution);

bool plane_grid_supported(int l, int d);

/// c in the mesh bound c / resolution: (d - 1) * pi / 2.
double grid_mesh_constant(int d);

}  // namespace wavecone
