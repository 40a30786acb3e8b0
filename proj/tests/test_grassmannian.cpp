#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "wavecone/grassmannian.hpp"

using namespace wavecone;
using namespace wavecone::testing;

TEST(Plane, OrthonormalAfterConstruction) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Plane p = uniform_plane(1 + t % 3, 4, rng);
    const Matrix g = p.basis().transpose() * p.basis();
    EXPECT_LT((g - Matrix::Identity(g.rows(), g.cols())).norm(), 1e-13);
  }
}

TEST(Plane, RejectsNonOrthonormalBasis) {
  Matrix b(3, 2);
  b << 1, 1, 0, 1, 0, 0;
  EXPECT_THROW(Plane{b}, InputError);
  EXPECT_NO_THROW(Plane::span_of(b));
}

TEST(Plane, ComplementAndProjector) {
  std::mt19937_64 rng(2);
  const Plane p = uniform_plane(2, 5, rng);
  const Plane q = orthogonal_complement(p);
  EXPECT_EQ(q.dimension(), 3);
  EXPECT_LT((projector(p) + projector(q) - Matrix::Identity(5, 5)).norm(), 1e-12);
  EXPECT_TRUE(orthogonal_complement(Plane::first_coordinates(3, 3)).is_zero());
}

TEST(Plane, PrincipalAngles) {
  Matrix a(3, 1), b(3, 1);
  a << 1, 0, 0;
  b << 1, 1, 0;
  const auto angles = principal_angles(Plane::span_of(a), Plane::span_of(b));
  ASSERT_EQ(angles.size(), 1u);
  EXPECT_NEAR(angles[0], std::numbers::pi / 4, 1e-12);
  EXPECT_NEAR(principal_angle_distance(Plane::coordinate(3, {0, 1}), Plane::coordinate(3, {1, 0})), 0.0, 1e-7);
}

// The invariant measure has E[P] = (l / d) I.
TEST(Sampling, UniformPlaneMeanProjector) {
  std::mt19937_64 rng(3);
  const int l = 2, d = 4, n = 20000;
  Matrix mean = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) mean += projector(uniform_plane(l, d, rng));
  mean /= n;
  EXPECT_LT((mean - Matrix::Identity(d, d) * (double(l) / d)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Sampling, SameSeedSamePlanes) {
  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(uniform_plane(2, 3, a).basis(), uniform_plane(2, 3, b).basis());
}

TEST(Grid, ContainsCoordinatePlanesAndCovers) {
  std::mt19937_64 rng(4);
  for (auto [l, d] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
    const int res = 12;
    const auto grid = plane_grid(l, d, res);
    ASSERT_FALSE(grid.empty());
    double first = 1.0;
    for (const Plane& p : grid) first = std::min(first, principal_angle_distance(p, Plane::first_coordinates(d, l)));
    EXPECT_LT(first, 1e-9);
    // Mesh bound on random planes.
    for (int t = 0; t < 50; ++t) {
      const Plane q = uniform_plane(l, d, rng);
      double best = 10.0;
      for (const Plane& p : grid) best = std::min(best, principal_angle_distance(p, q));
      EXPECT_LE(best, grid_mesh_constant(d) / res);
    }
  }
  EXPECT_THROW(plane_grid(2, 5, 8), UnsupportedError);
}

TEST(Grid, SphereAndProjectiveGrids) {
  for (const Vector& v : sphere_grid(3, 8)) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  const auto pg = projective_grid(3, 8);
  for (int axis = 0; axis < 3; ++axis) {
    bool found = false;
    for (const Vector& v : pg) found = found || std::abs(std::abs(v(axis)) - 1.0) < 1e-12;
    EXPECT_TRUE(found);
  }
}
