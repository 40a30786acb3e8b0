#include <gtest/gtest.h>

#include "support.hpp"
#include "wavecone/closed_form.hpp"
#include "wavecone/cone.hpp"
#include "wavecone/report.hpp"

using namespace wavecone;
using namespace wavecone::testing;

namespace {

ConeConfig search_only() {
  ConeConfig cfg;
  cfg.use_closed_form = false;
  return cfg;
}

Vector unit(int m, int i) { return Vector::Unit(m, i); }

Vector rows_of(const Matrix& M) {
  Vector v(M.size());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) v(i * M.cols() + j) = M(i, j);
  }
  return v.normalized();
}

}  // namespace

TEST(LinearAlgebra, RankAndNullSpace) {
  Vector sv(3);
  sv << 2.0, 1e-3, 1e-12;
  EXPECT_EQ(numeric_rank(sv, 1e-10), 2);
  EXPECT_EQ(numeric_rank(sv, 1e-2), 1);
  Matrix a(2, 3);
  a << 1, 0, 0, 0, 1, 0;
  const Matrix k = null_space(a);
  ASSERT_EQ(k.cols(), 1);
  EXPECT_NEAR(std::abs(k(2, 0)), 1.0, 1e-14);
}

TEST(CommonKernel, PlantedKernelsRecovered) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const int r = t % 3;
    const OperatorSpec op = planted_kernel_operator(rng, 3, 4, 3, 2, r);
    EXPECT_EQ(common_kernel(op).cols(), r);
    EXPECT_EQ(is_cocanceling(op), r == 0);
  }
}

TEST(CommonKernel, BuiltinsAreCocanceling) {
  // The rows e_j^T of div share no common kernel.
  EXPECT_TRUE(is_cocanceling(builtin_operator("div-vector", {3, {}})));
  EXPECT_TRUE(is_cocanceling(builtin_operator("curl", {3, 1})));
  EXPECT_TRUE(is_cocanceling(builtin_operator("gradient", {2, {}})));
}

TEST(AdmissiblePolars, CoordinateHyperplane) {
  const Plane x1 = Plane::coordinate(3, {1, 2});  // {x_1 = 0}
  const Matrix curl = admissible_polar_set(builtin_operator("curl", {3, 1}), x1);
  ASSERT_EQ(curl.cols(), 1);
  EXPECT_NEAR(std::abs(curl(0, 0)), 1.0, 1e-12);

  const OperatorSpec div = builtin_operator("div-matrix", {3, 3});
  const Matrix adm = admissible_polar_set(div, x1);
  EXPECT_EQ(adm.cols(), 6);
  for (Eigen::Index j = 0; j < adm.cols(); ++j) {
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(adm(i * 3, j), 0.0, 1e-12);  // M e_1 = 0
  }
  EXPECT_EQ(admissible_polar_set(builtin_operator("laplacian", {3, {}}), x1).cols(), 0);
  EXPECT_EQ(admissible_polar_set(div, Plane::first_coordinates(3, 3)).cols(), 9);
}

TEST(WaveCone, SimpleMembers) {
  const OperatorSpec lap = builtin_operator("laplacian", {3, {}});
  const ConeVerdict v = wavecone_member(lap, unit(1, 0));
  EXPECT_EQ(v.decision, Decision::non_member);
  EXPECT_NEAR(v.margin, 1.0, 1e-9);

  const OperatorSpec cubic = builtin_operator("cubic3d");
  const ConeVerdict c = wavecone_member(cubic, unit(1, 0));
  EXPECT_EQ(c.decision, Decision::member);
  ASSERT_TRUE(c.direction);
  EXPECT_LT(std::abs(principal_symbol(cubic, c.direction->normalized()).matrix(0, 0)), 1e-10);
}

TEST(WaveCone, RequiresUnitLambda) {
  const OperatorSpec op = builtin_operator("curl", {3, 1});
  EXPECT_THROW(wavecone_member(op, Vector::Constant(3, 2.0)), InputError);
  EXPECT_THROW(wavecone_member(op, Vector::Ones(2).normalized()), InputError);
}

// Dual route: closed forms and search agree on the named operators.
TEST(ClosedForm, AgreesWithSearchOnDivMatrix) {
  const OperatorSpec op = builtin_operator("div-matrix", {2, 2});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 6; ++t) {
    Matrix M(2, 2);
    for (int i = 0; i < 4; ++i) M.data()[i] = g(rng);
    if (t % 2 == 0) M.col(1) = 0.7 * M.col(0);
    const Vector lambda = rows_of(M);
    for (int l = 1; l <= 2; ++l) {
      const ConeVerdict a = ell_wavecone_member(op, lambda, l);
      const ConeVerdict b = ell_wavecone_member(op, lambda, l, search_only());
      EXPECT_EQ(a.method, Method::closed_form);
      EXPECT_EQ(a.decision, b.decision) << "t=" << t << " l=" << l;
    }
  }
}

TEST(ClosedForm, AgreesWithSearchOnCurl) {
  const OperatorSpec op = builtin_operator("curl", {2, 1});
  std::mt19937_64 rng(6);
  for (int t = 0; t < 6; ++t) {
    const Vector lambda = random_unit(rng, 2);
    for (int l = 1; l <= 2; ++l) {
      const ConeVerdict a = ell_wavecone_member(op, lambda, l);
      const ConeVerdict b = ell_wavecone_member(op, lambda, l, search_only());
      EXPECT_EQ(a.decision, b.decision) << "l=" << l;
    }
  }
}

TEST(EllCone, NonMemberWitnessIsElliptic) {
  const OperatorSpec op = builtin_operator("cubic3d");
  const ConeVerdict v = ell_wavecone_member(op, unit(1, 0), 1);
  ASSERT_EQ(v.decision, Decision::non_member);
  ASSERT_TRUE(v.plane);
  const RestrictedEllipticity r = restricted_elliptic(op, unit(1, 0), *v.plane);
  EXPECT_TRUE(r.elliptic);
  EXPECT_GT(r.margin, 0.0);
  // Every 2-plane meets the cubic cone: Lambda^2 contains 1.
  EXPECT_EQ(ell_wavecone_member(op, unit(1, 0), 2).decision, Decision::member);
}

TEST(NCone, CubicWitnessLine) {
  const OperatorSpec op = builtin_operator("cubic3d");
  const ConeVerdict v = n_cone_member(op, unit(1, 0), 2);
  ASSERT_EQ(v.decision, Decision::member);
  ASSERT_TRUE(v.normal_space);
  ASSERT_EQ(v.normal_space->dimension(), 1);
  EXPECT_TRUE(vanishes_on_subspace(op, unit(1, 0), *v.normal_space));
  // The line is one of the real zeros of xi1^3 + xi2^3 + xi3^3 through a
  // coordinate pair, e.g. (1, -1, 0).
  const Vector xi = v.normal_space->basis().col(0);
  EXPECT_NEAR(xi.array().pow(3).sum(), 0.0, 1e-12);
  EXPECT_EQ(n_cone_member(op, unit(1, 0), 1).decision, Decision::non_member);
}

TEST(NCone, ZeroLevelEqualsCommonKernel) {
  const OperatorSpec op = builtin_operator("curl", {3, 1});
  EXPECT_EQ(n_cone_member(op, unit(3, 0), 0).decision, Decision::non_member);
}

TEST(Profiles, EllipticOperators) {
  for (const auto& [name, params] : {std::pair<const char*, BuiltinParams>{"laplacian", {3, {}}},
                                     std::pair<const char*, BuiltinParams>{"gradient", {2, {}}}}) {
    const OperatorSpec op = builtin_operator(name, params);
    const ConeProfile p = compute_cone_profile(op);
    EXPECT_TRUE(p.ell_A.bracket.exact);
    EXPECT_EQ(p.ell_A.bracket.lower, op.d()) << name;
    EXPECT_EQ(p.ell_star.bracket.lower, op.d()) << name;
  }
}

TEST(Profiles, DivMatrixSearchPath) {
  const OperatorSpec op = builtin_operator("div-matrix", {2, 2});
  const ConeProfile p = compute_cone_profile(op, search_only());
  EXPECT_TRUE(p.ell_A.bracket.exact);
  EXPECT_EQ(p.ell_A.bracket.lower, 1);
  EXPECT_EQ(p.ell_star.bracket.lower, 1);
}

TEST(Profiles, EllAAtMostEllStarOnRandomOperators) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 6; ++t) {
    const OperatorSpec op = random_operator(rng, 2, 2, 1, 1 + t % 2, 0.8, true);
    const ConeProfile p = compute_cone_profile(op);
    EXPECT_LE(p.ell_A.bracket.lower, p.ell_star.bracket.upper);
    if (p.ell_A.bracket.exact && p.ell_star.bracket.exact) EXPECT_LE(p.ell_A.bracket.lower, p.ell_star.bracket.lower);
  }
}

TEST(ConstantRank, Examples) {
  EXPECT_EQ(constant_rank_check(builtin_operator("curl", {3, 1})).status, RankStatus::holds);
  const ConstantRankVerdict cubic = constant_rank_check(builtin_operator("cubic3d"));
  EXPECT_EQ(cubic.status, RankStatus::fails);
  ASSERT_TRUE(cubic.witness_a && cubic.witness_b);
  EXPECT_NE(cubic.rank_a, cubic.rank_b);
  // Symbol of rank one with a second column that vanishes on a variety.
  OperatorSpec::TermMap terms;
  Matrix A(2, 2);
  A << 1, 0, 0, 0;
  Matrix B(2, 2);
  B << 0, 0, 0, 1;
  terms.emplace(MultiIndex({1, 0}), A);
  terms.emplace(MultiIndex({0, 1}), B);
  EXPECT_EQ(constant_rank_check(OperatorSpec(2, 2, 2, 1, terms)).status, RankStatus::fails);
}

TEST(Sphere, QuasiUniformPoints) {
  const auto pts = quasi_uniform_sphere(3, 500);
  ASSERT_EQ(pts.size(), 500u);
  Vector mean = Vector::Zero(3);
  for (const Vector& p : pts) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    mean += p;
  }
  EXPECT_LT((mean / 500).norm(), 0.05);
}

// The brute-force grid sweep brackets the search verdicts: a certified
// elliptic plane has a positive grid value and a member has every grid plane
// close to zero when a grid plane meets the kernel.
TEST(GridOracle, ConsistentWithSearch) {
  const OperatorSpec op = builtin_operator("cubic3d");
  const ReportJson r1 = grid_oracle(op, unit(1, 0), 1, 16);
  EXPECT_GT(r1["max_plane_min"].get<double>(), 0.1);
  const ReportJson r2 = grid_oracle(op, unit(1, 0), 3, 16);
  EXPECT_LT(r2["wave_min"].get<double>(), 1e-10);
  EXPECT_THROW(grid_oracle(builtin_operator("laplacian", {4, {}}), unit(1, 0), 1, 8), UnsupportedError);
}

TEST(Determinism, SameSeedSameVerdicts) {
  std::mt19937_64 rng(12);
  const OperatorSpec op = random_operator(rng, 3, 2, 1, 2, 0.8, true);
  const Vector lambda = random_unit(rng, 2);
  for (int l = 1; l <= 3; ++l) {
    const ConeVerdict a = ell_wavecone_member(op, lambda, l);
    const ConeVerdict b = ell_wavecone_member(op, lambda, l);
    EXPECT_EQ(a.decision, b.decision);
    EXPECT_EQ(a.margin, b.margin);
  }
}
