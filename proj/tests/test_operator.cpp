#include <gtest/gtest.h>

#include "support.hpp"
#include "wavecone/grassmannian.hpp"
#include "wavecone/operator.hpp"

using namespace wavecone;
using namespace wavecone::testing;

TEST(MultiIndex, OrderAndMonomial) {
  const MultiIndex a({2, 0, 1});
  EXPECT_EQ(a.order(), 3);
  Vector xi(3);
  xi << 2.0, 5.0, -1.0;
  EXPECT_DOUBLE_EQ(a.monomial(xi), -4.0);
  EXPECT_DOUBLE_EQ(MultiIndex::zero(3).monomial(Vector::Zero(3)), 1.0);
  EXPECT_EQ(MultiIndex::unit(3, 1, 2) + MultiIndex::unit(3, 0), MultiIndex({1, 2, 0}));
}

TEST(MultiIndex, RejectsNegativeEntries) { EXPECT_THROW(MultiIndex({1, -1}), InputError); }

TEST(Builtins, Shapes) {
  struct Case {
    const char* name;
    BuiltinParams params;
    int d, m, n, k;
  };
  for (const Case& c : {Case{"curl", {3, 1}, 3, 3, 3, 1}, Case{"curl", {2, 2}, 2, 4, 2, 1},
                        Case{"curlcurl", {3, 3}, 3, 6, 6, 2}, Case{"div-matrix", {3, 3}, 3, 9, 3, 1},
                        Case{"gradient", {3, {}}, 3, 1, 3, 1}, Case{"laplacian", {2, {}}, 2, 1, 1, 2},
                        Case{"cubic3d", {}, 3, 1, 1, 3}, Case{"sextic3d", {}, 3, 2, 1, 6}}) {
    const OperatorSpec op = builtin_operator(c.name, c.params);
    EXPECT_EQ(op.d(), c.d) << c.name;
    EXPECT_EQ(op.m(), c.m) << c.name;
    EXPECT_EQ(op.n(), c.n) << c.name;
    EXPECT_EQ(op.k(), c.k) << c.name;
    EXPECT_TRUE(op.homogeneous()) << c.name;
    ASSERT_TRUE(op.builtin().has_value());
  }
}

TEST(Builtins, InvalidParameters) {
  EXPECT_THROW(builtin_operator("nope"), InputError);
  EXPECT_THROW(builtin_operator("curlcurl", {3, 2}), InputError);
  EXPECT_THROW(builtin_operator("curl", {3, 0}), InputError);
  EXPECT_THROW(builtin_operator("cubic3d", {4, {}}), InputError);
}

TEST(Symbol, CurlAnnihilatesGradients) {
  const OperatorSpec op = builtin_operator("curl", {3, 2});
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vector xi = random_unit(rng, 3), a = random_unit(rng, 2);
    Vector lambda(6);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 3; ++j) lambda(i * 3 + j) = a(i) * xi(j);
    }
    EXPECT_LT((principal_symbol(op, xi).matrix * lambda).norm(), 1e-14);
  }
}

TEST(Symbol, CubicValues) {
  const OperatorSpec op = builtin_operator("cubic3d");
  Vector xi(3);
  xi << 1.0, -1.0, 0.0;
  EXPECT_NEAR(principal_symbol(op, xi).matrix(0, 0), 0.0, 1e-15);
  xi << 1.0, 2.0, 3.0;
  EXPECT_DOUBLE_EQ(principal_symbol(op, xi).matrix(0, 0), 36.0);
}

TEST(Symbol, FullSymbolIncludesLowerOrder) {
  OperatorSpec::TermMap terms;
  terms.emplace(MultiIndex({2, 0}), Matrix::Identity(1, 1));
  terms.emplace(MultiIndex({0, 0}), Matrix::Constant(1, 1, 3.0));
  const OperatorSpec op(2, 1, 1, 2, std::move(terms));
  EXPECT_FALSE(op.homogeneous());
  Vector xi(2);
  xi << 2.0, 1.0;
  EXPECT_DOUBLE_EQ(principal_symbol(op, xi).matrix(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(full_symbol(op, xi).matrix(0, 0), 7.0);
  EXPECT_TRUE(op.principal_part().homogeneous());
}

TEST(Symbol, MissingTopOrderIsAnError) {
  OperatorSpec::TermMap terms;
  terms.emplace(MultiIndex({1, 0}), Matrix::Identity(1, 1));
  EXPECT_THROW(OperatorSpec(2, 1, 1, 2, std::move(terms)), InputError);
}

// Property: restriction to a plane commutes with evaluation.
TEST(Restriction, MatchesSymbolOnPlane) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const int d = 2 + t % 3, k = 1 + t % 3;
    const OperatorSpec op = random_operator(rng, d, 2, 2, k, 0.7);
    const Plane pi = uniform_plane(1 + t % (d - 1), d, rng);
    const OperatorSpec r = restrict_to_plane(op, pi);
    ASSERT_EQ(r.d(), pi.dimension());
    for (int s = 0; s < 5; ++s) {
      const Vector u = random_unit(rng, pi.dimension());
      const Matrix lhs = principal_symbol(r, u).matrix;
      const Matrix rhs = principal_symbol(op, pi.basis() * u).matrix;
      EXPECT_LT((lhs - rhs).norm(), 1e-12 * (1.0 + rhs.norm()));
    }
  }
}

TEST(Restriction, AppliedSymbolAgreesWithMatrix) {
  std::mt19937_64 rng(3);
  const OperatorSpec op = random_operator(rng, 3, 3, 2, 3);
  const Vector lambda = random_unit(rng, 3);
  const AppliedSymbol applied(op, lambda);
  const PrincipalSymbol sym(op);
  for (int s = 0; s < 10; ++s) {
    const Vector xi = random_unit(rng, 3);
    EXPECT_LT((applied.value(xi) - sym(xi) * lambda).norm(), 1e-12);
    // Jacobian against central differences.
    const Matrix J = applied.jacobian(xi);
    for (int j = 0; j < 3; ++j) {
      const Vector e = Vector::Unit(3, j) * 1e-6;
      const Vector fd = (applied.value(xi + e) - applied.value(xi - e)) / 2e-6;
      EXPECT_LT((J.col(j) - fd).norm(), 1e-6);
    }
  }
}

TEST(Operator, SumAndScales) {
  const OperatorSpec a = builtin_operator("laplacian", {2, {}});
  const OperatorSpec s = a + a;
  EXPECT_FALSE(s.builtin().has_value());
  EXPECT_DOUBLE_EQ(s.coefficient_scale(), 2.0 * a.coefficient_scale());
  EXPECT_GE(a.symbol_bound(), 1.0);
}
