#pragma once

// Wave cones of a constant-coefficient operator A of order k:
//
//   Lambda      = U_{xi != 0} ker A^k(xi)
//   Lambda^l    = { lambda : every l-plane pi contains xi != 0 with A^k(xi) lambda = 0 }
//   N^l         = U_{pi in Gr(l, d)} n_{xi in pi^perp} ker A^k(xi)
//
// with Lambda^1 = N^0 (the common kernel) c Lambda^l c Lambda^d = Lambda and
// N^l c Lambda^{l+1}. Quantifiers over spheres and Grassmannians are
// decided by branch and bound with certified lower bounds where possible and
// reported as inconclusive otherwise.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavecone/execution.hpp"
#include "wavecone/grassmannian.hpp"
#include "wavecone/operator.hpp"
#include "wavecone/search.hpp"

namespace wavecone {

struct ConeConfig {
  /// Zero threshold, relative to OperatorSpec::coefficient_scale().
  double tol_zero = 1e-8;
  /// Rank threshold, relative to the largest singular value in play.
  double tol_rank = 1e-10;
  /// Random planes tried on top of the deterministic grid.
  int plane_budget = 64;
  /// Candidate polars tried when looking for nontrivial cones.
  int lambda_budget = 48;
  /// Grassmannian grid resolution.
  int resolution = 16;
  std::uint64_t seed = 20240531;
  /// Cell budget of a single branch and bound run.
  long max_cells = 40000;
  int descent_iterations = 80;
  bool use_closed_form = true;
  /// Quasi-uniform sphere samples for the constant rank test.
  int rank_samples = 2000;
  Execution execution = Execution::parallel;
};

enum class Decision { member, non_member, inconclusive };
enum class Method { closed_form, exact_algebra, search };
enum class Triviality { confirmed_trivial, found_nontrivial, inconclusive };

const char* to_string(Decision d);
const char* to_string(Method m);
const char* to_string(Triviality t);

struct ConeVerdict {
  Decision decision = Decision::inconclusive;
  /// Witness direction xi (wave cone members, Lambda^1 non-members).
  std::optional<Vector> direction;
  /// Witness plane: an l-plane pi with elliptic restriction (Lambda^l
  /// non-members) or the l-plane pi of an N^l member.
  std::optional<Plane> plane;
  /// For N^l members: sigma = pi^perp, on which the symbol annihilates lambda.
  std::optional<Plane> normal_space;
  /// Smallest sphere-restricted norm |A^k(xi) lambda| supporting the decision
  /// (observed); for members found by search the largest such minimum.
  double margin = 0.0;
  /// Certified lower bound behind a non-member decision.
  double certified_bound = 0.0;
  Method method = Method::search;
  std::vector<std::string> notes;
};

struct RestrictedEllipticity {
  bool elliptic = false;
  /// Certified lower bound of |B(xi') lambda| on the unit sphere of the plane
  /// when elliptic; otherwise the smallest value found.
  double margin = 0.0;
  double min_value = 0.0;
  /// Minimizer, mapped back to R^d.
  Vector witness;
  SearchStatus status = SearchStatus::undecided;
};

struct TrivialityVerdict {
  Triviality status = Triviality::inconclusive;
  /// Nonzero element of the cone when found.
  std::optional<Vector> lambda;
  /// Membership evidence for lambda (found) or a non-member plane hint.
  std::optional<ConeVerdict> evidence;
  /// Certified uniform margin when confirmed by search; 0 otherwise.
  double margin = 0.0;
  Method method = Method::search;
  /// Set when the verdict follows from a neighbouring level by an inclusion.
  bool implied = false;
  std::string note;
};

struct DimensionBracket {
  int lower = 0;
  int upper = 0;
  bool exact = false;
};

struct LevelVerdict {
  int level = 0;
  TrivialityVerdict verdict;
};

struct DimensionProfile {
  DimensionBracket bracket;
  std::vector<LevelVerdict> levels;
};

enum class RankStatus { holds, fails, inconclusive };
const char* to_string(RankStatus s);

struct ConstantRankVerdict {
  RankStatus status = RankStatus::inconclusive;
  /// Always true for 'holds': the verdict rests on samples plus a search for
  /// rank drops, not on a proof.
  bool sampled = true;
  int samples = 0;
  int rank = 0;
  std::optional<Vector> witness_a, witness_b;
  int rank_a = 0, rank_b = 0;
  /// Certified lower bound on the smallest nonzero singular value over the
  /// sphere when the drop search certified it; 0 otherwise.
  double certified_bound = 0.0;
  /// Reference scale for rank decisions: largest singular value sampled.
  double sphere_scale = 0.0;
  std::string note;
};

/// Numerical rank: singular values above tol * reference, where reference
/// defaults to the largest singular value.
int numeric_rank(const Vector& singular_values, double tol, std::optional<double> reference = std::nullopt);

/// Orthonormal basis (columns) of ker A^k(xi).
Matrix kernel_at(const OperatorSpec& op, const Vector& xi, double tol = 1e-10,
                 std::optional<double> reference = std::nullopt);

/// Null space of a matrix at relative tolerance tol.
Matrix null_space(const Matrix& a, double tol = 1e-10);

/// Lambda^1 = n_alpha ker A_alpha over |alpha| = k, exact linear algebra.
Matrix common_kernel(const OperatorSpec& op, double tol = 1e-10);

bool is_cocanceling(const OperatorSpec& op, double tol = 1e-10);

/// Unit-normalizes lambda: deviations below 1e-6 are fixed with a warning,
/// larger ones are an input error.
Vector require_unit(const Vector& lambda, int m, std::vector<std::string>* warnings = nullptr);

/// max_alpha |A_alpha lambda| / coefficient_scale over |alpha| = k.
double annihilation_residual(const OperatorSpec& op, const Vector& lambda);

ConeVerdict wavecone_member(const OperatorSpec& op, const Vector& lambda, const ConeConfig& cfg = {});

RestrictedEllipticity restricted_elliptic(const OperatorSpec& op, const Vector& lambda, const Plane& plane,
                                          const ConeConfig& cfg = {});

ConeVerdict ell_wavecone_member(const OperatorSpec& op, const Vector& lambda, int l, const ConeConfig& cfg = {});

/// Largest coefficient of the restriction of A^k lambda to sigma, relative
/// to the coefficient scale of op.
double vanishing_residual(const OperatorSpec& op, const Vector& lambda, const Plane& sigma);

/// A^k(xi) lambda = 0 for all xi in sigma, decided on the exact restricted
/// coefficients with threshold 1e-10 (relative).
bool vanishes_on_subspace(const OperatorSpec& op, const Vector& lambda, const Plane& sigma, double tol = 1e-10);

ConeVerdict n_cone_member(const OperatorSpec& op, const Vector& lambda, int l, const ConeConfig& cfg = {});

/// n_{xi in pi^perp} ker A^k(xi): null space of the stacked coefficients of
/// the restriction to pi^perp. For l = d the whole of R^m.
Matrix admissible_polar_set(const OperatorSpec& op, const Plane& pi, double tol = 1e-10);

TrivialityVerdict lambda_ell_trivial(const OperatorSpec& op, int l, const ConeConfig& cfg = {});
TrivialityVerdict n_ell_trivial(const OperatorSpec& op, int l, const ConeConfig& cfg = {});

/// l_A = max{l : Lambda^l = {0}}, with l_A = 0 when Lambda^1 != {0}.
DimensionProfile compute_ell_A(const OperatorSpec& op, const ConeConfig& cfg = {});

/// l*_A = min{l : N^l != {0}}, with l*_A = d when every N^l is trivial.
DimensionProfile compute_ell_star(const OperatorSpec& op, const ConeConfig& cfg = {});

/// Both profiles computed together so that inclusions between the chains
/// (N^l c Lambda^{l+1}, N^0 = Lambda^1, N^{d-1} = Lambda^d) can be shared.
struct ConeProfile {
  DimensionProfile ell_A;
  DimensionProfile ell_star;
};
ConeProfile compute_cone_profile(const OperatorSpec& op, const ConeConfig& cfg = {});

ConstantRankVerdict constant_rank_check(const OperatorSpec& op, const ConeConfig& cfg = {});

/// Quasi-uniform points on S^{d-1}: Halton pairs mapped to Gaussians by
/// Box-Muller, then normalized.
std::vector<Vector> quasi_uniform_sphere(int d, int count);

}  // namespace wavecone
