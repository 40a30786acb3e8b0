#pragma once

// Numerical search primitives: branch and bound over spheres and projective
// spaces with certified lower bounds, and Levenberg-Marquardt on products of
// spheres and Stiefel manifolds.

#include <functional>
#include <vector>

#include "wavecone/operator.hpp"

namespace wavecone {

/// sup |x^e - c^e| over all x with |x_i - c_i| <= r for every i.
double monomial_perturbation(const std::vector<int>& exponents, const Vector& c, double r);

/// Weighted polynomial family used to bound the variation of a symbol:
/// |P(x) - P(c)| <= sum_t weight_t * monomial_perturbation(e_t, c, r).
class VariationBound {
 public:
  VariationBound() = default;
  void add(std::vector<int> exponents, double weight);
  double operator()(const Vector& c, double r) const;
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<std::pair<std::vector<int>, double>> terms_;
};

/// Bound for xi -> A^k(xi) lambda (weights |A_alpha lambda|).
VariationBound applied_variation(const OperatorSpec& op, const Vector& lambda);
/// Bound for xi -> A^k(xi) in spectral norm (weights ||A_alpha||_2).
VariationBound symbol_variation(const OperatorSpec& op);

enum class SearchStatus { zero_found, certified_positive, undecided };

const char* to_string(SearchStatus s);

struct CellEstimate {
  double value = 0.0;  // objective at the cell center
  double lower = 0.0;  // certified lower bound over the cell
};

/// Evaluates a cell given its center on the sphere and a radius bounding
/// |x_i - center_i| for every point x of the cell.
using CellEvaluator = std::function<CellEstimate(const Vector& center, double radius)>;

struct SphereSearchOptions {
  double zero_threshold = 1e-8;
  /// The search certifies positivity once every open cell has a lower
  /// bound above this value.
  double positive_threshold = 1e-8;
  long max_cells = 20000;
  int initial_splits = 4;
  /// Search RP^{q-1} (objective even in x) instead of S^{q-1}.
  bool projective = true;
  /// Points tried before any subdivision, in order; the first one below the
  /// zero threshold wins.
  std::vector<Vector> probes;
  /// Optional local refinement of promising centers and its objective.
  std::function<Vector(const Vector&)> refine;
  std::function<double(const Vector&)> objective;
};

struct SphereSearchResult {
  SearchStatus status = SearchStatus::undecided;
  Vector best_point;
  double best_value = 0.0;
  /// Certified lower bound of the objective over the whole domain.
  double lower_bound = 0.0;
  long cells = 0;
};

/// Best-first branch and bound over hyperspherical angle boxes on S^{q-1}.
SphereSearchResult sphere_branch_and_bound(int q, const CellEvaluator& eval, const SphereSearchOptions& opts);

/// Convenience wrapper for |F(x)| with F polynomial: value from f, cell
/// bound from a variation estimate.
CellEvaluator lipschitz_cells(std::function<double(const Vector&)> f, VariationBound variation);

struct LMProblem {
  std::function<Vector(const Vector&)> residual;
  /// Optional analytic Jacobian; central differences otherwise.
  std::function<Matrix(const Vector&)> jacobian;
  /// Maps an updated parameter back onto the manifold.
  std::function<Vector(const Vector&)> retract;
};

struct LMResult {
  Vector x;
  double residual_norm = 0.0;
  int iterations = 0;
};

LMResult levenberg_marquardt(const LMProblem& problem, Vector x0, int max_iterations, double target = 0.0);

/// LM for min |F(x)| over the unit sphere.
LMResult sphere_descent(const std::function<Vector(const Vector&)>& f,
                        const std::function<Matrix(const Vector&)>& jacobian, Vector x0, int max_iterations,
                        double target = 0.0);

/// Column blocks of the given widths, each mapped to the nearest orthonormal
/// frame (QR with non-negative diagonal).
Vector retract_stiefel_blocks(const Vector& x, const std::vector<std::pair<int, int>>& shapes);

/// Direction with small rational coordinates near x: the largest entry is
/// scaled to 1 and the others rounded to fractions with denominator at most
/// max_denominator, then the vector is normalized.
Vector snap_direction(const Vector& x, int max_denominator = 12);

/// Directions with entries in {-1, 0, 1}, normalized, one per line, ordered
/// by the number of nonzero entries and then lexicographically.
std::vector<Vector> ternary_directions(int d, int max_support = 3);

/// Numerical Jacobian by central differences.
Matrix numeric_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-7);

}  // namespace wavecone
