#pragma once

// Exact cone classifications for the named operators, read off from their
// kernels:
//   curl        ker A(xi) = { a (x) xi }
//   curlcurl    ker A(xi) = { a (.) xi }   (symmetrized tensor product)
//   div-matrix  ker A(xi) = { M : M xi = 0 }, so Lambda^l = {rank M < l},
//               N^l = {rank M <= l}
//   gradient, laplacian: elliptic, every cone is {0}.
// cubic3d and sextic3d have no closed form and always take the search path.

#include <optional>
#include <string>

#include "wavecone/cone.hpp"

namespace wavecone {

struct ClosedFormAnswer {
  Decision decision = Decision::inconclusive;
  /// Direction xi with A^k(xi) lambda = 0 (wave cone members).
  std::optional<Vector> direction;
  /// l-plane whose restriction is elliptic at lambda (Lambda^l non-members).
  std::optional<Plane> plane;
  /// sigma on which the symbol annihilates lambda (N^l members).
  std::optional<Plane> normal_space;
  std::string rule;
};

struct ClosedFormTriviality {
  Triviality status = Triviality::inconclusive;
  std::optional<Vector> lambda;
  std::string rule;
};

bool has_closed_form(const OperatorSpec& op);

/// l = d gives the wave cone itself.
std::optional<ClosedFormAnswer> closed_form_ell(const OperatorSpec& op, const Vector& lambda, int l, double tol_rank);
std::optional<ClosedFormAnswer> closed_form_n(const OperatorSpec& op, const Vector& lambda, int l, double tol_rank);

std::optional<ClosedFormTriviality> closed_form_lambda_trivial(const OperatorSpec& op, int l);
std::optional<ClosedFormTriviality> closed_form_n_trivial(const OperatorSpec& op, int l);

/// Coordinates of the symmetric matrix a (.) xi = (a xi^T + xi a^T) / 2 in the
/// curlcurl input layout.
Vector symmetric_product(const Vector& a, const Vector& xi);

}  // namespace wavecone
