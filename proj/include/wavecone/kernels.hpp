#pragma once

// Data-parallel sweeps used by cone-analysis. Each kernel has an OpenMP
// implementation and a serial reference; results are written by index, so
// both produce bit-identical output.

#include <vector>

#include "wavecone/cone.hpp"
#include "wavecone/execution.hpp"

namespace wavecone {

/// Cheap screen: for each plane, min over a fixed sample of its unit sphere of
/// |A^k(xi) lambda|. An upper estimate of the restricted minimum.
std::vector<double> screen_planes(const AppliedSymbol& symbol, const std::vector<Plane>& planes, int sample_resolution,
                                  Execution exec);

/// restricted_elliptic on every plane.
std::vector<RestrictedEllipticity> sweep_planes(const OperatorSpec& op, const Vector& lambda,
                                                const std::vector<Plane>& planes, const ConeConfig& cfg,
                                                Execution exec);

/// Singular values of A^k(xi) for each direction (descending, length
/// min(n, m)).
std::vector<Vector> symbol_singular_values(const PrincipalSymbol& symbol, const std::vector<Vector>& directions,
                                          Execution exec);

}  // namespace wavecone
