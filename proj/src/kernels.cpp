#include "wavecone/kernels.hpp"

#include <limits>

namespace wavecone {

namespace {

std::vector<Vector> plane_samples(int l, int resolution) {
  if (l == 1) return {Vector::Constant(1, 1.0)};
  return projective_grid(l, resolution);
}

double screen_one(const AppliedSymbol& symbol, const Plane& plane, const std::vector<Vector>& samples) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& u : samples) best = std::min(best, symbol.norm(plane.basis() * u));
  return best;
}

}  // namespace

std::vector<double> screen_planes(const AppliedSymbol& symbol, const std::vector<Plane>& planes, int sample_resolution,
                                  Execution exec) {
  std::vector<double> out(planes.size());
  if (planes.empty()) return out;
  const auto samples = plane_samples(planes.front().dimension(), sample_resolution);
  const auto count = static_cast<long>(planes.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < count; ++i) out[i] = screen_one(symbol, planes[i], samples);
  } else {
    for (long i = 0; i < count; ++i) out[i] = screen_one(symbol, planes[i], samples);
  }
  return out;
}

std::vector<RestrictedEllipticity> sweep_planes(const OperatorSpec& op, const Vector& lambda,
                                                const std::vector<Plane>& planes, const ConeConfig& cfg,
                                                Execution exec) {
  std::vector<RestrictedEllipticity> out(planes.size());
  const auto count = static_cast<long>(planes.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) out[i] = restricted_elliptic(op, lambda, planes[i], cfg);
  } else {
    for (long i = 0; i < count; ++i) out[i] = restricted_elliptic(op, lambda, planes[i], cfg);
  }
  return out;
}

std::vector<Vector> symbol_singular_values(const PrincipalSymbol& symbol, const std::vector<Vector>& directions,
                                          Execution exec) {
  std::vector<Vector> out(directions.size());
  const auto count = static_cast<long>(directions.size());
  auto one = [&](long i) {
    const Matrix S = symbol(directions[i]);
    out[i] = Eigen::JacobiSVD<Matrix>(S).singularValues();
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) one(i);
  } else {
    for (long i = 0; i < count; ++i) one(i);
  }
  return out;
}

}  // namespace wavecone
