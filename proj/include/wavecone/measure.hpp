#pragma once

// Discretized vector measures on the unit torus T^d = [0, 1)^d.
//
// Grid measures store a density per cell of the periodic N^d lattice; cell
// c with multi-index (i_1, ..., i_d) sits at the point i / N and carries the
// mass value(c) / N^d. Cells are numbered row-major (last axis fastest) with
// the m channels innermost, the layout FFTW expects.
//
// Hausdorff measure follows the normalization H^l(B^l_1) = 2^l, i.e. on an
// l-plane H^l = (2^l / omega_l) L^l. Densities |mu|(B_r) / (2r)^l of
// H^l on a plane are then exactly 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavecone/execution.hpp"
#include "wavecone/grassmannian.hpp"
#include "wavecone/operator.hpp"

namespace wavecone {

enum class MeasureKind { grid, atomic };

struct Atom {
  Vector position;
  Vector weight;
};

class DiscreteMeasure {
 public:
  /// values: N^d * m densities.
  static DiscreteMeasure grid(int d, int m, int N, std::vector<double> values);
  /// spacing: extent of the region each atom stands for (0 for true point
  /// masses); window sums ramp weights over one spacing.
  static DiscreteMeasure atomic(int d, int m, std::vector<Atom> atoms, double spacing = 0.0);

  MeasureKind kind() const { return kind_; }
  int d() const { return d_; }
  int m() const { return m_; }
  int N() const { return N_; }
  long cells() const { return cells_; }
  double cell_volume() const;
  double spacing() const { return spacing_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Density vector of a grid cell.
  Vector value(long cell) const;
  /// Point i / N of a grid cell.
  Vector cell_point(long cell) const;
  /// Unit polar of a grid cell; zero where the density vanishes.
  Vector polar(long cell) const;

  double total_variation() const;

 private:
  DiscreteMeasure() = default;
  MeasureKind kind_ = MeasureKind::atomic;
  int d_ = 0, m_ = 0, N_ = 0;
  long cells_ = 0;
  double spacing_ = 0.0;
  std::vector<double> values_;
  std::vector<Atom> atoms_;
};

/// 2^l / omega_l: the factor between H^l (normalized by H^l(B^l_1) = 2^l)
/// and Lebesgue measure on an l-plane.
double hausdorff_scale(int l);

/// Integer tangent vectors of the form e_a or e_a +- e_b spanning the plane.
/// Planes spanned by such vectors close up on the torus and their lattice
/// discretization has Fourier support inside the plane's annihilator.
/// Irrational planes are an input error; rational planes needing other
/// tangents are unsupported.
Eigen::MatrixXi lattice_tangents(const Plane& plane);

/// lambda * H^l restricted to the plane through the origin, on an N^d grid.
/// Total variation equals |lambda| * H^l(plane on the torus) exactly.
DiscreteMeasure model_rectifiable_measure(const Vector& lambda, const Plane& plane, int N);

enum class DerivativeSymbol {
  /// Centered differences scaled by N: xi_j -> N sin(2 pi xi_j / N).
  centered,
  /// Exact derivatives on trigonometric polynomials: xi_j -> 2 pi xi_j with
  /// xi_j in (-N/2, N/2); Nyquist frequencies are skipped.
  spectral,
};

const char* to_string(DerivativeSymbol s);

struct FourierResidual {
  /// max and mean over nonzero frequencies of
  /// |A^k(w) mu_hat(xi)| / (|w|^k max_xi' |mu_hat(xi')|), w the symbol of xi.
  double max_residual = 0.0;
  double mean_residual = 0.0;
  long frequencies = 0;
  std::vector<int> worst_frequency;
  double tol = 0.0;
  bool pass = false;
  DerivativeSymbol symbol = DerivativeSymbol::centered;
};

FourierResidual verify_afree_fft(const OperatorSpec& op, const DiscreteMeasure& mu, double tol = 1e-9,
                                 DerivativeSymbol symbol = DerivativeSymbol::centered,
                                 Execution exec = Execution::parallel);

/// Indicator shapes on the torus for BV jump measures.
struct BvShape {
  enum class Kind { slab, box, polygon };
  Kind kind = Kind::slab;
  int d = 0;
  /// slab: lo <= x_axis < hi.
  int axis = 0;
  double lo = 0.0, hi = 0.0;
  /// box: box_lo <= x < box_hi componentwise.
  Vector box_lo, box_hi;
  /// polygon (d = 2): vertices in order.
  std::vector<Vector> vertices;

  static BvShape slab(int d, int axis, double lo, double hi);
  static BvShape box(Vector lo, Vector hi);
  static BvShape polygon(std::vector<Vector> vertices);
};

/// D(a * indicator) by centered differences scaled by N: a matrix-valued
/// measure in R^{p x d} (p = a.size()), flattened row-major, concentrated
/// on the faces with polar a (x) nu.
DiscreteMeasure bv_jump_example(const BvShape& shape, int N, const Vector& a);

/// (2r)^{-l} (T^{x0,r})_# mu restricted to the closed unit window, as atoms at
/// (x - x0) / r (nearest periodic image).
DiscreteMeasure blowup(const DiscreteMeasure& mu, const Vector& x0, double r, int l);

/// |mu|(B_radius(center)) with weights ramping from 1 to 0 across one
/// spacing around the sphere, so lattice cells on the boundary count half.
double window_mass(const DiscreteMeasure& mu, const Vector& center, double radius);

struct DensityEstimate {
  /// max over usable radii of |mu|(B_r(x0)) / (2r)^l
  double value = 0.0;
  std::vector<double> radii;
  std::vector<double> ratios;
  /// Smallest radius that was used.
  double finest_radius = 0.0;
  std::vector<std::string> warnings;
};

/// Radii below four grid cells are dropped with a warning.
DensityEstimate upper_density(const DiscreteMeasure& mu, const Vector& x0, int l,
                              const std::vector<double>& radii = {0.25, 0.125, 0.0625});

/// Distance between a blown-up measure and its expected limit
/// theta * lambda * 2^-l H^l on the plane (unit-window mass theta), both
/// restricted to the unit window: sum over coarse bins (width 1/2 in plane
/// coordinates) of the mass difference, plus all mass off the plane, divided
/// by theta.
double blowup_window_distance(const DiscreteMeasure& blown, const Vector& lambda_unit, const Plane& plane,
                              double theta);

/// Finite union of l-simplices in R^d (vertices as columns of d x (l+1)
/// matrices).
struct PolyhedralSet {
  int d = 0;
  int l = 0;
  std::vector<Matrix> simplices;

  /// Checks shapes and non-degeneracy.
  void validate() const;
  /// H^l(E), multiplicities counted.
  double hausdorff_measure() const;
};

/// Lebesgue l-volume of a simplex.
double simplex_volume(const Matrix& vertices);
/// Lebesgue l-volume of its orthogonal projection onto a plane.
double projected_volume(const Matrix& vertices, const Plane& plane);

struct IntegralGeometricEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  long samples = 0;
  /// H^l(E), the per-sample upper bound.
  double hausdorff = 0.0;
  double max_sample = 0.0;
  bool per_sample_bound = true;
};

/// Monte Carlo over planes drawn from the invariant measure: each sample is
/// sum_S H^l(p_pi S). Samples are drawn in fixed blocks of 1024, block b from
/// its own stream seeded by (seed, b), and summed in block order.
IntegralGeometricEstimate integral_geometric_measure(const PolyhedralSet& set, int l, long samples,
                                                     std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace wavecone
