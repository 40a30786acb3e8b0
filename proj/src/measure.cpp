#include "wavecone/measure.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>

namespace wavecone {

namespace {

constexpr double kPi = 3.14159265358979323846;

long ipow(long base, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

long wrap(long i, long N) {
  const long r = i % N;
  return r < 0 ? r + N : r;
}

std::vector<long> unflatten(long cell, int d, int N) {
  std::vector<long> idx(d);
  for (int k = d - 1; k >= 0; --k) {
    idx[k] = cell % N;
    cell /= N;
  }
  return idx;
}

long flatten(const std::vector<long>& idx, int N) {
  long c = 0;
  for (long i : idx) c = c * N + wrap(i, N);
  return c;
}

// Representative of a frequency index in (-N/2, N/2].
long centered_rep(long j, int N) { return j > N / 2 ? j - N : j; }

double ramp(double radius, double dist, double spacing) {
  if (spacing <= 0.0) return dist < radius ? 1.0 : 0.0;
  return std::clamp((radius - dist) / spacing + 0.5, 0.0, 1.0);
}

// Small-denominator rational approximation by continued fractions.
bool near_rational(double x, int max_den, double tol) {
  double a = x;
  long h0 = 1, h1 = 0, k0 = 0, k1 = 1;
  for (int it = 0; it < 40; ++it) {
    const double fl = std::floor(a);
    const long h = static_cast<long>(fl) * h0 + h1;
    const long k = static_cast<long>(fl) * k0 + k1;
    if (k > max_den) return false;
    if (std::abs(x - static_cast<double>(h) / k) < tol) return true;
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    const double frac = a - fl;
    if (frac < 1e-15) return false;
    a = 1.0 / frac;
  }
  return false;
}

// Plane spanned by integer vectors: reduced row echelon form of basis^T has
// rational entries.
bool plane_is_rational(const Plane& plane) {
  Matrix r = plane.basis().transpose();
  const Eigen::Index rows = r.rows(), cols = r.cols();
  Eigen::Index lead = 0;
  for (Eigen::Index i = 0; i < rows && lead < cols; ++i, ++lead) {
    Eigen::Index piv = i;
    for (;;) {
      r.col(lead).segment(i, rows - i).cwiseAbs().maxCoeff(&piv);
      piv += i;
      if (std::abs(r(piv, lead)) > 1e-9) break;
      if (++lead == cols) return true;
    }
    r.row(i).swap(r.row(piv));
    r.row(i) /= r(i, lead);
    for (Eigen::Index j = 0; j < rows; ++j) {
      if (j != i) r.row(j) -= r(j, lead) * r.row(i);
    }
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!near_rational(r(i, j), 64, 1e-9)) return false;
    }
  }
  return true;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::grid(int d, int m, int N, std::vector<double> values) {
  if (d < 1 || d > 6) throw InputError("grid measure: d must lie in [1, 6]");
  if (m < 1) throw InputError("grid measure: m must be positive");
  if (N < 2) throw InputError("grid measure: N must be at least 2");
  const long cells = ipow(N, d);
  if (static_cast<long>(values.size()) != cells * m) {
    throw InputError("grid measure: expected " + std::to_string(cells * m) + " values, got " +
                     std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("grid measure: non-finite value");
  }
  DiscreteMeasure mu;
  mu.kind_ = MeasureKind::grid;
  mu.d_ = d;
  mu.m_ = m;
  mu.N_ = N;
  mu.cells_ = cells;
  mu.spacing_ = 1.0 / N;
  mu.values_ = std::move(values);
  return mu;
}

DiscreteMeasure DiscreteMeasure::atomic(int d, int m, std::vector<Atom> atoms, double spacing) {
  if (d < 1 || m < 1) throw InputError("atomic measure: d and m must be positive");
  if (!(spacing >= 0.0) || !std::isfinite(spacing)) throw InputError("atomic measure: invalid spacing");
  for (const Atom& a : atoms) {
    if (a.position.size() != d || a.weight.size() != m) throw InputError("atomic measure: atom shape mismatch");
    if (!a.position.allFinite() || !a.weight.allFinite()) throw InputError("atomic measure: non-finite atom");
  }
  DiscreteMeasure mu;
  mu.kind_ = MeasureKind::atomic;
  mu.d_ = d;
  mu.m_ = m;
  mu.spacing_ = spacing;
  mu.atoms_ = std::move(atoms);
  return mu;
}

double DiscreteMeasure::cell_volume() const { return kind_ == MeasureKind::grid ? 1.0 / cells_ : 0.0; }

Vector DiscreteMeasure::value(long cell) const {
  return Eigen::Map<const Vector>(values_.data() + cell * m_, m_);
}

Vector DiscreteMeasure::cell_point(long cell) const {
  const auto idx = unflatten(cell, d_, N_);
  Vector x(d_);
  for (int k = 0; k < d_; ++k) x(k) = static_cast<double>(idx[k]) / N_;
  return x;
}

Vector DiscreteMeasure::polar(long cell) const {
  const Vector v = value(cell);
  const double n = v.norm();
  return n > 0.0 ? Vector(v / n) : Vector(Vector::Zero(m_));
}

double DiscreteMeasure::total_variation() const {
  double tv = 0.0;
  if (kind_ == MeasureKind::grid) {
    for (long c = 0; c < cells_; ++c) tv += value(c).norm();
    return tv * cell_volume();
  }
  for (const Atom& a : atoms_) tv += a.weight.norm();
  return tv;
}

double hausdorff_scale(int l) {
  if (l < 0) throw InputError("hausdorff_scale: negative dimension");
  const double omega = std::pow(kPi, 0.5 * l) / std::tgamma(0.5 * l + 1.0);
  return std::pow(2.0, l) / omega;
}

Eigen::MatrixXi lattice_tangents(const Plane& plane) {
  const int d = plane.ambient();
  const int l = plane.dimension();
  const Matrix P = projector(plane);
  std::vector<Eigen::VectorXi> candidates;
  for (int a = 0; a < d; ++a) candidates.push_back(Eigen::VectorXi::Unit(d, a));
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      for (int s : {1, -1}) {
        Eigen::VectorXi v = Eigen::VectorXi::Zero(d);
        v(a) = 1;
        v(b) = s;
        candidates.push_back(v);
      }
    }
  }
  Eigen::MatrixXi chosen(d, 0);
  Matrix chosen_real(d, 0);
  for (const auto& v : candidates) {
    if (chosen.cols() == l) break;
    const Vector vr = v.cast<double>();
    if ((vr - P * vr).norm() > 1e-9 * vr.norm()) continue;
    Matrix trial(d, chosen_real.cols() + 1);
    trial << chosen_real, vr;
    Eigen::JacobiSVD<Matrix> svd(trial);
    if (svd.singularValues().minCoeff() < 1e-6) continue;
    chosen_real = trial;
    chosen.conservativeResize(d, chosen.cols() + 1);
    chosen.col(chosen.cols() - 1) = v;
  }
  if (chosen.cols() == l) return chosen;
  if (!plane_is_rational(plane)) {
    throw InputError("plane does not close up on the torus (irrational orientation)");
  }
  throw UnsupportedError("rational plane needs tangents other than e_a and e_a +- e_b");
}

DiscreteMeasure model_rectifiable_measure(const Vector& lambda, const Plane& plane, int N) {
  const int d = plane.ambient();
  const int l = plane.dimension();
  const int m = static_cast<int>(lambda.size());
  if (m < 1 || !lambda.allFinite() || lambda.norm() == 0.0) throw InputError("model measure: lambda must be nonzero");
  if (N < 2) throw InputError("model measure: N must be at least 2");
  if (l == 0) throw InputError("model measure: plane must have positive dimension");
  const Eigen::MatrixXi V = lattice_tangents(plane);
  const long cells = ipow(N, d);
  std::vector<char> hit(cells, 0);
  long support = 0;
  std::vector<long> t(l, 0);
  for (long step = 0; step < ipow(N, l); ++step) {
    std::vector<long> idx(d, 0);
    for (int j = 0; j < l; ++j) {
      for (int a = 0; a < d; ++a) idx[a] += t[j] * V(a, j);
    }
    const long c = flatten(idx, N);
    if (!hit[c]) {
      hit[c] = 1;
      ++support;
    }
    for (int j = l - 1; j >= 0; --j) {
      if (++t[j] < N) break;
      t[j] = 0;
    }
  }
  const Matrix Vr = V.cast<double>();
  const double mass = hausdorff_scale(l) * std::sqrt((Vr.transpose() * Vr).determinant()) *
                      static_cast<double>(support) / static_cast<double>(ipow(N, l));
  const double density = mass / support * static_cast<double>(cells);
  std::vector<double> values(cells * m, 0.0);
  for (long c = 0; c < cells; ++c) {
    if (!hit[c]) continue;
    for (int i = 0; i < m; ++i) values[c * m + i] = lambda(i) * density;
  }
  return DiscreteMeasure::grid(d, m, N, std::move(values));
}

const char* to_string(DerivativeSymbol s) { return s == DerivativeSymbol::centered ? "centered" : "spectral"; }

FourierResidual verify_afree_fft(const OperatorSpec& op, const DiscreteMeasure& mu, double tol,
                                 DerivativeSymbol symbol, Execution exec) {
  if (mu.kind() != MeasureKind::grid) throw UnsupportedError("verify_afree_fft: rasterize atomic measures first");
  if (op.d() != mu.d() || op.m() != mu.m()) {
    throw InputError("verify_afree_fft: operator acts on (d, m) = (" + std::to_string(op.d()) + ", " +
                     std::to_string(op.m()) + "), measure has (" + std::to_string(mu.d()) + ", " +
                     std::to_string(mu.m()) + ")");
  }
  const int d = mu.d(), m = mu.m(), N = mu.N();
  const long cells = mu.cells();
  // A(w) / |w|^k = A(w / |w|) by homogeneity.
  const PrincipalSymbol A(op.principal_part());

  // One transform per channel; planning is not thread safe, so it stays serial.
  std::vector<std::complex<double>> hat(cells * m);
  {
    fftw_complex* buf = fftw_alloc_complex(cells);
    std::vector<int> dims(d, N);
    fftw_plan plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    for (int ch = 0; ch < m; ++ch) {
      for (long c = 0; c < cells; ++c) {
        buf[c][0] = mu.values()[c * m + ch];
        buf[c][1] = 0.0;
      }
      fftw_execute(plan);
      for (long c = 0; c < cells; ++c) hat[c * m + ch] = {buf[c][0], buf[c][1]};
    }
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }

  double scale = 0.0;
  for (long c = 0; c < cells; ++c) {
    double s = 0.0;
    for (int ch = 0; ch < m; ++ch) s += std::norm(hat[c * m + ch]);
    scale = std::max(scale, std::sqrt(s));
  }

  // Per-frequency residual, NaN where the frequency is skipped.
  std::vector<double> res(cells, std::numeric_limits<double>::quiet_NaN());
  auto one = [&](long c) {
    if (c == 0 || scale == 0.0) return;
    const auto idx = unflatten(c, d, N);
    Vector w(d);
    for (int j = 0; j < d; ++j) {
      const long rep = centered_rep(idx[j], N);
      if (symbol == DerivativeSymbol::spectral) {
        if (2 * idx[j] == N) return;
        w(j) = 2.0 * kPi * rep;
      } else {
        w(j) = N * std::sin(2.0 * kPi * static_cast<double>(idx[j]) / N);
      }
    }
    const double wn = w.norm();
    if (wn < 1e-9 * N) return;
    const Matrix S = A(w / wn);
    Vector re(m), im(m);
    for (int ch = 0; ch < m; ++ch) {
      re(ch) = hat[c * m + ch].real();
      im(ch) = hat[c * m + ch].imag();
    }
    res[c] = std::sqrt((S * re).squaredNorm() + (S * im).squaredNorm()) / scale;
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long c = 0; c < cells; ++c) one(c);
  } else {
    for (long c = 0; c < cells; ++c) one(c);
  }

  FourierResidual out;
  out.tol = tol;
  out.symbol = symbol;
  double sum = 0.0;
  long worst = -1;
  for (long c = 0; c < cells; ++c) {
    if (std::isnan(res[c])) continue;
    ++out.frequencies;
    sum += res[c];
    if (worst < 0 || res[c] > out.max_residual) {
      out.max_residual = res[c];
      worst = c;
    }
  }
  out.mean_residual = out.frequencies > 0 ? sum / out.frequencies : 0.0;
  if (worst >= 0) {
    for (long i : unflatten(worst, d, N)) out.worst_frequency.push_back(static_cast<int>(centered_rep(i, N)));
  }
  out.pass = out.max_residual < tol;
  return out;
}

BvShape BvShape::slab(int d, int axis, double lo, double hi) {
  if (d < 1 || axis < 0 || axis >= d) throw InputError("slab: axis out of range");
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) throw InputError("slab: need 0 <= lo < hi <= 1");
  BvShape s;
  s.kind = Kind::slab;
  s.d = d;
  s.axis = axis;
  s.lo = lo;
  s.hi = hi;
  return s;
}

BvShape BvShape::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() < 1) throw InputError("box: corner dimensions differ");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(0.0 <= lo(i) && lo(i) < hi(i) && hi(i) <= 1.0)) throw InputError("box: need 0 <= lo < hi <= 1");
  }
  BvShape s;
  s.kind = Kind::box;
  s.d = static_cast<int>(lo.size());
  s.box_lo = std::move(lo);
  s.box_hi = std::move(hi);
  return s;
}

BvShape BvShape::polygon(std::vector<Vector> vertices) {
  if (vertices.size() < 3) throw InputError("polygon: need at least three vertices");
  for (const Vector& v : vertices) {
    if (v.size() != 2) throw InputError("polygon: vertices must lie in R^2");
  }
  BvShape s;
  s.kind = Kind::polygon;
  s.d = 2;
  s.vertices = std::move(vertices);
  return s;
}

namespace {

bool inside(const BvShape& s, const Vector& x) {
  switch (s.kind) {
    case BvShape::Kind::slab:
      return s.lo <= x(s.axis) && x(s.axis) < s.hi;
    case BvShape::Kind::box:
      return (s.box_lo.array() <= x.array()).all() && (x.array() < s.box_hi.array()).all();
    case BvShape::Kind::polygon: {
      bool in = false;
      const std::size_t n = s.vertices.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vector& a = s.vertices[i];
        const Vector& b = s.vertices[j];
        if ((a(1) > x(1)) != (b(1) > x(1)) && x(0) < (b(0) - a(0)) * (x(1) - a(1)) / (b(1) - a(1)) + a(0)) {
          in = !in;
        }
      }
      return in;
    }
  }
  return false;
}

}  // namespace

DiscreteMeasure bv_jump_example(const BvShape& shape, int N, const Vector& a) {
  if (N < 4) throw InputError("bv_jump_example: N must be at least 4");
  if (a.size() < 1 || a.norm() == 0.0) throw InputError("bv_jump_example: jump vector must be nonzero");
  const int d = shape.d;
  const int p = static_cast<int>(a.size());
  const int m = p * d;
  const long cells = ipow(N, d);
  std::vector<char> chi(cells);
  long count = 0;
  for (long c = 0; c < cells; ++c) {
    const auto idx = unflatten(c, d, N);
    Vector x(d);
    for (int k = 0; k < d; ++k) x(k) = static_cast<double>(idx[k]) / N;
    chi[c] = inside(shape, x) ? 1 : 0;
    count += chi[c];
  }
  if (count == 0 || count == cells) throw InputError("bv_jump_example: shape is empty or fills the torus at this N");

  std::vector<double> values(cells * m, 0.0);
  for (long c = 0; c < cells; ++c) {
    auto idx = unflatten(c, d, N);
    for (int j = 0; j < d; ++j) {
      const long keep = idx[j];
      idx[j] = keep + 1;
      const int up = chi[flatten(idx, N)];
      idx[j] = keep - 1;
      const int down = chi[flatten(idx, N)];
      idx[j] = keep;
      const double dj = 0.5 * N * (up - down);
      if (dj == 0.0) continue;
      for (int i = 0; i < p; ++i) values[c * m + i * d + j] = a(i) * dj;
    }
  }
  return DiscreteMeasure::grid(d, m, N, std::move(values));
}

namespace {

// Calls f(displacement, value, spacing) for every grid cell or atom within
// distance cutoff of center (nearest periodic image for grids).
template <class F>
void for_each_near(const DiscreteMeasure& mu, const Vector& center, double cutoff, F&& f) {
  const int d = mu.d();
  if (mu.kind() == MeasureKind::atomic) {
    for (const Atom& a : mu.atoms()) {
      const Vector y = a.position - center;
      if (y.norm() < cutoff) f(y, a.weight);
    }
    return;
  }
  const int N = mu.N();
  const long reach = static_cast<long>(std::ceil(cutoff * N)) + 1;
  std::vector<long> base(d);
  for (int k = 0; k < d; ++k) base[k] = static_cast<long>(std::floor(center(k) * N));
  std::vector<long> off(d, -reach);
  const double vol = mu.cell_volume();
  for (;;) {
    Vector y(d);
    std::vector<long> idx(d);
    for (int k = 0; k < d; ++k) {
      idx[k] = base[k] + off[k];
      y(k) = static_cast<double>(idx[k]) / N - center(k);
    }
    if (y.norm() < cutoff) {
      const Vector v = mu.value(flatten(idx, N));
      if (v.squaredNorm() > 0.0) f(y, Vector(v * vol));
    }
    int k = d - 1;
    for (; k >= 0; --k) {
      if (++off[k] <= reach) break;
      off[k] = -reach;
    }
    if (k < 0) break;
  }
}

void check_window(const DiscreteMeasure& mu, const Vector& center, double radius, const char* who) {
  if (center.size() != mu.d()) throw InputError(std::string(who) + ": point has the wrong dimension");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError(std::string(who) + ": radius must be positive");
  if (mu.kind() == MeasureKind::grid && radius + mu.spacing() >= 0.5) {
    throw InputError(std::string(who) + ": radius must stay below half the torus");
  }
}

}  // namespace

DiscreteMeasure blowup(const DiscreteMeasure& mu, const Vector& x0, double r, int l) {
  check_window(mu, x0, r, "blowup");
  if (l < 0 || l > mu.d()) throw InputError("blowup: l out of range");
  const double h = mu.spacing();
  const double factor = std::pow(2.0 * r, -l);
  std::vector<Atom> atoms;
  for_each_near(mu, x0, r + 0.5 * h + 1e-12, [&](const Vector& y, const Vector& w) {
    atoms.push_back({y / r, w * factor});
  });
  return DiscreteMeasure::atomic(mu.d(), mu.m(), std::move(atoms), h / r);
}

double window_mass(const DiscreteMeasure& mu, const Vector& center, double radius) {
  check_window(mu, center, radius, "window_mass");
  const double h = mu.spacing();
  double mass = 0.0;
  for_each_near(mu, center, radius + 0.5 * h + 1e-12,
                [&](const Vector& y, const Vector& w) { mass += ramp(radius, y.norm(), h) * w.norm(); });
  return mass;
}

DensityEstimate upper_density(const DiscreteMeasure& mu, const Vector& x0, int l, const std::vector<double>& radii) {
  if (l < 0 || l > mu.d()) throw InputError("upper_density: l out of range");
  if (radii.empty()) throw InputError("upper_density: no radii");
  DensityEstimate est;
  const double h = mu.spacing();
  for (double r : radii) {
    if (!(r > 0.0)) throw InputError("upper_density: radii must be positive");
    if (r < 4.0 * h) {
      est.warnings.push_back("radius " + std::to_string(r) + " is below four grid spacings; excluded");
      continue;
    }
    const double ratio = window_mass(mu, x0, r) / std::pow(2.0 * r, l);
    est.radii.push_back(r);
    est.ratios.push_back(ratio);
    est.value = std::max(est.value, ratio);
  }
  if (est.radii.empty()) throw InputError("upper_density: every radius is below resolution");
  est.finest_radius = *std::min_element(est.radii.begin(), est.radii.end());
  return est;
}

double blowup_window_distance(const DiscreteMeasure& blown, const Vector& lambda_unit, const Plane& plane,
                              double theta) {
  if (blown.kind() != MeasureKind::atomic) throw InputError("blowup_window_distance: expected a blown-up measure");
  if (plane.ambient() != blown.d() || lambda_unit.size() != blown.m()) {
    throw InputError("blowup_window_distance: dimension mismatch");
  }
  if (!(theta > 0.0)) throw InputError("blowup_window_distance: theta must be positive");
  const int l = plane.dimension();
  const double s = blown.spacing();
  const Matrix& B = plane.basis();
  const double half_width = 1.0 + s;
  const int per_axis = static_cast<int>(std::ceil(2.0 * (half_width + 0.5))) + 2;
  const long lo = -per_axis / 2 - 1;
  auto bin_of = [&](double u) { return static_cast<long>(std::floor((u - 0.5 * s) * 2.0)) - lo; };
  const long span = per_axis + 2;
  const long bins = ipow(span, l);
  std::vector<Vector> got(bins, Vector::Zero(blown.m()));
  double off = 0.0;
  for (const Atom& a : blown.atoms()) {
    const double w = ramp(1.0, a.position.norm(), s);
    if (w == 0.0) continue;
    const Vector u = B.transpose() * a.position;
    if ((a.position - B * u).norm() > 0.5 * s + 1e-12) {
      off += w * a.weight.norm();
      continue;
    }
    long b = 0;
    for (int j = 0; j < l; ++j) b = b * span + std::clamp(bin_of(u(j)), 0L, span - 1);
    got[b] += w * a.weight;
  }
  // Reference mass per bin by midpoint quadrature of the same ramp.
  const int q = l >= 3 ? 24 : (l == 2 ? 96 : 4096);
  // The blow-up of H^l on a plane is 2^-l H^l on the same plane.
  const double sc = theta * hausdorff_scale(l) / std::pow(2.0, l);
  double dist = off;
  std::vector<long> bi(l, 0);
  for (long b = 0; b < bins; ++b) {
    long rem = b;
    for (int j = l - 1; j >= 0; --j) {
      bi[j] = rem % span;
      rem /= span;
    }
    // Bin edges j / 2 + s / 2 in plane coordinates.
    std::vector<double> left(l);
    bool reachable = true;
    for (int j = 0; j < l; ++j) {
      left[j] = 0.5 * static_cast<double>(bi[j] + lo) + 0.5 * s;
      if (left[j] > half_width || left[j] + 0.5 < -half_width) reachable = false;
    }
    double area = 0.0;
    if (reachable) {
      const double cell = 0.5 / q;
      std::vector<int> t(l, 0);
      for (long it = 0; it < ipow(q, l); ++it) {
        double r2 = 0.0;
        for (int j = 0; j < l; ++j) {
          const double u = left[j] + (t[j] + 0.5) * cell;
          r2 += u * u;
        }
        area += ramp(1.0, std::sqrt(r2), s);
        for (int j = l - 1; j >= 0; --j) {
          if (++t[j] < q) break;
          t[j] = 0;
        }
      }
      area *= std::pow(cell, l);
    }
    dist += (got[b] - sc * area * lambda_unit).norm();
  }
  return dist / theta;
}

double simplex_volume(const Matrix& vertices) {
  const int l = static_cast<int>(vertices.cols()) - 1;
  if (l < 0) throw InputError("simplex: no vertices");
  if (l == 0) return 1.0;
  const Matrix E = vertices.rightCols(l).colwise() - vertices.col(0);
  const double g = (E.transpose() * E).determinant();
  return std::sqrt(std::max(g, 0.0)) / std::tgamma(l + 1.0);
}

double projected_volume(const Matrix& vertices, const Plane& plane) {
  const int l = static_cast<int>(vertices.cols()) - 1;
  if (l == 0) return 1.0;
  if (plane.dimension() != l) throw InputError("projected_volume: plane dimension differs from simplex dimension");
  const Matrix E = plane.basis().transpose() * (vertices.rightCols(l).colwise() - vertices.col(0));
  return std::abs(E.determinant()) / std::tgamma(l + 1.0);
}

void PolyhedralSet::validate() const {
  if (d < 1 || l < 0 || l > d) throw InputError("polyhedral set: need 0 <= l <= d");
  for (std::size_t i = 0; i < simplices.size(); ++i) {
    const Matrix& S = simplices[i];
    const std::string where = "simplex " + std::to_string(i);
    if (S.rows() != d || S.cols() != l + 1) {
      throw InputError(where + ": expected " + std::to_string(l + 1) + " vertices in R^" + std::to_string(d));
    }
    if (!S.allFinite()) throw InputError(where + ": non-finite vertex");
    double diam = 0.0;
    for (Eigen::Index a = 0; a < S.cols(); ++a) {
      for (Eigen::Index b = a + 1; b < S.cols(); ++b) diam = std::max(diam, (S.col(a) - S.col(b)).norm());
    }
    if (l > 0 && simplex_volume(S) <= 1e-12 * std::pow(std::max(diam, 1e-300), l)) {
      throw InputError(where + ": degenerate");
    }
  }
}

double PolyhedralSet::hausdorff_measure() const {
  double v = 0.0;
  for (const Matrix& S : simplices) v += simplex_volume(S);
  return hausdorff_scale(l) * v;
}

IntegralGeometricEstimate integral_geometric_measure(const PolyhedralSet& set, int l, long samples,
                                                     std::uint64_t seed, Execution exec) {
  set.validate();
  if (l != set.l) throw InputError("integral_geometric_measure: simplex dimension differs from l");
  if (l < 1) throw InputError("integral_geometric_measure: l must be positive");
  if (samples < 2) throw InputError("integral_geometric_measure: need at least two samples");
  constexpr long kBlock = 1024;
  const long blocks = (samples + kBlock - 1) / kBlock;
  const double sc = hausdorff_scale(l);
  IntegralGeometricEstimate out;
  out.samples = samples;
  out.hausdorff = set.hausdorff_measure();
  const double bound = out.hausdorff * (1.0 + 1e-12) + 1e-300;

  struct Partial {
    double sum = 0.0, sum_sq = 0.0, max = 0.0;
    bool ok = true;
  };
  std::vector<Partial> parts(blocks);
  auto run = [&](long b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(seq);
    Partial p;
    const long n = std::min(kBlock, samples - b * kBlock);
    for (long i = 0; i < n; ++i) {
      double x = 0.0;
      if (!set.simplices.empty()) {
        const Plane pi = uniform_plane(l, set.d, rng);
        for (const Matrix& S : set.simplices) x += projected_volume(S, pi);
        x *= sc;
      }
      p.sum += x;
      p.sum_sq += x * x;
      p.max = std::max(p.max, x);
      if (x > bound) p.ok = false;
    }
    parts[b] = p;
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long b = 0; b < blocks; ++b) run(b);
  } else {
    for (long b = 0; b < blocks; ++b) run(b);
  }
  double sum = 0.0, sum_sq = 0.0;
  for (const Partial& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
    out.max_sample = std::max(out.max_sample, p.max);
    out.per_sample_bound = out.per_sample_bound && p.ok;
  }
  out.estimate = sum / samples;
  const double var = std::max(0.0, (sum_sq - samples * out.estimate * out.estimate) / (samples - 1));
  out.standard_error = std::sqrt(var / samples);
  return out;
}

}  // namespace wavecone
