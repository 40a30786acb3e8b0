#include "wavecone/search.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <tuple>

#include "wavecone/grassmannian.hpp"

namespace wavecone {

double monomial_perturbation(const std::vector<int>& exponents, const Vector& c, double r) {
  double hi = 1.0;
  double at = 1.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const double a = std::abs(c[static_cast<Eigen::Index>(i)]);
    for (int p = 0; p < exponents[i]; ++p) {
      hi *= a + r;
      at *= a;
    }
  }
  return hi - at;
}

void VariationBound::add(std::vector<int> exponents, double weight) {
  if (weight > 0.0) terms_.emplace_back(std::move(exponents), weight);
}

double VariationBound::operator()(const Vector& c, double r) const {
  double s = 0.0;
  for (const auto& [e, w] : terms_) s += w * monomial_perturbation(e, c, r);
  return s;
}

VariationBound applied_variation(const OperatorSpec& op, const Vector& lambda) {
  VariationBound vb;
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() == op.k()) vb.add(alpha.entries(), (A * lambda).norm());
  }
  return vb;
}

VariationBound symbol_variation(const OperatorSpec& op) {
  VariationBound vb;
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() != op.k()) continue;
    const double s = A.rows() == 1 || A.cols() == 1 ? A.norm() : Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
    vb.add(alpha.entries(), s);
  }
  return vb;
}

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::zero_found:
      return "zero_found";
    case SearchStatus::certified_positive:
      return "certified_positive";
    case SearchStatus::undecided:
      return "undecided";
  }
  return "undecided";
}

CellEvaluator lipschitz_cells(std::function<double(const Vector&)> f, VariationBound variation) {
  return [f = std::move(f), v = std::move(variation)](const Vector& c, double r) {
    const double value = f(c);
    return CellEstimate{value, r > 0.0 ? value - v(c, r) : value};
  };
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Cell {
  std::vector<double> lo, hi;
  Vector center;
  double radius = 0.0;
  CellEstimate est;
  long id = 0;
};

struct CellOrder {
  bool operator()(const Cell& a, const Cell& b) const {
    if (a.est.lower != b.est.lower) return a.est.lower > b.est.lower;
    return a.id > b.id;
  }
};

double sup_abs_sin(double lo, double hi) {
  for (double peak = kPi / 2; peak < 2 * kPi; peak += kPi) {
    if (lo <= peak && peak <= hi) return 1.0;
  }
  return std::max(std::abs(std::sin(lo)), std::abs(std::sin(hi)));
}

Vector angles_to_point(const std::vector<double>& a) {
  const auto p = a.size();
  Vector x(static_cast<Eigen::Index>(p + 1));
  double s = 1.0;
  for (std::size_t i = 0; i < p; ++i) {
    x[static_cast<Eigen::Index>(i)] = s * std::cos(a[i]);
    s *= std::sin(a[i]);
  }
  x[static_cast<Eigen::Index>(p)] = s;
  return x;
}

// Per-angle arc-length weights; the cell radius is their half-width sum.
std::vector<double> arc_weights(const std::vector<double>& lo, const std::vector<double>& hi) {
  std::vector<double> w(lo.size());
  double s = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    w[i] = (hi[i] - lo[i]) * s;
    s *= sup_abs_sin(lo[i], hi[i]);
  }
  return w;
}

struct TopPoints {
  struct Entry {
    double value;
    Vector x;
    bool refined;
  };
  std::vector<Entry> entries;
  std::size_t capacity = 4;

  void offer(double value, const Vector& x) {
    for (auto& e : entries) {
      if ((e.x - x).norm() < 1e-3 || (e.x + x).norm() < 1e-3) {
        if (value < e.value) e = {value, x, false};
        return;
      }
    }
    entries.push_back({value, x, false});
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
    if (entries.size() > capacity) entries.pop_back();
  }
};

}  // namespace

SphereSearchResult sphere_branch_and_bound(int q, const CellEvaluator& eval, const SphereSearchOptions& opts) {
  if (q < 1) throw InputError("sphere search: dimension must be positive");
  SphereSearchResult res;
  res.best_value = std::numeric_limits<double>::infinity();
  auto objective = [&](const Vector& x) { return opts.objective ? opts.objective(x) : eval(x, 0.0).value; };

  auto consider = [&](double value, const Vector& x) {
    if (value < res.best_value) {
      res.best_value = value;
      res.best_point = x;
    }
  };

  for (const Vector& p : opts.probes) {
    if (p.size() != q) continue;
    const double v = objective(p);
    ++res.cells;
    consider(v, p);
    if (v < opts.zero_threshold) {
      res.status = SearchStatus::zero_found;
      res.best_point = p;
      res.best_value = v;
      return res;
    }
  }

  if (q == 1) {
    std::vector<Vector> pts{Vector::Constant(1, 1.0)};
    if (!opts.projective) pts.push_back(Vector::Constant(1, -1.0));
    double lower = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
      const auto e = eval(p, 0.0);
      ++res.cells;
      consider(e.value, p);
      lower = std::min(lower, e.lower);
    }
    res.lower_bound = lower;
    res.status = res.best_value < opts.zero_threshold ? SearchStatus::zero_found
                 : lower > opts.positive_threshold   ? SearchStatus::certified_positive
                                                     : SearchStatus::undecided;
    return res;
  }

  const std::size_t p = static_cast<std::size_t>(q - 1);
  std::vector<double> lo(p, 0.0), hi(p, kPi);
  hi[p - 1] = opts.projective && q == 2 ? kPi : 2 * kPi;
  if (opts.projective && q >= 3) hi[0] = kPi / 2;

  std::priority_queue<Cell, std::vector<Cell>, CellOrder> heap;
  long next_id = 0;
  TopPoints top;
  bool zero = false;

  auto make = [&](std::vector<double> l, std::vector<double> h) {
    Cell c;
    std::vector<double> mid(p);
    for (std::size_t i = 0; i < p; ++i) mid[i] = 0.5 * (l[i] + h[i]);
    c.center = angles_to_point(mid);
    double r = 0.0;
    for (double w : arc_weights(l, h)) r += 0.5 * w;
    c.radius = r;
    c.lo = std::move(l);
    c.hi = std::move(h);
    c.est = eval(c.center, c.radius);
    c.id = next_id++;
    ++res.cells;
    consider(c.est.value, c.center);
    top.offer(c.est.value, c.center);
    if (c.est.value < opts.zero_threshold) zero = true;
    heap.push(std::move(c));
  };

  // Initial tensor grid of cells.
  const int splits = std::max(1, opts.initial_splits);
  std::vector<int> idx(p, 0);
  while (true) {
    std::vector<double> l(p), h(p);
    for (std::size_t i = 0; i < p; ++i) {
      const double w = (hi[i] - lo[i]) / splits;
      l[i] = lo[i] + w * idx[i];
      h[i] = l[i] + w;
    }
    make(std::move(l), std::move(h));
    if (zero) break;
    std::size_t k = 0;
    while (k < p && ++idx[k] == splits) idx[k++] = 0;
    if (k == p) break;
  }

  long next_refine = res.cells;
  auto refine_top = [&]() {
    if (!opts.refine) return;
    for (auto& e : top.entries) {
      if (e.refined) continue;
      e.refined = true;
      Vector x = opts.refine(e.x);
      const double v = objective(x);
      ++res.cells;
      consider(v, x);
      if (v < opts.zero_threshold) {
        zero = true;
        return;
      }
    }
  };

  if (!zero) refine_top();
  while (!zero) {
    const Cell cell = heap.top();
    if (cell.est.lower > opts.positive_threshold) {
      res.status = SearchStatus::certified_positive;
      res.lower_bound = cell.est.lower;
      return res;
    }
    if (res.cells >= opts.max_cells) {
      res.status = SearchStatus::undecided;
      res.lower_bound = std::max(0.0, cell.est.lower);
      return res;
    }
    heap.pop();
    const auto w = arc_weights(cell.lo, cell.hi);
    const auto split = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    const double mid = 0.5 * (cell.lo[split] + cell.hi[split]);
    auto h1 = cell.hi;
    h1[split] = mid;
    auto l2 = cell.lo;
    l2[split] = mid;
    make(cell.lo, std::move(h1));
    if (!zero) make(std::move(l2), cell.hi);
    if (!zero && res.cells >= next_refine) {
      refine_top();
      next_refine = res.cells * 4;
    }
  }
  res.status = SearchStatus::zero_found;
  res.lower_bound = 0.0;
  return res;
}

Matrix numeric_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  Vector xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (f(xp) - f(xm)) / (2 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

LMResult levenberg_marquardt(const LMProblem& problem, Vector x0, int max_iterations, double target) {
  auto retract = [&](const Vector& x) { return problem.retract ? problem.retract(x) : x; };
  LMResult out;
  out.x = retract(x0);
  Vector r = problem.residual(out.x);
  double f = r.norm();
  double mu = -1.0;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    if (f <= target || f == 0.0) break;
    const Matrix J = problem.jacobian ? problem.jacobian(out.x) : numeric_jacobian(problem.residual, out.x);
    const Matrix A = J.transpose() * J;
    const Vector g = J.transpose() * r;
    if (mu < 0.0) mu = 1e-3 * std::max(A.diagonal().maxCoeff(), 1e-12);
    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Matrix M = A;
      M.diagonal().array() += mu;
      const Vector step = M.ldlt().solve(-g);
      if (!step.allFinite()) {
        mu *= 8;
        continue;
      }
      const Vector xn = retract(out.x + step);
      const Vector rn = problem.residual(xn);
      const double fn = rn.norm();
      if (fn < f) {
        const bool stalled = f - fn <= 1e-15 * f;
        out.x = xn;
        r = rn;
        f = fn;
        mu = std::max(mu / 3, 1e-20);
        accepted = !stalled;
        break;
      }
      mu *= 4;
    }
    if (!accepted) break;
  }
  out.residual_norm = f;
  return out;
}

LMResult sphere_descent(const std::function<Vector(const Vector&)>& f,
                        const std::function<Matrix(const Vector&)>& jacobian, Vector x0, int max_iterations,
                        double target) {
  LMProblem p;
  p.residual = f;
  p.jacobian = jacobian;
  p.retract = [](const Vector& x) -> Vector { return x.normalized(); };
  return levenberg_marquardt(p, std::move(x0), max_iterations, target);
}

Vector retract_stiefel_blocks(const Vector& x, const std::vector<std::pair<int, int>>& shapes) {
  Vector out = x;
  Eigen::Index offset = 0;
  for (const auto& [rows, cols] : shapes) {
    const Eigen::Index size = static_cast<Eigen::Index>(rows) * cols;
    Eigen::Map<const Matrix> block(x.data() + offset, rows, cols);
    const Matrix q = cols == 1 ? Matrix(block.normalized()) : qr_orthonormalize(block);
    Eigen::Map<Matrix>(out.data() + offset, rows, cols) = q;
    offset += size;
  }
  return out;
}

Vector snap_direction(const Vector& x, int max_denominator) {
  const double peak = x.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return x;
  Vector y = x / peak;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double best = std::round(y[i]);
    double err = std::abs(y[i] - best);
    for (int q = 2; q <= max_denominator; ++q) {
      const double cand = std::round(y[i] * q) / q;
      const double e = std::abs(y[i] - cand);
      if (e < err - 1e-15) {
        err = e;
        best = cand;
      }
    }
    y[i] = best;
  }
  if (y.norm() == 0.0) return x;
  return y.normalized();
}

std::vector<Vector> ternary_directions(int d, int max_support) {
  using Key = std::tuple<int, std::vector<int>, std::vector<int>>;
  std::vector<std::pair<Key, Vector>> items;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  for (long code = 1; code < total; ++code) {
    Vector v(d);
    long c = code;
    for (int i = 0; i < d; ++i) {
      const int t = static_cast<int>(c % 3);
      c /= 3;
      v[i] = t == 0 ? 0.0 : (t == 1 ? 1.0 : -1.0);
    }
    std::vector<int> support, signs;
    for (int i = 0; i < d; ++i) {
      if (v[i] != 0.0) {
        support.push_back(i);
        signs.push_back(v[i] > 0 ? 0 : 1);
      }
    }
    if (signs.front() != 0) continue;  // one representative per line
    if (static_cast<int>(support.size()) > max_support) continue;
    items.emplace_back(Key{static_cast<int>(support.size()), support, signs}, v.normalized());
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vector> out;
  out.reserve(items.size());
  for (auto& it : items) out.push_back(std::move(it.second));
  return out;
}

}  // namespace wavecone
