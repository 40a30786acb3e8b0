#include "wavecone/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wavecone/closed_form.hpp"
#include "wavecone/kernels.hpp"

namespace wavecone {

const char* to_string(Decision d) {
  switch (d) {
    case Decision::member:
      return "member";
    case Decision::non_member:
      return "non_member";
    case Decision::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::closed_form:
      return "closed_form";
    case Method::exact_algebra:
      return "exact_algebra";
    case Method::search:
      return "search";
  }
  return "search";
}

const char* to_string(Triviality t) {
  switch (t) {
    case Triviality::confirmed_trivial:
      return "confirmed_trivial";
    case Triviality::found_nontrivial:
      return "found_nontrivial";
    case Triviality::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

const char* to_string(RankStatus s) {
  switch (s) {
    case RankStatus::holds:
      return "holds";
    case RankStatus::fails:
      return "fails";
    case RankStatus::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

// ---------------------------------------------------------------------------
// Exact linear algebra

int numeric_rank(const Vector& sv, double tol, std::optional<double> reference) {
  const double ref = reference.value_or(sv.size() > 0 ? sv.maxCoeff() : 0.0);
  if (!(ref > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol * ref) ++r;
  }
  return r;
}

namespace {

Matrix null_space_ref(const Matrix& a, double tol, std::optional<double> reference) {
  const Eigen::Index m = a.cols();
  if (a.rows() == 0) return Matrix::Identity(m, m);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const int r = numeric_rank(svd.singularValues(), tol, reference);
  return svd.matrixV().rightCols(m - r);
}

// Smallest of the first m singular values; 0 when the matrix has fewer than
// m rows (a nontrivial kernel is then automatic).
double kappa(const Matrix& a) {
  if (a.rows() < a.cols()) return 0.0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  return sv[sv.size() - 1];
}

double zero_threshold(const OperatorSpec& op, const ConeConfig& cfg) {
  return cfg.tol_zero * op.coefficient_scale();
}

bool in_common_kernel(const OperatorSpec& op, const Vector& lambda) {
  return annihilation_residual(op, lambda) < 1e-10;
}

std::vector<Vector> probes_for(int d) { return ternary_directions(d, std::min(d, 3)); }

Vector unit_axis(int n, int i) {
  Vector e = Vector::Zero(n);
  e[i] = 1.0;
  return e;
}

std::mt19937_64 stream(const ConeConfig& cfg, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t lambda_tag(const Vector& lambda) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const auto q = static_cast<std::int64_t>(std::llround(lambda[i] * 1e9));
    h = (h ^ static_cast<std::uint64_t>(q)) * 1099511628211ULL;
  }
  return h;
}

// |A^k(xi) lambda| on the sphere.
SphereSearchResult wave_search(const OperatorSpec& op, const Vector& lambda, const ConeConfig& cfg) {
  const AppliedSymbol a(op, lambda);
  const double thr = zero_threshold(op, cfg);
  auto f = [&a](const Vector& x) { return a.norm(x); };
  SphereSearchOptions o;
  o.zero_threshold = thr;
  o.positive_threshold = thr;
  o.max_cells = cfg.max_cells;
  o.probes = probes_for(op.d());
  o.objective = f;
  const int iters = cfg.descent_iterations;
  o.refine = [&a, f, iters](const Vector& x) {
    auto r = sphere_descent([&a](const Vector& y) { return a.value(y); },
                            [&a](const Vector& y) { return a.jacobian(y); }, x, iters);
    const Vector s = snap_direction(r.x);
    return f(s) <= f(r.x) ? s : r.x;
  };
  return sphere_branch_and_bound(op.d(), lipschitz_cells(f, applied_variation(op, lambda)), o);
}

}  // namespace

Matrix null_space(const Matrix& a, double tol) { return null_space_ref(a, tol, std::nullopt); }

Matrix kernel_at(const OperatorSpec& op, const Vector& xi, double tol, std::optional<double> reference) {
  if (xi.size() != op.d()) throw InputError("kernel_at: direction has the wrong length");
  if (!(xi.norm() > 0.0)) throw InputError("kernel_at: direction must be nonzero");
  return null_space_ref(principal_symbol(op, xi).matrix, tol, reference);
}

Matrix common_kernel(const OperatorSpec& op, double tol) {
  return null_space_ref(stacked_principal_coefficients(op), tol, std::nullopt);
}

bool is_cocanceling(const OperatorSpec& op, double tol) { return common_kernel(op, tol).cols() == 0; }

Vector require_unit(const Vector& lambda, int m, std::vector<std::string>* warnings) {
  if (lambda.size() != m) {
    std::ostringstream os;
    os << "lambda has length " << lambda.size() << ", expected " << m;
    throw InputError(os.str());
  }
  if (!lambda.allFinite()) throw InputError("lambda has non-finite entries");
  const double n = lambda.norm();
  const double dev = std::abs(n - 1.0);
  if (dev >= 1e-6) {
    std::ostringstream os;
    os << "lambda must be a unit vector (norm " << n << ")";
    throw InputError(os.str());
  }
  if (dev > 0.0 && warnings) warnings->push_back("lambda renormalized (norm deviated from 1 by " + std::to_string(dev) + ")");
  return lambda / n;
}

double annihilation_residual(const OperatorSpec& op, const Vector& lambda) {
  const double scale = op.coefficient_scale();
  if (!(scale > 0.0)) return 0.0;
  double worst = 0.0;
  for (const auto& [alpha, A] : op.terms()) {
    if (alpha.order() == op.k()) worst = std::max(worst, (A * lambda).norm());
  }
  return worst / scale;
}

// ---------------------------------------------------------------------------
// Wave cone and plane restrictions

ConeVerdict wavecone_member(const OperatorSpec& op, const Vector& lambda_in, const ConeConfig& cfg) {
  ConeVerdict v;
  const Vector lambda = require_unit(lambda_in, op.m(), &v.notes);
  if (in_common_kernel(op, lambda)) {
    v.decision = Decision::member;
    v.method = Method::exact_algebra;
    v.direction = unit_axis(op.d(), 0);
    v.notes.push_back("lambda lies in the common kernel of the top-order coefficients");
    return v;
  }
  if (cfg.use_closed_form && has_closed_form(op)) {
    const auto ans = closed_form_ell(op, lambda, op.d(), cfg.tol_rank);
    if (ans && ans->decision == Decision::member) {
      v.decision = Decision::member;
      v.method = Method::closed_form;
      v.direction = ans->direction;
      v.margin = AppliedSymbol(op, lambda).norm(*ans->direction);
      v.notes.push_back(ans->rule);
      return v;
    }
    if (ans && ans->decision == Decision::non_member) {
      const auto s = wave_search(op, lambda, cfg);
      v.decision = Decision::non_member;
      v.method = Method::closed_form;
      v.margin = s.best_value;
      v.certified_bound = s.status == SearchStatus::certified_positive ? s.lower_bound : 0.0;
      v.direction = s.best_point;
      v.notes.push_back(ans->rule);
      return v;
    }
  }
  const auto s = wave_search(op, lambda, cfg);
  v.direction = s.best_point;
  v.margin = s.best_value;
  v.certified_bound = s.lower_bound;
  switch (s.status) {
    case SearchStatus::zero_found:
      v.decision = Decision::member;
      v.certified_bound = 0.0;
      v.method = s.best_value == 0.0 ? Method::exact_algebra : Method::search;
      break;
    case SearchStatus::certified_positive:
      v.decision = Decision::non_member;
      break;
    case SearchStatus::undecided:
      v.decision = Decision::inconclusive;
      v.notes.push_back("sphere search exhausted its cell budget");
      break;
  }
  return v;
}

RestrictedEllipticity restricted_elliptic(const OperatorSpec& op, const Vector& lambda_in, const Plane& plane,
                                          const ConeConfig& cfg) {
  const Vector lambda = require_unit(lambda_in, op.m());
  const OperatorSpec b = restrict_to_plane(op, plane);
  const int l = plane.dimension();
  const AppliedSymbol a(b, lambda);
  auto f = [&a](const Vector& x) { return a.norm(x); };
  SphereSearchOptions o;
  o.zero_threshold = zero_threshold(op, cfg);
  o.positive_threshold = o.zero_threshold;
  o.max_cells = cfg.max_cells;
  o.probes = probes_for(l);
  o.objective = f;
  const int iters = cfg.descent_iterations;
  o.refine = [&a, f, iters](const Vector& x) {
    auto r = sphere_descent([&a](const Vector& y) { return a.value(y); },
                            [&a](const Vector& y) { return a.jacobian(y); }, x, iters);
    const Vector s = snap_direction(r.x);
    return f(s) <= f(r.x) ? s : r.x;
  };
  const auto s = sphere_branch_and_bound(l, lipschitz_cells(f, applied_variation(b, lambda)), o);
  RestrictedEllipticity out;
  out.status = s.status;
  out.elliptic = s.status == SearchStatus::certified_positive;
  out.margin = out.elliptic ? s.lower_bound : s.best_value;
  out.min_value = s.best_value;
  out.witness = plane.basis() * s.best_point;
  return out;
}

namespace {

ConeVerdict non_member_on(const OperatorSpec& op, const Vector& lambda, const Plane& plane, const ConeConfig& cfg,
                          Method method, const std::string& note, bool* ok) {
  ConeVerdict v;
  const auto re = restricted_elliptic(op, lambda, plane, cfg);
  *ok = re.elliptic;
  v.decision = Decision::non_member;
  v.method = method;
  v.plane = plane;
  v.margin = re.min_value;
  v.certified_bound = re.margin;
  if (!note.empty()) v.notes.push_back(note);
  return v;
}

std::vector<Plane> random_planes(int l, int d, int count, std::mt19937_64& rng) {
  std::vector<Plane> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(uniform_plane(l, d, rng));
  return out;
}

constexpr int kScreenResolution = 16;

// Local search on the plane screen estimate, starting from a plane.
Plane climb_plane(const AppliedSymbol& a, Plane start, double start_value, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double step = 0.3;
  Plane best = std::move(start);
  double best_value = start_value;
  for (int it = 0; it < 60 && step > 1e-3; ++it) {
    Matrix b = best.basis();
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] += step * g(rng);
    Plane cand(qr_orthonormalize(b));
    const double val = screen_planes(a, {cand}, kScreenResolution, Execution::serial)[0];
    if (val > best_value) {
      best = std::move(cand);
      best_value = val;
    } else {
      step *= 0.85;
    }
  }
  return best;
}

}  // namespace

ConeVerdict ell_wavecone_member(const OperatorSpec& op, const Vector& lambda_in, int l, const ConeConfig& cfg) {
  const int d = op.d();
  if (l < 1 || l > d) {
    std::ostringstream os;
    os << "ell_wavecone_member: l must lie in [1, " << d << "], got " << l;
    throw InputError(os.str());
  }
  std::vector<std::string> warnings;
  const Vector lambda = require_unit(lambda_in, op.m(), &warnings);
  auto finish = [&warnings](ConeVerdict v) {
    v.notes.insert(v.notes.begin(), warnings.begin(), warnings.end());
    return v;
  };

  if (in_common_kernel(op, lambda)) {
    ConeVerdict v;
    v.decision = Decision::member;
    v.method = Method::exact_algebra;
    v.direction = unit_axis(d, 0);
    v.notes.push_back("lambda lies in the common kernel: A^k(xi) lambda = 0 for every xi");
    return finish(v);
  }

  if (cfg.use_closed_form && has_closed_form(op)) {
    const auto ans = closed_form_ell(op, lambda, l, cfg.tol_rank);
    if (ans && ans->decision == Decision::member) {
      ConeVerdict v;
      v.decision = Decision::member;
      v.method = Method::closed_form;
      v.direction = ans->direction;
      v.notes.push_back(ans->rule);
      return finish(v);
    }
    if (ans && ans->decision == Decision::non_member) {
      bool ok = false;
      auto v = non_member_on(op, lambda, *ans->plane, cfg, Method::closed_form, ans->rule, &ok);
      if (!ok) v.notes.push_back("restricted ellipticity margin not certified within the cell budget");
      return finish(v);
    }
  }

  if (l == d) {
    ConeVerdict v = wavecone_member(op, lambda, cfg);
    if (v.decision == Decision::non_member) {
      v.plane = Plane::first_coordinates(d, d);
    }
    return finish(v);
  }

  if (l == 1) {
    // Lambda^1 is the common kernel and lambda is not in it: the line through
    // the direction maximizing |A^k(xi) lambda| is an elliptic witness.
    const AppliedSymbol a(op, lambda);
    auto cands = probes_for(d);
    for (auto& x : sphere_grid(d, 6)) cands.push_back(std::move(x));
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const double val = a.norm(cands[i]);
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    bool ok = false;
    auto v = non_member_on(op, lambda, Plane(cands[best]), cfg, Method::exact_algebra,
                           "lambda is not annihilated by every top-order coefficient", &ok);
    v.direction = cands[best];
    return finish(v);
  }

  const ConeVerdict wave = wavecone_member(op, lambda, cfg);
  if (wave.decision == Decision::non_member) {
    bool ok = false;
    auto v = non_member_on(op, lambda, Plane::first_coordinates(d, l), cfg, Method::search,
                           "lambda lies outside the wave cone, so every plane restriction is elliptic", &ok);
    if (ok) return finish(v);
  }

  const double thr = zero_threshold(op, cfg);
  const AppliedSymbol a(op, lambda);
  const bool grid_ok = plane_grid_supported(l, d);
  std::vector<Plane> grid = grid_ok ? plane_grid(l, d, cfg.resolution) : std::vector<Plane>{};
  auto rng = stream(cfg, lambda_tag(lambda) ^ static_cast<std::uint64_t>(l));
  std::vector<Plane> cands = grid;
  for (auto& p : random_planes(l, d, cfg.plane_budget, rng)) cands.push_back(std::move(p));

  const auto est = screen_planes(a, cands, kScreenResolution, cfg.execution);
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&est](std::size_t x, std::size_t y) { return est[x] > est[y]; });

  double best_estimate = order.empty() ? 0.0 : est[order[0]];
  const std::size_t certify = std::min<std::size_t>(order.size(), 8);
  for (std::size_t t = 0; t < certify; ++t) {
    if (est[order[t]] <= thr) break;
    bool ok = false;
    auto v = non_member_on(op, lambda, cands[order[t]], cfg, Method::search, "elliptic plane restriction found", &ok);
    if (ok) return finish(v);
  }
  if (!order.empty() && best_estimate > thr) {
    Plane climbed = climb_plane(a, cands[order[0]], best_estimate, rng);
    bool ok = false;
    auto v = non_member_on(op, lambda, climbed, cfg, Method::search, "elliptic plane restriction found by local search",
                           &ok);
    if (ok) return finish(v);
  }

  ConeVerdict v;
  v.margin = std::max(best_estimate, 0.0);
  if (grid_ok && d <= 3) {
    const auto sweep = sweep_planes(op, lambda, grid, cfg, cfg.execution);
    std::optional<std::size_t> elliptic;
    bool all_zero = true;
    double worst_min = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (sweep[i].elliptic && (!elliptic || sweep[i].margin > sweep[*elliptic].margin)) elliptic = i;
      if (sweep[i].status != SearchStatus::zero_found) all_zero = false;
      worst_min = std::max(worst_min, sweep[i].min_value);
    }
    if (elliptic) {
      bool ok = false;
      auto w = non_member_on(op, lambda, grid[*elliptic], cfg, Method::search, "elliptic plane restriction on the grid",
                             &ok);
      return finish(w);
    }
    if (all_zero) {
      v.decision = Decision::member;
      v.method = worst_min == 0.0 ? Method::exact_algebra : Method::search;
      v.margin = worst_min;
      v.direction = wave.direction;
      std::ostringstream os;
      os << "every one of " << grid.size() << " grid planes carries a zero of the restricted symbol";
      v.notes.push_back(os.str());
      return finish(v);
    }
    v.notes.push_back("some grid planes were undecided within the cell budget");
  } else {
    v.notes.push_back("no certified elliptic plane; member decisions by search need d <= 3");
  }
  v.decision = Decision::inconclusive;
  return finish(v);
}

double vanishing_residual(const OperatorSpec& op, const Vector& lambda, const Plane& sigma) {
  if (sigma.is_zero()) return 0.0;
  const OperatorSpec b = restrict_to_plane(op, sigma);
  const double scale = op.coefficient_scale();
  double worst = 0.0;
  for (const auto& [beta, B] : b.terms()) worst = std::max(worst, (B * lambda).norm());
  return scale > 0.0 ? worst / scale : worst;
}

bool vanishes_on_subspace(const OperatorSpec& op, const Vector& lambda, const Plane& sigma, double tol) {
  if (lambda.size() != op.m()) throw InputError("vanishes_on_subspace: lambda has the wrong length");
  return vanishing_residual(op, lambda, sigma) < tol;
}

Matrix admissible_polar_set(const OperatorSpec& op, const Plane& pi, double tol) {
  if (pi.ambient() != op.d()) throw InputError("admissible_polar_set: plane lives in the wrong ambient space");
  if (pi.dimension() == op.d()) return Matrix::Identity(op.m(), op.m());
  const Plane sigma = orthogonal_complement(pi);
  const OperatorSpec b = restrict_to_plane(op, sigma);
  return null_space_ref(stacked_principal_coefficients(b), tol, op.coefficient_scale());
}

// ---------------------------------------------------------------------------
// N^l membership

namespace {

long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Sample points on S^{q-1} unisolvent (generically) for binary/ternary forms
// of degree k: equally spaced lines for q = 2, a fixed pseudo-random set
// otherwise.
std::vector<Vector> form_samples(int q, int k) {
  std::vector<Vector> out;
  if (q == 1) return {Vector::Constant(1, 1.0)};
  if (q == 2) {
    const int s = k + 2;
    for (int i = 0; i < s; ++i) {
      const double t = std::numbers::pi * (i + 0.5) / s;
      Vector u(2);
      u << std::cos(t), std::sin(t);
      out.push_back(u);
    }
    return out;
  }
  const long s = 2 * binomial(k + q - 1, q - 1) + 2;
  std::mt19937_64 rng(977 + static_cast<std::uint64_t>(q) * 131 + static_cast<std::uint64_t>(k));
  for (long i = 0; i < s; ++i) out.push_back(uniform_direction(q, rng));
  return out;
}

// residual(B) = [A^k(B eta_s) lambda]_s for a d x q frame B (column-major).
struct FrameResidual {
  const AppliedSymbol* a;
  std::vector<Vector> etas;
  int d, q;

  Vector value(const Vector& x) const {
    Eigen::Map<const Matrix> B(x.data(), d, q);
    Vector r(static_cast<Eigen::Index>(etas.size()) * a->n());
    for (std::size_t s = 0; s < etas.size(); ++s) {
      r.segment(static_cast<Eigen::Index>(s) * a->n(), a->n()) = a->value(B * etas[s]);
    }
    return r;
  }

  Matrix jacobian(const Vector& x) const {
    Eigen::Map<const Matrix> B(x.data(), d, q);
    const int n = a->n();
    Matrix J = Matrix::Zero(static_cast<Eigen::Index>(etas.size()) * n, d * q);
    for (std::size_t s = 0; s < etas.size(); ++s) {
      const Matrix Js = a->jacobian(B * etas[s]);
      for (int j = 0; j < q; ++j) {
        J.block(static_cast<Eigen::Index>(s) * n, j * d, n, d) = Js * etas[s][j];
      }
    }
    return J;
  }
};

std::optional<Plane> frame_descent(const FrameResidual& fr, const Matrix& start, int iterations, const OperatorSpec& op,
                                   const Vector& lambda) {
  LMProblem p;
  p.residual = [&fr](const Vector& x) { return fr.value(x); };
  p.jacobian = [&fr](const Vector& x) { return fr.jacobian(x); };
  const int d = fr.d, q = fr.q;
  p.retract = [d, q](const Vector& x) { return retract_stiefel_blocks(x, {{d, q}}); };
  Vector x0 = Eigen::Map<const Vector>(start.data(), start.size());
  const auto r = levenberg_marquardt(p, x0, iterations);
  Matrix B = Eigen::Map<const Matrix>(r.x.data(), d, q);
  if (!B.allFinite()) return std::nullopt;
  Plane sigma(qr_orthonormalize(B));
  if (vanishes_on_subspace(op, lambda, sigma)) return sigma;
  // Snap each column toward small rationals; exact witnesses survive this.
  Matrix S = B;
  for (int j = 0; j < q; ++j) S.col(j) = snap_direction(B.col(j));
  Eigen::JacobiSVD<Matrix> svd(S);
  if (svd.singularValues()[q - 1] > 1e-6) {
    Plane snapped = Plane::span_of(S);
    if (vanishes_on_subspace(op, lambda, snapped)) return snapped;
  }
  return std::nullopt;
}

// Multi-start frame search for sigma of dimension q with exact vanishing.
std::optional<Plane> search_vanishing_space(const OperatorSpec& op, const Vector& lambda, int q,
                                            const ConeConfig& cfg, const std::optional<Vector>& hint) {
  const int d = op.d();
  const AppliedSymbol a(op, lambda);
  FrameResidual fr{&a, form_samples(q, op.k()), d, q};
  auto rng = stream(cfg, lambda_tag(lambda) ^ 0x5eedULL ^ static_cast<std::uint64_t>(q));

  // Zero directions of the symbol, used to seed frames.
  std::vector<Vector> zeros;
  std::vector<Vector> starts = probes_for(d);
  if (hint) starts.insert(starts.begin(), *hint);
  for (auto& x : quasi_uniform_sphere(d, 16)) starts.push_back(std::move(x));
  const double thr = zero_threshold(op, cfg);
  for (const Vector& s : starts) {
    auto r = sphere_descent([&a](const Vector& y) { return a.value(y); },
                            [&a](const Vector& y) { return a.jacobian(y); }, s, cfg.descent_iterations);
    if (r.residual_norm > 1e3 * thr) continue;
    bool fresh = true;
    for (const auto& z : zeros) fresh = fresh && std::abs(z.dot(r.x)) < 1 - 1e-6;
    if (fresh) zeros.push_back(r.x);
    if (zeros.size() >= 8) break;
  }

  std::vector<Matrix> seeds;
  // frames through pairs/tuples of zero directions
  if (static_cast<int>(zeros.size()) >= q) {
    for (std::size_t i = 0; i + 1 < zeros.size() && seeds.size() < 12; ++i) {
      for (std::size_t j = i + 1; j < zeros.size() && seeds.size() < 12; ++j) {
        Matrix B(d, q);
        B.col(0) = zeros[i];
        B.col(1) = zeros[j];
        for (int c = 2; c < q; ++c) B.col(c) = zeros[(j + static_cast<std::size_t>(c)) % zeros.size()];
        seeds.push_back(B);
      }
    }
  }
  for (const auto& z : zeros) {
    if (seeds.size() >= 16) break;
    Matrix B(d, q);
    B.col(0) = z;
    for (int c = 1; c < q; ++c) B.col(c) = uniform_direction(d, rng);
    seeds.push_back(B);
  }
  const int random_seeds = std::max(4, cfg.plane_budget / 4);
  for (int i = 0; i < random_seeds; ++i) seeds.push_back(uniform_plane(q, d, rng).basis());

  for (const Matrix& s : seeds) {
    Eigen::JacobiSVD<Matrix> svd(s);
    if (svd.singularValues()[q - 1] < 1e-8) continue;
    if (auto sigma = frame_descent(fr, qr_orthonormalize(s), cfg.descent_iterations, op, lambda)) return sigma;
  }
  return std::nullopt;
}

// Branch and bound over normals nu of hyperplanes sigma = nu^perp for
// G(nu) = |[A^k(xi_s) lambda]_s|, xi_s = B_nu u_s sampled on sigma.
SphereSearchResult hyperplane_vanishing_search(const OperatorSpec& op, const Vector& lambda, const ConeConfig& cfg) {
  const int d = op.d();
  const AppliedSymbol a(op, lambda);
  const VariationBound vb = applied_variation(op, lambda);
  const auto us = form_samples(d - 1, op.k());
  auto frame = [d](const Vector& nu) { return orthogonal_complement(Plane(nu.normalized())).basis(); };
  auto value = [&, frame](const Vector& nu) {
    const Matrix B = frame(nu);
    double s = 0.0;
    for (const auto& u : us) s += a.value(B * u).squaredNorm();
    return std::sqrt(s);
  };
  CellEvaluator eval = [&, frame](const Vector& nu, double r) {
    const Matrix B = frame(nu);
    double s = 0.0, var = 0.0;
    for (const auto& u : us) {
      const Vector xi = B * u;
      s += a.value(xi).squaredNorm();
      const double dv = vb(xi, r);
      var += dv * dv;
    }
    const double val = std::sqrt(s);
    return CellEstimate{val, r > 0.0 ? val - std::sqrt(var) : val};
  };
  SphereSearchOptions o;
  o.zero_threshold = zero_threshold(op, cfg);
  o.positive_threshold = o.zero_threshold;
  o.max_cells = cfg.max_cells * 4;
  o.probes = probes_for(d);
  o.objective = value;
  return sphere_branch_and_bound(d, eval, o);
}

}  // namespace

ConeVerdict n_cone_member(const OperatorSpec& op, const Vector& lambda_in, int l, const ConeConfig& cfg) {
  const int d = op.d();
  if (l < 0 || l > d - 1) {
    std::ostringstream os;
    os << "n_cone_member: l must lie in [0, " << d - 1 << "], got " << l;
    throw InputError(os.str());
  }
  std::vector<std::string> warnings;
  const Vector lambda = require_unit(lambda_in, op.m(), &warnings);
  const int q = d - l;
  auto finish = [&warnings](ConeVerdict v) {
    v.notes.insert(v.notes.begin(), warnings.begin(), warnings.end());
    return v;
  };
  auto member_with = [&](const Plane& sigma, Method method, const std::string& note) {
    ConeVerdict v;
    v.decision = Decision::member;
    v.method = method;
    v.normal_space = sigma;
    v.plane = orthogonal_complement(sigma);
    v.margin = vanishing_residual(op, lambda, sigma) * op.coefficient_scale();
    if (v.margin == 0.0 && method == Method::search) v.method = Method::exact_algebra;
    if (!note.empty()) v.notes.push_back(note);
    return finish(v);
  };

  if (in_common_kernel(op, lambda)) {
    return member_with(Plane::first_coordinates(d, q), Method::exact_algebra,
                       "lambda lies in the common kernel, which equals N^0");
  }
  if (l == 0) {
    ConeVerdict v;
    v.decision = Decision::non_member;
    v.method = Method::exact_algebra;
    v.margin = annihilation_residual(op, lambda) * op.coefficient_scale();
    v.notes.push_back("N^0 is the common kernel and lambda is not in it");
    return finish(v);
  }
  if (cfg.use_closed_form && has_closed_form(op)) {
    const auto ans = closed_form_n(op, lambda, l, cfg.tol_rank);
    if (ans && ans->decision == Decision::member && ans->normal_space) {
      return member_with(*ans->normal_space, Method::closed_form, ans->rule);
    }
    if (ans && ans->decision == Decision::non_member) {
      ConeVerdict v;
      v.decision = Decision::non_member;
      v.method = Method::closed_form;
      v.notes.push_back(ans->rule);
      return finish(v);
    }
  }

  const ConeVerdict wave = wavecone_member(op, lambda, cfg);
  if (wave.decision == Decision::non_member) {
    ConeVerdict v;
    v.decision = Decision::non_member;
    v.margin = wave.margin;
    v.certified_bound = wave.certified_bound;
    v.direction = wave.direction;
    v.notes.push_back("lambda lies outside the wave cone, which contains N^l");
    return finish(v);
  }

  if (q == 1) {
    if (wave.decision == Decision::member && wave.direction) {
      Vector xi = *wave.direction;
      if (!vanishes_on_subspace(op, lambda, Plane(xi))) {
        const AppliedSymbol a(op, lambda);
        auto r = sphere_descent([&a](const Vector& y) { return a.value(y); },
                                [&a](const Vector& y) { return a.jacobian(y); }, xi, 4 * cfg.descent_iterations);
        xi = r.x;
        const Vector s = snap_direction(xi);
        if (a.norm(s) <= a.norm(xi)) xi = s;
      }
      if (vanishes_on_subspace(op, lambda, Plane(xi))) {
        return member_with(Plane(xi), Method::search, "N^{d-1} equals the wave cone");
      }
    }
    ConeVerdict v;
    v.decision = Decision::inconclusive;
    v.margin = wave.margin;
    v.notes.push_back("no direction with exact vanishing was certified");
    return finish(v);
  }

  if (wave.decision == Decision::member) {
    if (auto sigma = search_vanishing_space(op, lambda, q, cfg, wave.direction)) {
      return member_with(*sigma, Method::search, "vanishing subspace found by frame descent");
    }
  }

  const ConeVerdict up = ell_wavecone_member(op, lambda, l + 1, cfg);
  if (up.decision == Decision::non_member) {
    ConeVerdict v;
    v.decision = Decision::non_member;
    v.margin = up.margin;
    v.certified_bound = up.certified_bound;
    v.plane = up.plane;
    std::ostringstream os;
    os << "lambda is outside Lambda^" << l + 1 << ", which contains N^" << l << " (plane witness of dimension " << l + 1
       << ")";
    v.notes.push_back(os.str());
    return finish(v);
  }

  if (q == d - 1) {
    const auto s = hyperplane_vanishing_search(op, lambda, cfg);
    if (s.status == SearchStatus::certified_positive) {
      ConeVerdict v;
      v.decision = Decision::non_member;
      v.margin = s.best_value;
      v.certified_bound = s.lower_bound;
      v.notes.push_back("no hyperplane carries exact vanishing (certified over all normals)");
      return finish(v);
    }
    if (s.status == SearchStatus::zero_found) {
      const Plane sigma = orthogonal_complement(Plane(s.best_point.normalized()));
      if (vanishes_on_subspace(op, lambda, sigma)) {
        return member_with(sigma, Method::search, "vanishing hyperplane found over the normal sphere");
      }
      const AppliedSymbol a(op, lambda);
      FrameResidual fr{&a, form_samples(q, op.k()), d, q};
      if (auto refined = frame_descent(fr, sigma.basis(), 4 * cfg.descent_iterations, op, lambda)) {
        return member_with(*refined, Method::search, "vanishing hyperplane found over the normal sphere");
      }
    }
  }

  ConeVerdict v;
  v.decision = Decision::inconclusive;
  v.margin = wave.margin;
  v.notes.push_back("neither a vanishing subspace nor a certificate of absence was found");
  return finish(v);
}

// ---------------------------------------------------------------------------
// Triviality of whole cones

namespace {

struct CharSearch {
  SphereSearchResult result;
  std::optional<Vector> xi;
  std::optional<Vector> lambda;
};

// LM on (xi, v) in S^{d-1} x S^{m-1} for A^k(xi) v = 0.
std::pair<Vector, Vector> kernel_pair_descent(const PrincipalSymbol& sym, const Vector& xi0, const Vector& v0,
                                              int iterations) {
  const int d = sym.d(), m = sym.m();
  LMProblem p;
  p.residual = [&sym, d, m](const Vector& x) -> Vector { return sym(x.head(d)) * x.tail(m); };
  p.retract = [d, m](const Vector& x) { return retract_stiefel_blocks(x, {{d, 1}, {m, 1}}); };
  Vector x0(d + m);
  x0 << xi0, v0;
  const auto r = levenberg_marquardt(p, x0, iterations);
  return {r.x.head(d), r.x.tail(m)};
}

Vector smallest_right_singular(const Matrix& s) {
  Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeFullV);
  return svd.matrixV().col(s.cols() - 1);
}

// Characteristic directions: kappa(A^k(xi)) = 0.
CharSearch characteristic_search(const OperatorSpec& op, const ConeConfig& cfg) {
  CharSearch out;
  const PrincipalSymbol sym(op);
  const double thr = zero_threshold(op, cfg);
  auto f = [&sym](const Vector& x) { return kappa(sym(x)); };
  SphereSearchOptions o;
  o.zero_threshold = thr;
  o.positive_threshold = thr;
  o.max_cells = cfg.max_cells;
  o.probes = probes_for(op.d());
  o.objective = f;
  const int iters = cfg.descent_iterations;
  o.refine = [&sym, f, iters](const Vector& x) {
    auto [xi, v] = kernel_pair_descent(sym, x, smallest_right_singular(sym(x)), iters);
    const Vector s = snap_direction(xi);
    return f(s) <= f(xi) ? s : xi;
  };
  out.result = sphere_branch_and_bound(op.d(), lipschitz_cells(f, symbol_variation(op)), o);
  if (out.result.status == SearchStatus::zero_found) {
    out.xi = out.result.best_point;
    out.lambda = smallest_right_singular(sym(*out.xi)).normalized();
  }
  return out;
}

bool same_line(const Vector& a, const Vector& b) { return std::abs(a.dot(b)) > 1 - 1e-9; }

void push_unique(std::vector<Vector>& list, const Vector& v) {
  if (!(v.norm() > 0.0)) return;
  const Vector u = v.normalized();
  for (const auto& w : list) {
    if (same_line(u, w)) return;
  }
  list.push_back(u);
}

// Candidate elements of Lambda^l: null vectors at characteristic directions,
// then a grid on S^{m-1}, then random vectors.
std::vector<Vector> lambda_candidates(const OperatorSpec& op, const CharSearch& cs, const ConeConfig& cfg) {
  const int d = op.d(), m = op.m();
  const PrincipalSymbol sym(op);
  std::vector<Vector> out;
  if (cs.lambda) push_unique(out, *cs.lambda);
  const double thr = zero_threshold(op, cfg);
  std::vector<Vector> starts = probes_for(d);
  for (auto& x : quasi_uniform_sphere(d, 24)) starts.push_back(std::move(x));
  for (const Vector& s : starts) {
    if (static_cast<int>(out.size()) >= cfg.lambda_budget / 2) break;
    const Matrix S = sym(s);
    if (kappa(S) < thr) {
      push_unique(out, smallest_right_singular(S));
      continue;
    }
    auto [xi, v] = kernel_pair_descent(sym, s, smallest_right_singular(S), cfg.descent_iterations);
    if ((sym(xi) * v).norm() < thr) push_unique(out, v);
  }
  if (m <= 3) {
    for (const auto& v : projective_grid(m, 4)) push_unique(out, v);
  }
  auto rng = stream(cfg, 0xca7dULL);
  for (int t = 0; t < 4 * cfg.lambda_budget && static_cast<int>(out.size()) < cfg.lambda_budget; ++t) {
    push_unique(out, uniform_direction(m, rng));
  }
  if (static_cast<int>(out.size()) > cfg.lambda_budget) out.resize(static_cast<std::size_t>(cfg.lambda_budget));
  return out;
}

TrivialityVerdict found(const Vector& lambda, std::optional<ConeVerdict> evidence, Method method, std::string note) {
  TrivialityVerdict t;
  t.status = Triviality::found_nontrivial;
  t.lambda = lambda;
  t.evidence = std::move(evidence);
  t.method = method;
  t.note = std::move(note);
  return t;
}

TrivialityVerdict confirmed(Method method, double margin, std::string note) {
  TrivialityVerdict t;
  t.status = Triviality::confirmed_trivial;
  t.method = method;
  t.margin = margin;
  t.note = std::move(note);
  return t;
}

TrivialityVerdict inconclusive(std::string note) {
  TrivialityVerdict t;
  t.note = std::move(note);
  return t;
}

// Certifies Lambda^l = {0} by branch and bound over lambda in RP^{m-1}: each
// cell needs a plane whose restriction is elliptic at the center with margin
// exceeding L |lambda - center|, L = sum ||A_alpha||.
TrivialityVerdict certify_lambda_sphere(const OperatorSpec& op, int l, const ConeConfig& cfg) {
  const int d = op.d(), m = op.m();
  const double thr = zero_threshold(op, cfg);
  const double L = op.symbol_bound();
  std::vector<Plane> grid = plane_grid(l, d, std::max(4, cfg.resolution / 2));
  auto rng = stream(cfg, 0x1a4bdaULL + static_cast<std::uint64_t>(l));
  for (auto& p : random_planes(l, d, cfg.plane_budget / 2, rng)) grid.push_back(std::move(p));
  std::vector<Plane> cache;
  ConeConfig inner = cfg;
  inner.max_cells = std::max<long>(2000, cfg.max_cells / 8);

  CellEvaluator eval = [&](const Vector& lam, double r) {
    double best = 0.0;
    const double need = thr + L * r;
    auto try_plane = [&](const Plane& p) {
      const auto re = restricted_elliptic(op, lam, p, inner);
      if (re.elliptic && re.margin > best) best = re.margin;
      return re.elliptic;
    };
    for (std::size_t i = 0; i < cache.size() && i < 4; ++i) {
      if (try_plane(cache[i]) && best > need) {
        std::rotate(cache.begin(), cache.begin() + static_cast<long>(i), cache.begin() + static_cast<long>(i) + 1);
        return CellEstimate{best, best - L * r};
      }
    }
    const AppliedSymbol a(op, lam);
    const auto est = screen_planes(a, grid, kScreenResolution, Execution::serial);
    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&est](std::size_t x, std::size_t y) { return est[x] > est[y]; });
    for (std::size_t t = 0; t < std::min<std::size_t>(3, order.size()); ++t) {
      if (est[order[t]] <= thr) break;
      const double before = best;
      try_plane(grid[order[t]]);
      if (best > before) {
        cache.insert(cache.begin(), grid[order[t]]);
        if (cache.size() > 16) cache.pop_back();
      }
      if (best > need) break;
    }
    return CellEstimate{best, best - L * r};
  };

  SphereSearchOptions o;
  o.zero_threshold = thr;
  o.positive_threshold = thr;
  o.max_cells = std::max<long>(64, cfg.max_cells / 10);
  o.initial_splits = 6;
  const auto s = sphere_branch_and_bound(m, eval, o);
  if (s.status == SearchStatus::certified_positive) {
    std::ostringstream os;
    os << "every lambda on the unit sphere has an elliptic " << l << "-plane restriction (certified over "
       << s.cells << " cells)";
    return confirmed(Method::search, s.lower_bound, os.str());
  }
  if (s.status == SearchStatus::zero_found) {
    const auto v = ell_wavecone_member(op, s.best_point, l, cfg);
    if (v.decision == Decision::member) {
      return found(s.best_point, v, Method::search, "lambda without an elliptic plane restriction");
    }
    return inconclusive("a polar without a certified elliptic plane was found but its membership is undecided");
  }
  return inconclusive("polar sphere certification exhausted its cell budget");
}

}  // namespace

TrivialityVerdict lambda_ell_trivial(const OperatorSpec& op, int l, const ConeConfig& cfg) {
  const int d = op.d();
  if (l < 1 || l > d) {
    std::ostringstream os;
    os << "lambda_ell_trivial: l must lie in [1, " << d << "], got " << l;
    throw InputError(os.str());
  }
  const Matrix K = common_kernel(op, cfg.tol_rank);
  if (l == 1) {
    if (K.cols() == 0) return confirmed(Method::exact_algebra, 0.0, "the top-order coefficients have no common kernel");
    return found(K.col(0), std::nullopt, Method::exact_algebra, "common kernel of the top-order coefficients");
  }
  if (cfg.use_closed_form && has_closed_form(op)) {
    if (auto cf = closed_form_lambda_trivial(op, l)) {
      if (cf->status == Triviality::confirmed_trivial) return confirmed(Method::closed_form, 0.0, cf->rule);
      auto ev = ell_wavecone_member(op, *cf->lambda, l, cfg);
      return found(*cf->lambda, ev, Method::closed_form, cf->rule);
    }
  }
  if (K.cols() > 0) {
    return found(K.col(0), std::nullopt, Method::exact_algebra, "the common kernel lies in every Lambda^l");
  }

  const CharSearch cs = characteristic_search(op, cfg);
  if (cs.result.status == SearchStatus::certified_positive) {
    return confirmed(Method::search, cs.result.lower_bound, "elliptic symbol: Lambda = {0}, hence Lambda^l = {0}");
  }
  if (l == d) {
    if (cs.lambda) {
      auto v = wavecone_member(op, *cs.lambda, cfg);
      if (v.decision == Decision::member) return found(*cs.lambda, v, Method::search, "null vector at a characteristic direction");
    }
    return inconclusive("no characteristic direction certified");
  }

  const auto cands = lambda_candidates(op, cs, cfg);
  for (const auto& lam : cands) {
    auto v = ell_wavecone_member(op, lam, l, cfg);
    if (v.decision == Decision::member) return found(lam, v, v.method, "polar whose plane restrictions all degenerate");
  }
  if (op.m() == 1) {
    const auto v = ell_wavecone_member(op, Vector::Constant(1, 1.0), l, cfg);
    if (v.decision == Decision::non_member) {
      return confirmed(Method::search, v.certified_bound, "scalar symbol with an elliptic plane restriction");
    }
    return inconclusive("scalar polar undecided");
  }
  if (op.m() <= 3 && plane_grid_supported(l, d)) return certify_lambda_sphere(op, l, cfg);
  return inconclusive("no member found; certification over the polar sphere needs m <= 3");
}

namespace {

// Certifies or refutes N^{d-1-...}: branch and bound over hyperplane normals
// for kappa of the stacked symbols sampled on nu^perp.
SphereSearchResult hyperplane_kernel_search(const OperatorSpec& op, const ConeConfig& cfg) {
  const int d = op.d();
  const PrincipalSymbol sym(op);
  const VariationBound vb = symbol_variation(op);
  const auto us = form_samples(d - 1, op.k());
  const int n = op.n(), m = op.m();
  auto stacked = [&](const Matrix& B) {
    Matrix M(static_cast<Eigen::Index>(us.size()) * n, m);
    for (std::size_t s = 0; s < us.size(); ++s) M.middleRows(static_cast<Eigen::Index>(s) * n, n) = sym(B * us[s]);
    return M;
  };
  auto frame = [](const Vector& nu) { return orthogonal_complement(Plane(nu.normalized())).basis(); };
  auto value = [&, frame](const Vector& nu) { return kappa(stacked(frame(nu))); };
  CellEvaluator eval = [&, frame](const Vector& nu, double r) {
    const Matrix B = frame(nu);
    const double val = kappa(stacked(B));
    if (!(r > 0.0)) return CellEstimate{val, val};
    double var = 0.0;
    for (const auto& u : us) {
      const double dv = vb(B * u, r);
      var += dv * dv;
    }
    return CellEstimate{val, val - std::sqrt(var)};
  };
  SphereSearchOptions o;
  o.zero_threshold = zero_threshold(op, cfg);
  o.positive_threshold = o.zero_threshold;
  o.max_cells = cfg.max_cells * 10;
  o.initial_splits = 8;
  o.probes = probes_for(d);
  o.objective = value;
  return sphere_branch_and_bound(d, eval, o);
}

}  // namespace

TrivialityVerdict n_ell_trivial(const OperatorSpec& op, int l, const ConeConfig& cfg) {
  const int d = op.d();
  if (l < 0 || l > d - 1) {
    std::ostringstream os;
    os << "n_ell_trivial: l must lie in [0, " << d - 1 << "], got " << l;
    throw InputError(os.str());
  }
  const Matrix K = common_kernel(op, cfg.tol_rank);
  const int q = d - l;
  if (l == 0) {
    if (K.cols() == 0) return confirmed(Method::exact_algebra, 0.0, "N^0 is the common kernel, which is trivial");
    return found(K.col(0), std::nullopt, Method::exact_algebra, "N^0 is the common kernel");
  }
  auto member_evidence = [&](const Vector& lam) { return n_cone_member(op, lam.normalized(), l, cfg); };
  if (cfg.use_closed_form && has_closed_form(op)) {
    if (auto cf = closed_form_n_trivial(op, l)) {
      if (cf->status == Triviality::confirmed_trivial) return confirmed(Method::closed_form, 0.0, cf->rule);
      return found(*cf->lambda, member_evidence(*cf->lambda), Method::closed_form, cf->rule);
    }
  }
  if (K.cols() > 0) return found(K.col(0), std::nullopt, Method::exact_algebra, "the common kernel lies in every N^l");

  if (q == 1) {
    const CharSearch cs = characteristic_search(op, cfg);
    if (cs.result.status == SearchStatus::certified_positive) {
      return confirmed(Method::search, cs.result.lower_bound, "elliptic symbol: N^{d-1} = Lambda = {0}");
    }
    if (cs.lambda) {
      auto v = member_evidence(*cs.lambda);
      if (v.decision == Decision::member) return found(*cs.lambda, v, Method::search, "null vector at a characteristic direction");
    }
    return inconclusive("no characteristic direction with exact vanishing was certified");
  }
  if (q == d - 1) {
    const auto s = hyperplane_kernel_search(op, cfg);
    if (s.status == SearchStatus::certified_positive) {
      return confirmed(Method::search, s.lower_bound,
                       "no hyperplane carries a common kernel of the symbol (certified over all normals)");
    }
    if (s.status == SearchStatus::zero_found) {
      const Plane pi(s.best_point.normalized());
      const Matrix adm = admissible_polar_set(op, pi, 1e-8);
      if (adm.cols() > 0) {
        const Vector lam = adm.col(0);
        auto v = member_evidence(lam);
        if (v.decision == Decision::member) return found(lam, v, Method::search, "hyperplane with a common kernel");
      }
    }
    return inconclusive("hyperplane search undecided");
  }
  return inconclusive("no certification route for this (l, d); inclusions may still decide it");
}

// ---------------------------------------------------------------------------
// Dimension profiles

namespace {

TrivialityVerdict implied(Triviality status, const std::optional<Vector>& lambda, const std::string& note) {
  TrivialityVerdict t;
  t.status = status;
  t.lambda = lambda;
  t.implied = true;
  t.method = Method::exact_algebra;
  t.note = note;
  return t;
}

}  // namespace

ConeProfile compute_cone_profile(const OperatorSpec& op_in, const ConeConfig& cfg) {
  const OperatorSpec op = op_in.principal_part();
  const int d = op.d();
  std::vector<std::optional<TrivialityVerdict>> lam(static_cast<std::size_t>(d + 1));  // index l = 1..d
  std::vector<std::optional<TrivialityVerdict>> nn(static_cast<std::size_t>(d));       // index l = 0..d-1

  // Lambda chain, ascending; the first nontrivial level ends the search.
  int first_found = -1;
  for (int l = 1; l <= d; ++l) {
    lam[l] = lambda_ell_trivial(op, l, cfg);
    if (lam[l]->status == Triviality::found_nontrivial) {
      first_found = l;
      break;
    }
  }
  if (first_found > 0) {
    for (int l = first_found + 1; l <= d; ++l) {
      std::ostringstream os;
      os << "Lambda^" << first_found << " c Lambda^" << l;
      lam[l] = implied(Triviality::found_nontrivial, lam[first_found]->lambda, os.str());
    }
  }
  for (int l = d; l >= 1; --l) {
    if (lam[l] && lam[l]->status == Triviality::confirmed_trivial) {
      for (int j = 1; j < l; ++j) {
        if (lam[j]->status == Triviality::inconclusive) {
          std::ostringstream os;
          os << "Lambda^" << j << " c Lambda^" << l;
          lam[j] = implied(Triviality::confirmed_trivial, std::nullopt, os.str());
        }
      }
      break;
    }
  }

  // N chain, ascending, using N^0 = Lambda^1, N^{d-1} = Lambda^d and
  // N^l c Lambda^{l+1}.
  int n_found = -1;
  for (int l = 0; l <= d - 1; ++l) {
    if (l == 0 && lam[1]) {
      nn[0] = *lam[1];
      nn[0]->implied = true;
      nn[0]->note = "N^0 = Lambda^1: " + nn[0]->note;
    } else if (lam[l + 1] && lam[l + 1]->status == Triviality::confirmed_trivial) {
      std::ostringstream os;
      os << "N^" << l << " c Lambda^" << l + 1;
      nn[l] = implied(Triviality::confirmed_trivial, std::nullopt, os.str());
    } else {
      nn[l] = n_ell_trivial(op, l, cfg);
      if (nn[l]->status == Triviality::inconclusive && l == d - 1 && lam[d] &&
          lam[d]->status != Triviality::inconclusive) {
        nn[l] = implied(lam[d]->status, lam[d]->lambda, "N^{d-1} = Lambda^d");
      }
    }
    if (nn[l]->status == Triviality::found_nontrivial) {
      n_found = l;
      break;
    }
  }
  if (n_found >= 0) {
    for (int l = n_found + 1; l <= d - 1; ++l) {
      std::ostringstream os;
      os << "N^" << n_found << " c N^" << l;
      nn[l] = implied(Triviality::found_nontrivial, nn[n_found]->lambda, os.str());
    }
    // N^l c Lambda^{l+1} also settles Lambda levels left open.
    for (int l = n_found + 1; l <= d; ++l) {
      if (!lam[l] || lam[l]->status == Triviality::inconclusive) {
        std::ostringstream os;
        os << "N^" << n_found << " c Lambda^" << n_found + 1 << " c Lambda^" << l;
        lam[l] = implied(Triviality::found_nontrivial, nn[n_found]->lambda, os.str());
      }
    }
  }
  for (int l = d - 1; l >= 0; --l) {
    if (nn[l] && nn[l]->status == Triviality::confirmed_trivial) {
      for (int j = 0; j < l; ++j) {
        if (nn[j] && nn[j]->status == Triviality::inconclusive) {
          std::ostringstream os;
          os << "N^" << j << " c N^" << l;
          nn[j] = implied(Triviality::confirmed_trivial, std::nullopt, os.str());
        }
      }
      break;
    }
  }

  ConeProfile out;
  {
    int lower = 0, upper = d;
    for (int l = 1; l <= d; ++l) {
      if (!lam[l]) continue;
      if (lam[l]->status == Triviality::confirmed_trivial) lower = std::max(lower, l);
      if (lam[l]->status == Triviality::found_nontrivial) upper = std::min(upper, l - 1);
      out.ell_A.levels.push_back({l, *lam[l]});
    }
    out.ell_A.bracket = {lower, std::max(lower, upper), lower == upper};
  }
  {
    int lower = 0, upper = d;
    for (int l = 0; l <= d - 1; ++l) {
      if (!nn[l]) continue;
      if (nn[l]->status == Triviality::confirmed_trivial) lower = std::max(lower, l + 1);
      if (nn[l]->status == Triviality::found_nontrivial) upper = std::min(upper, l);
      out.ell_star.levels.push_back({l, *nn[l]});
    }
    out.ell_star.bracket = {lower, std::max(lower, upper), lower == upper};
  }
  return out;
}

DimensionProfile compute_ell_A(const OperatorSpec& op, const ConeConfig& cfg) {
  return compute_cone_profile(op, cfg).ell_A;
}

DimensionProfile compute_ell_star(const OperatorSpec& op, const ConeConfig& cfg) {
  return compute_cone_profile(op, cfg).ell_star;
}

// ---------------------------------------------------------------------------
// Constant rank

std::vector<Vector> quasi_uniform_sphere(int d, int count) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const int pairs = (d + 1) / 2;
  if (2 * pairs > 16) throw UnsupportedError("quasi_uniform_sphere: dimension above 16");
  auto halton = [](long i, int b) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= b;
      r += f * static_cast<double>(i % b);
      i /= b;
    }
    return r;
  };
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (long i = 1; static_cast<int>(out.size()) < count; ++i) {
    Vector g(2 * pairs);
    for (int p = 0; p < pairs; ++p) {
      const double u1 = halton(i, primes[2 * p]);
      const double u2 = halton(i, primes[2 * p + 1]);
      const double rad = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
      g[2 * p] = rad * std::cos(2 * std::numbers::pi * u2);
      g[2 * p + 1] = rad * std::sin(2 * std::numbers::pi * u2);
    }
    Vector x = g.head(d);
    if (x.norm() > 1e-12) out.push_back(x.normalized());
  }
  return out;
}

ConstantRankVerdict constant_rank_check(const OperatorSpec& op_in, const ConeConfig& cfg) {
  const OperatorSpec op = op_in.principal_part();
  const int d = op.d(), m = op.m();
  const PrincipalSymbol sym(op);
  std::vector<Vector> dirs = ternary_directions(d, d);
  for (auto& x : quasi_uniform_sphere(d, cfg.rank_samples)) dirs.push_back(std::move(x));
  const auto svs = symbol_singular_values(sym, dirs, cfg.execution);

  ConstantRankVerdict v;
  v.samples = static_cast<int>(dirs.size());
  for (const auto& s : svs) v.sphere_scale = std::max(v.sphere_scale, s.size() ? s[0] : 0.0);
  const double ref = v.sphere_scale;
  std::vector<int> ranks(svs.size());
  for (std::size_t i = 0; i < svs.size(); ++i) ranks[i] = numeric_rank(svs[i], cfg.tol_rank, ref);
  for (std::size_t i = 1; i < ranks.size(); ++i) {
    if (ranks[i] != ranks[0]) {
      v.status = RankStatus::fails;
      v.witness_a = dirs[0];
      v.rank_a = ranks[0];
      v.witness_b = dirs[i];
      v.rank_b = ranks[i];
      v.rank = std::max(ranks[0], ranks[i]);
      v.note = "sampled ranks differ";
      return v;
    }
  }
  const int r = ranks.empty() ? 0 : ranks[0];
  v.rank = r;
  v.rank_a = r;
  v.witness_a = dirs[0];
  if (r == 0) {
    v.status = RankStatus::holds;
    v.note = "symbol vanishes at every sample";
    return v;
  }

  // Search for a rank drop: sigma_r(A^k(xi)) = 0.
  const double thr = cfg.tol_rank * ref;
  auto f = [&sym, r](const Vector& x) {
    const Vector s = Eigen::JacobiSVD<Matrix>(sym(x)).singularValues();
    return s[r - 1];
  };
  const int w = m - r + 1;
  SphereSearchOptions o;
  o.zero_threshold = thr;
  o.positive_threshold = thr;
  o.max_cells = cfg.max_cells;
  o.probes = probes_for(d);
  o.objective = f;
  const int iters = cfg.descent_iterations;
  o.refine = [&sym, f, d, m, w, iters](const Vector& x) {
    Eigen::JacobiSVD<Matrix> svd(sym(x), Eigen::ComputeFullV);
    LMProblem p;
    p.residual = [&sym, d, m, w](const Vector& y) -> Vector {
      const Matrix V = Eigen::Map<const Matrix>(y.data() + d, m, w);
      const Matrix R = sym(y.head(d)) * V;
      return Eigen::Map<const Vector>(R.data(), R.size());
    };
    p.retract = [d, m, w](const Vector& y) { return retract_stiefel_blocks(y, {{d, 1}, {m, w}}); };
    Vector y0(d + m * w);
    y0.head(d) = x;
    const Matrix V0 = svd.matrixV().rightCols(w);
    y0.tail(m * w) = Eigen::Map<const Vector>(V0.data(), V0.size());
    const auto res = levenberg_marquardt(p, y0, iters);
    const Vector xi = res.x.head(d).normalized();
    const Vector s = snap_direction(xi);
    return f(s) <= f(xi) ? s : xi;
  };
  const auto s = sphere_branch_and_bound(d, lipschitz_cells(f, symbol_variation(op)), o);
  if (s.status == SearchStatus::zero_found) {
    v.status = RankStatus::fails;
    v.witness_b = s.best_point;
    v.rank_b = numeric_rank(Eigen::JacobiSVD<Matrix>(sym(s.best_point)).singularValues(), cfg.tol_rank, ref);
    v.note = "rank drops at a direction found by search";
    return v;
  }
  v.status = RankStatus::holds;
  v.sampled = true;
  if (s.status == SearchStatus::certified_positive) {
    v.certified_bound = s.lower_bound;
    v.note = "rank " + std::to_string(r) + " at every sample; no direction of lower rank (certified bound on sigma_r)";
  } else {
    v.note = "rank " + std::to_string(r) + " at every sample; the drop search was inconclusive";
  }
  return v;
}

}  // namespace wavecone
