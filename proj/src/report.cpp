#include "wavecone/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wavecone/kernels.hpp"
#include "wavecone/operator_io.hpp"

namespace wavecone {

using nlohmann::json;

namespace {

void dump_value(const ReportJson& v, std::string& out, int indent) {
  const std::string pad(indent + 2, ' ');
  switch (v.type()) {
    case ReportJson::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ReportJson(key).dump() + ": ";
        dump_value(item, out, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "}";
      return;
    }
    case ReportJson::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& item : v) flat = flat && !item.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump_value(v[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_value(v[i], out, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "]";
      return;
    }
    case ReportJson::value_t::number_float: {
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += v.dump();
  }
}

ReportJson vec_json(const Vector& v) {
  ReportJson a = ReportJson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector json_vec(const json& a) {
  if (!a.is_array()) throw InputError("report: expected a number list");
  Vector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

// Columns of a basis as a list of vectors.
ReportJson basis_json(const Matrix& b) {
  ReportJson a = ReportJson::array();
  for (Eigen::Index j = 0; j < b.cols(); ++j) a.push_back(vec_json(b.col(j)));
  return a;
}

Matrix json_basis(const json& a, int d) {
  if (!a.is_array()) throw InputError("report: expected a list of vectors");
  Matrix b(d, a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Vector v = json_vec(a[j]);
    if (v.size() != d) throw InputError("report: basis vector has the wrong length");
    b.col(j) = v;
  }
  return b;
}

ReportJson operator_summary(const OperatorSpec& op) {
  ReportJson o;
  o["spec"] = ReportJson::parse(operator_to_json(op).dump());
  o["d"] = op.d();
  o["m"] = op.m();
  o["n"] = op.n();
  o["k"] = op.k();
  o["homogeneous"] = op.homogeneous();
  return o;
}

double direction_value(const OperatorSpec& op, const Vector& lambda, const Vector& xi) {
  return (principal_symbol(op, xi.normalized()).matrix * lambda).norm();
}

double elliptic_value(const OperatorSpec& op, const Vector& lambda, const Plane& plane, const ConeConfig& cfg) {
  return restricted_elliptic(op, lambda, plane, cfg).margin;
}

int rank_value(const OperatorSpec& op, const Vector& xi, const ConeConfig& cfg, double scale) {
  const Matrix S = principal_symbol(op, xi.normalized()).matrix;
  return numeric_rank(Eigen::JacobiSVD<Matrix>(S).singularValues(), cfg.tol_rank, scale);
}

ReportJson witnesses_for(const OperatorSpec& op, const Vector& lambda, const ConeVerdict& v, const ConeConfig& cfg) {
  ReportJson w = ReportJson::array();
  if (v.direction) {
    w.push_back({{"kind", "direction"},
                 {"lambda", vec_json(lambda)},
                 {"direction", vec_json(*v.direction)},
                 {"value", direction_value(op, lambda, *v.direction)}});
  }
  if (v.normal_space) {
    w.push_back({{"kind", "vanishing_subspace"},
                 {"lambda", vec_json(lambda)},
                 {"basis", basis_json(v.normal_space->basis())},
                 {"value", vanishing_residual(op, lambda, *v.normal_space)}});
  }
  if (v.decision == Decision::non_member && v.plane) {
    w.push_back({{"kind", "elliptic_plane"},
                 {"lambda", vec_json(lambda)},
                 {"basis", basis_json(v.plane->basis())},
                 {"value", elliptic_value(op, lambda, *v.plane, cfg)}});
  }
  if (v.decision == Decision::member && v.method == Method::exact_algebra && !v.direction && !v.normal_space) {
    w.push_back({{"kind", "annihilation"}, {"lambda", vec_json(lambda)}, {"value", annihilation_residual(op, lambda)}});
  }
  return w;
}

ReportJson level_json(const OperatorSpec& op, const LevelVerdict& lv, const ConeConfig& cfg) {
  const TrivialityVerdict& t = lv.verdict;
  ReportJson o;
  o["level"] = lv.level;
  o["status"] = to_string(t.status);
  o["method"] = to_string(t.method);
  o["implied"] = t.implied;
  o["margin"] = t.margin;
  if (!t.note.empty()) o["note"] = t.note;
  if (t.lambda) {
    o["lambda"] = vec_json(*t.lambda);
    if (t.evidence) o["evidence"] = verdict_to_json(op, *t.lambda, *t.evidence, cfg);
  } else if (t.evidence && t.evidence->plane) {
    o["plane_hint"] = basis_json(t.evidence->plane->basis());
  }
  return o;
}

ReportJson profile_json(const OperatorSpec& op, const DimensionProfile& p, const ConeConfig& cfg) {
  ReportJson o;
  o["lower"] = p.bracket.lower;
  o["upper"] = p.bracket.upper;
  o["exact"] = p.bracket.exact;
  o["levels"] = ReportJson::array();
  for (const auto& lv : p.levels) o["levels"].push_back(level_json(op, lv, cfg));
  return o;
}

ReportJson rank_json(const OperatorSpec& op, const ConstantRankVerdict& r, const ConeConfig& cfg) {
  ReportJson o;
  o["status"] = to_string(r.status);
  o["sampled"] = r.sampled;
  o["samples"] = r.samples;
  o["rank"] = r.rank;
  o["certified_bound"] = r.certified_bound;
  o["sphere_scale"] = r.sphere_scale;
  if (!r.note.empty()) o["note"] = r.note;
  o["witnesses"] = ReportJson::array();
  for (const auto* xi : {&r.witness_a, &r.witness_b}) {
    if (!*xi) continue;
    o["witnesses"].push_back({{"kind", "rank"},
                              {"direction", vec_json(**xi)},
                              {"scale", r.sphere_scale},
                              {"value", rank_value(op, **xi, cfg, r.sphere_scale)}});
  }
  return o;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ReportJson header(const char* command) {
  ReportJson o;
  o["schema_version"] = kReportSchemaVersion;
  o["command"] = command;
  return o;
}

}  // namespace

std::string dump_report(const ReportJson& doc) {
  std::string out;
  dump_value(doc, out, 0);
  out += "\n";
  return out;
}

ReportJson config_to_json(const ConeConfig& cfg) {
  ReportJson o;
  o["tol_zero"] = cfg.tol_zero;
  o["tol_rank"] = cfg.tol_rank;
  o["plane_budget"] = cfg.plane_budget;
  o["lambda_budget"] = cfg.lambda_budget;
  o["resolution"] = cfg.resolution;
  o["seed"] = cfg.seed;
  o["max_cells"] = cfg.max_cells;
  o["descent_iterations"] = cfg.descent_iterations;
  o["use_closed_form"] = cfg.use_closed_form;
  o["rank_samples"] = cfg.rank_samples;
  return o;
}

ConeConfig config_from_json(const json& doc, ConeConfig cfg) {
  if (!doc.is_object()) throw InputError("config: expected a JSON object");
  auto num = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw InputError("config field '" + key + "': expected a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key, long long lo) {
    if (!v.is_number_integer() || v.get<long long>() < lo) {
      throw InputError("config field '" + key + "': expected an integer >= " + std::to_string(lo));
    }
    return v.get<long long>();
  };
  for (const auto& [key, v] : doc.items()) {
    if (key == "tol_zero") {
      cfg.tol_zero = num(v, key);
    } else if (key == "tol_rank") {
      cfg.tol_rank = num(v, key);
    } else if (key == "plane_budget") {
      cfg.plane_budget = static_cast<int>(integer(v, key, 0));
    } else if (key == "lambda_budget") {
      cfg.lambda_budget = static_cast<int>(integer(v, key, 1));
    } else if (key == "resolution") {
      cfg.resolution = static_cast<int>(integer(v, key, 2));
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw InputError("config field 'seed': expected a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "max_cells") {
      cfg.max_cells = static_cast<long>(integer(v, key, 1));
    } else if (key == "descent_iterations") {
      cfg.descent_iterations = static_cast<int>(integer(v, key, 1));
    } else if (key == "use_closed_form") {
      if (!v.is_boolean()) throw InputError("config field 'use_closed_form': expected true or false");
      cfg.use_closed_form = v.get<bool>();
    } else if (key == "rank_samples") {
      cfg.rank_samples = static_cast<int>(integer(v, key, 1));
    } else {
      throw InputError("config field '" + key + "': unknown");
    }
  }
  if (!(cfg.tol_zero > 0.0) || !(cfg.tol_rank > 0.0)) throw InputError("config: tolerances must be positive");
  return cfg;
}

ReportJson verdict_to_json(const OperatorSpec& op, const Vector& lambda, const ConeVerdict& v, const ConeConfig& cfg) {
  ReportJson o;
  o["decision"] = to_string(v.decision);
  o["method"] = to_string(v.method);
  o["margin"] = v.margin;
  o["certified_bound"] = v.certified_bound;
  if (v.direction) o["direction"] = vec_json(*v.direction);
  if (v.plane) o["plane"] = basis_json(v.plane->basis());
  if (v.normal_space) o["normal_space"] = basis_json(v.normal_space->basis());
  o["notes"] = v.notes;
  o["witnesses"] = witnesses_for(op, lambda, v, cfg);
  return o;
}

AnalyzeResult cmd_analyze(const OperatorSpec& op, const ConeConfig& cfg, bool timings) {
  const auto t0 = std::chrono::steady_clock::now();
  ReportJson r = header("analyze");
  r["operator"] = operator_summary(op);
  r["config"] = config_to_json(cfg);

  const Matrix l1 = common_kernel(op);
  r["cocanceling"] = {{"value", l1.cols() == 0}, {"lambda1_basis", basis_json(l1)}};
  const double t_cocancel = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const ConstantRankVerdict rank = constant_rank_check(op, cfg);
  r["constant_rank"] = rank_json(op, rank, cfg);
  const double t_rank = seconds_since(t1);

  const auto t2 = std::chrono::steady_clock::now();
  const ConeProfile profile = compute_cone_profile(op, cfg);
  r["ell_A"] = profile_json(op, profile.ell_A, cfg);
  r["ell_star"] = profile_json(op, profile.ell_star, cfg);
  const double t_profile = seconds_since(t2);

  const auto& a = profile.ell_A.bracket;
  const auto& s = profile.ell_star.bracket;
  r["consistency"] = {{"ell_A_lower_le_ell_star_upper", a.lower <= s.upper},
                      {"ell_A_le_ell_star", !(a.exact && s.exact) || a.lower <= s.lower}};
  if (timings) {
    r["timings"] = {{"cocanceling_s", t_cocancel},
                    {"constant_rank_s", t_rank},
                    {"cone_profile_s", t_profile},
                    {"total_s", seconds_since(t0)}};
  }
  return {r, a.exact && s.exact ? 0 : 2};
}

ConeSelector parse_cone_selector(const std::string& text) {
  if (text == "wave") return {ConeKind::wave, 0};
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos || (kind != "ell" && kind != "n")) {
    throw InputError("cone selector '" + text + "' must be wave, ell:<l> or n:<l>");
  }
  int level = 0;
  try {
    std::size_t used = 0;
    level = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw InputError("cone selector '" + text + "': level must be an integer");
  }
  return {kind == "ell" ? ConeKind::ell : ConeKind::n, level};
}

AnalyzeResult cmd_member(const OperatorSpec& op, const Vector& lambda_in, const ConeSelector& cone,
                         const ConeConfig& cfg) {
  if (lambda_in.size() != op.m()) {
    throw InputError("lambda has length " + std::to_string(lambda_in.size()) + ", expected " + std::to_string(op.m()));
  }
  if (!lambda_in.allFinite() || lambda_in.norm() == 0.0) throw InputError("lambda must be a nonzero finite vector");
  const Vector lambda = lambda_in.normalized();
  ConeVerdict v;
  std::string name;
  switch (cone.kind) {
    case ConeKind::wave:
      v = wavecone_member(op, lambda, cfg);
      name = "wave";
      break;
    case ConeKind::ell:
      v = ell_wavecone_member(op, lambda, cone.level, cfg);
      name = "ell:" + std::to_string(cone.level);
      break;
    case ConeKind::n:
      v = n_cone_member(op, lambda, cone.level, cfg);
      name = "n:" + std::to_string(cone.level);
      break;
  }
  ReportJson r = header("member");
  r["operator"] = operator_summary(op);
  r["config"] = config_to_json(cfg);
  r["cone"] = name;
  r["lambda"] = vec_json(lambda);
  r["verdict"] = verdict_to_json(op, lambda, v, cfg);
  return {r, v.decision == Decision::inconclusive ? 2 : 0};
}

namespace {

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const double x = std::stod(tok, &used);
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
      if (used != tok.size() || !std::isfinite(x)) throw std::invalid_argument(tok);
      out.push_back(x);
    } catch (const std::exception&) {
      throw InputError(std::string(what) + ": '" + tok + "' is not a number");
    }
  }
  if (out.empty()) throw InputError(std::string(what) + ": empty list");
  return out;
}

int unit_index(const std::string& tok, int size, const char* what) {
  if (tok.size() < 2 || tok[0] != 'e') throw InputError(std::string(what) + ": expected e<i>");
  int i = 0;
  try {
    std::size_t used = 0;
    i = std::stoi(tok.substr(1), &used);
    if (used != tok.size() - 1) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw InputError(std::string(what) + ": expected e<i>");
  }
  if (i < 1 || i > size) throw InputError(std::string(what) + ": index out of range in '" + tok + "'");
  return i - 1;
}

}  // namespace

Vector parse_lambda(const std::string& text, int m) {
  std::string t = text;
  for (const std::string tensor : {"⊗", "(x)"}) {
    for (auto p = t.find(tensor); p != std::string::npos; p = t.find(tensor)) t.replace(p, tensor.size(), "x");
  }
  if (!t.empty() && t[0] == 'e') {
    Vector v = Vector::Zero(m);
    const auto x = t.find('x');
    if (x == std::string::npos) {
      v(unit_index(t, m, "lambda")) = 1.0;
      return v;
    }
    const int c = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    if (c * c != m) throw InputError("lambda: outer products need m to be a square, got m = " + std::to_string(m));
    const int i = unit_index(t.substr(0, x), c, "lambda");
    const int j = unit_index(t.substr(x + 1), c, "lambda");
    v(i * c + j) = 1.0;
    return v;
  }
  const auto xs = parse_numbers(text, "lambda");
  if (static_cast<int>(xs.size()) != m) {
    throw InputError("lambda has " + std::to_string(xs.size()) + " entries, expected " + std::to_string(m));
  }
  return Eigen::Map<const Vector>(xs.data(), m);
}

Plane parse_plane_equation(const std::string& text, int d) {
  const auto eq = text.find('=');
  if (text.empty() || text[0] != 'x' || eq == std::string::npos || text.substr(eq + 1) != "0") {
    throw InputError("plane '" + text + "' must look like x<i>=0");
  }
  int axis = 0;
  try {
    std::size_t used = 0;
    axis = std::stoi(text.substr(1, eq - 1), &used) - 1;
    if (used != eq - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw InputError("plane '" + text + "' must look like x<i>=0");
  }
  if (axis < 0 || axis >= d) throw InputError("plane '" + text + "': axis out of range");
  std::vector<int> axes;
  for (int i = 0; i < d; ++i) {
    if (i != axis) axes.push_back(i);
  }
  return Plane::coordinate(d, axes);
}

Plane parse_plane_normal(const std::string& text, int d) {
  const auto xs = parse_numbers(text, "plane normal");
  if (static_cast<int>(xs.size()) != d) throw InputError("plane normal must have " + std::to_string(d) + " entries");
  const Vector nu = Eigen::Map<const Vector>(xs.data(), d);
  if (nu.norm() == 0.0) throw InputError("plane normal must be nonzero");
  Matrix b(d, 1);
  b.col(0) = nu.normalized();
  return orthogonal_complement(Plane(b));
}

Plane parse_plane_span(const std::string& text, int d) {
  std::vector<Vector> cols;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto xs = parse_numbers(item, "plane span");
    if (static_cast<int>(xs.size()) != d) throw InputError("plane span vectors must have " + std::to_string(d) + " entries");
    cols.push_back(Eigen::Map<const Vector>(xs.data(), d));
  }
  Matrix b(d, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) b.col(j) = cols[j];
  Eigen::JacobiSVD<Matrix> svd(b);
  if (cols.empty() || svd.singularValues().minCoeff() < 1e-10 * svd.singularValues().maxCoeff()) {
    throw InputError("plane span vectors must be linearly independent");
  }
  return Plane::span_of(b);
}

AnalyzeResult cmd_measure_check(const OperatorSpec& op, const MeasureCheckInput& input, double tol,
                                DerivativeSymbol symbol, bool timings) {
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteMeasure& mu = input.measure;
  const FourierResidual res = verify_afree_fft(op, mu, tol, symbol);
  ReportJson r = header("measure-check");
  r["operator"] = operator_summary(op);
  ReportJson m;
  m["source"] = input.source;
  m["kind"] = mu.kind() == MeasureKind::grid ? "grid" : "atomic";
  m["d"] = mu.d();
  m["m"] = mu.m();
  m["N"] = mu.N();
  m["total_variation"] = mu.total_variation();
  r["measure"] = m;
  if (input.plane) r["plane"] = basis_json(input.plane->basis());
  if (input.lambda) r["lambda"] = vec_json(*input.lambda);
  r["residual"] = {{"symbol", to_string(res.symbol)},
                   {"max", res.max_residual},
                   {"mean", res.mean_residual},
                   {"frequencies", res.frequencies},
                   {"worst_frequency", res.worst_frequency},
                   {"tol", res.tol}};
  r["pass"] = res.pass;
  if (timings) r["timings"] = {{"total_s", seconds_since(t0)}};
  return {r, res.pass ? 0 : 3};
}

ReportJson grid_oracle(const OperatorSpec& op, const Vector& lambda_in, int l, int resolution) {
  const int d = op.d();
  if (d > 3) throw UnsupportedError("grid-oracle: brute-force sweeps are limited to d <= 3");
  if (l < 1 || l > d) throw InputError("grid-oracle: l must lie in [1, d]");
  if (lambda_in.size() != op.m() || lambda_in.norm() == 0.0) throw InputError("grid-oracle: bad lambda");
  const Vector lambda = lambda_in.normalized();
  const AppliedSymbol symbol(op.principal_part(), lambda);
  const std::vector<Plane> planes =
      l == d ? std::vector<Plane>{Plane::first_coordinates(d, d)} : plane_grid(l, d, resolution);
  const auto mins = screen_planes(symbol, planes, resolution, Execution::parallel);
  std::size_t best = 0;
  for (std::size_t i = 1; i < mins.size(); ++i) {
    if (mins[i] > mins[best]) best = i;
  }
  double wave_min = std::numeric_limits<double>::infinity();
  for (const Vector& xi : sphere_grid(d, resolution)) wave_min = std::min(wave_min, symbol.norm(xi));

  ReportJson r = header("grid-oracle");
  r["operator"] = operator_summary(op);
  r["lambda"] = vec_json(lambda);
  r["l"] = l;
  r["resolution"] = resolution;
  r["planes"] = planes.size();
  r["max_plane_min"] = mins[best];
  r["argmax_plane"] = basis_json(planes[best].basis());
  r["min_plane_min"] = *std::min_element(mins.begin(), mins.end());
  r["wave_min"] = wave_min;
  return r;
}

ValidationResult validate_report(const json& report, double tol) {
  if (!report.is_object() || !report.contains("schema_version")) throw InputError("not a report document");
  if (report.at("schema_version") != kReportSchemaVersion) throw InputError("unsupported report schema version");
  if (!report.contains("operator") || !report.at("operator").contains("spec")) {
    throw InputError("report has no operator spec");
  }
  const OperatorSpec op = operator_from_json(report.at("operator").at("spec"));
  const ConeConfig cfg = config_from_json(report.value("config", json::object()), ConeConfig{});
  ValidationResult out;

  auto check = [&](const json& w) {
    const std::string kind = w.at("kind").get<std::string>();
    const double stored = w.at("value").get<double>();
    double fresh = 0.0;
    if (kind == "direction") {
      fresh = direction_value(op, json_vec(w.at("lambda")), json_vec(w.at("direction")));
    } else if (kind == "vanishing_subspace") {
      fresh = vanishing_residual(op, json_vec(w.at("lambda")), Plane(json_basis(w.at("basis"), op.d())));
    } else if (kind == "elliptic_plane") {
      fresh = elliptic_value(op, json_vec(w.at("lambda")), Plane(json_basis(w.at("basis"), op.d())), cfg);
    } else if (kind == "annihilation") {
      fresh = annihilation_residual(op, json_vec(w.at("lambda")));
    } else if (kind == "rank") {
      fresh = rank_value(op, json_vec(w.at("direction")), cfg, w.at("scale").get<double>());
    } else {
      throw InputError("unknown witness kind '" + kind + "'");
    }
    const double dev = std::abs(fresh - stored);
    ++out.witnesses;
    out.max_deviation = std::max(out.max_deviation, dev);
    if (!(dev <= tol)) {
      out.ok = false;
      std::ostringstream os;
      os.precision(17);
      os << kind << " witness: stored " << stored << ", recomputed " << fresh;
      out.failures.push_back(os.str());
    }
  };
  // Witness lists can sit anywhere in the document.
  std::vector<const json*> stack{&report};
  while (!stack.empty()) {
    const json* node = stack.back();
    stack.pop_back();
    if (node->is_object()) {
      for (const auto& [key, item] : node->items()) {
        if (key == "witnesses" && item.is_array()) {
          for (const json& w : item) check(w);
        } else if (item.is_structured()) {
          stack.push_back(&item);
        }
      }
    } else if (node->is_array()) {
      for (const json& item : *node) {
        if (item.is_structured()) stack.push_back(&item);
      }
    }
  }
  return out;
}

}  // namespace wavecone
