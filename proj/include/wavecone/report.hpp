#pragma once

// Machine-readable reports behind the command line tool. Every report is a
// single JSON document carrying "schema_version"; docs/report_schema.md
// lists the fields.

#include <json.hpp>

#include <optional>
#include <string>

#include "wavecone/cone.hpp"
#include "wavecone/measure.hpp"

namespace wavecone {

inline constexpr int kReportSchemaVersion = 1;

/// Serialization with every double printed to 17 significant digits and
/// two-space indentation. Object keys keep insertion order.
using ReportJson = nlohmann::ordered_json;
std::string dump_report(const ReportJson& doc);

ReportJson config_to_json(const ConeConfig& cfg);
/// Unknown keys are an input error; missing keys keep the value in base.
ConeConfig config_from_json(const nlohmann::json& doc, ConeConfig base);

ReportJson verdict_to_json(const OperatorSpec& op, const Vector& lambda, const ConeVerdict& v, const ConeConfig& cfg);

struct AnalyzeResult {
  ReportJson report;
  /// 0 when both dimension brackets are exact, 2 otherwise.
  int exit_code = 0;
};

AnalyzeResult cmd_analyze(const OperatorSpec& op, const ConeConfig& cfg, bool timings = false);

enum class ConeKind { wave, ell, n };

struct ConeSelector {
  ConeKind kind = ConeKind::wave;
  int level = 0;
};

/// "wave", "ell:<l>" or "n:<l>".
ConeSelector parse_cone_selector(const std::string& text);

/// lambda is normalized first; returns exit code 0 (decided) or 2.
AnalyzeResult cmd_member(const OperatorSpec& op, const Vector& lambda, const ConeSelector& cone, const ConeConfig& cfg);

/// lambda from a comma list, "e<i>" (unit vector, 1-based) or "e<i>xe<j>"
/// (outer product e_i e_j^T flattened row-major, c x c with c^2 = m).
Vector parse_lambda(const std::string& text, int m);

/// Plane from "x<i>=0" (the coordinate hyperplane), a normal vector, or a
/// list of spanning vectors separated by ';'.
Plane parse_plane_equation(const std::string& text, int d);
Plane parse_plane_normal(const std::string& text, int d);
Plane parse_plane_span(const std::string& text, int d);

struct MeasureCheckInput {
  std::string source;
  DiscreteMeasure measure;
  std::optional<Plane> plane;
  std::optional<Vector> lambda;
};

/// Exit code 0 when the residual passes, 3 otherwise.
AnalyzeResult cmd_measure_check(const OperatorSpec& op, const MeasureCheckInput& input, double tol,
                                DerivativeSymbol symbol, bool timings = false);

/// Brute-force sweep over the Grassmannian grid (d <= 3): for every grid
/// plane the smallest |A^k(xi) lambda| over a grid of directions in it. The
/// largest of these minima is a sampled surrogate for the restricted
/// ellipticity margin.
ReportJson grid_oracle(const OperatorSpec& op, const Vector& lambda, int l, int resolution);

struct ValidationResult {
  int witnesses = 0;
  double max_deviation = 0.0;
  bool ok = true;
  std::vector<std::string> failures;
};

/// Recomputes every witness value embedded in a report.
ValidationResult validate_report(const nlohmann::json& report, double tol = 1e-12);

}  // namespace wavecone
