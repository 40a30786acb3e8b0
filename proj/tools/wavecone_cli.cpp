// Command line front end: analyze, member, measure-check, grid-oracle,
// validate. Exit codes: 0 success, 1 input error, 2 inconclusive result
// (report still written), 3 failed check.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "wavecone/measure_io.hpp"
#include "wavecone/operator_io.hpp"
#include "wavecone/report.hpp"

using namespace wavecone;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_zero, tol_rank;
  std::optional<int> plane_budget, lambda_budget, resolution;
  std::optional<long> max_cells;
  std::string config_path;
  std::string out_path;
  bool timings = false;
  bool no_closed_form = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--tol-zero", f.tol_zero, "Zero threshold relative to the coefficient scale");
  app->add_option("--tol-rank", f.tol_rank, "Relative singular value threshold for ranks");
  app->add_option("--plane-budget", f.plane_budget, "Random planes tried on top of the grid");
  app->add_option("--lambda-budget", f.lambda_budget, "Candidate polars tried per level");
  app->add_option("--resolution", f.resolution, "Grassmannian grid resolution");
  app->add_option("--max-cells", f.max_cells, "Cell budget of one branch and bound run");
  app->add_flag("--no-closed-form", f.no_closed_form, "Decide named operators by search as well");
  app->add_option("--config", f.config_path, "JSON config file (flags take precedence)");
  app->add_option("--out", f.out_path, "Write the report here instead of stdout");
  app->add_flag("--timings", f.timings, "Include wall-clock timings in the report");
}

// flags > config file > defaults
ConeConfig effective_config(const CommonFlags& f) {
  ConeConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw InputError("cannot open config file '" + f.config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(f.config_path + ": malformed JSON");
    }
    cfg = config_from_json(doc, cfg);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.tol_zero) cfg.tol_zero = *f.tol_zero;
  if (f.tol_rank) cfg.tol_rank = *f.tol_rank;
  if (f.plane_budget) cfg.plane_budget = *f.plane_budget;
  if (f.lambda_budget) cfg.lambda_budget = *f.lambda_budget;
  if (f.resolution) cfg.resolution = *f.resolution;
  if (f.max_cells) cfg.max_cells = *f.max_cells;
  if (f.no_closed_form) cfg.use_closed_form = false;
  if (!(cfg.tol_zero > 0.0) || !(cfg.tol_rank > 0.0)) throw InputError("tolerances must be positive");
  if (cfg.resolution < 2 || cfg.lambda_budget < 1 || cfg.plane_budget < 0 || cfg.max_cells < 1) {
    throw InputError("budgets out of range");
  }
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave cones, dimension thresholds and model measures of linear PDE operators"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string spec;

  auto* analyze = app.add_subcommand("analyze", "Cocancellation, constant rank and both dimension thresholds");
  analyze->add_option("spec", spec, "Spec file or builtin:NAME[:d=..,p=..]")->required();
  add_common(analyze, flags);

  std::string lambda_text, cone_text = "wave";
  auto* member = app.add_subcommand("member", "Membership of lambda in a cone");
  member->add_option("spec", spec, "Spec file or builtin:NAME[:d=..,p=..]")->required();
  member->add_option("--lambda", lambda_text, "Comma list, e<i> or e<i>xe<j>")->required();
  member->add_option("--cone", cone_text, "wave, ell:<l> or n:<l>");
  add_common(member, flags);

  std::string op_source, measure_path, plane_eq, plane_normal, plane_span, bv_jump;
  bool auto_lambda = false, bv_slab = false;
  int slab_axis = 1, grid_n = 64;
  double tol = 1e-9;
  std::string symbol_text = "centered", save_path;
  auto* mcheck = app.add_subcommand("measure-check", "Fourier residual test of A-freeness");
  mcheck->add_option("--op", op_source, "Spec file or builtin NAME[:d=..,p=..]")->required();
  mcheck->add_option("--measure", measure_path, "Measure field file");
  mcheck->add_option("--plane", plane_eq, "Model measure plane, x<i>=0");
  mcheck->add_option("--plane-normal", plane_normal, "Model measure plane by its normal");
  mcheck->add_option("--plane-span", plane_span, "Model measure plane by spanning vectors, ';'-separated");
  mcheck->add_option("--lambda", lambda_text, "Model measure polar");
  mcheck->add_flag("--auto-lambda", auto_lambda, "Use the first admissible polar of the plane");
  mcheck->add_flag("--bv-slab", bv_slab, "Jump measure of a slab indicator");
  mcheck->add_option("--slab-axis", slab_axis, "Slab normal axis (1-based)");
  mcheck->add_option("--jump", bv_jump, "Jump vector a of the slab (default e1)");
  mcheck->add_option("--grid", grid_n, "Grid size N of generated measures");
  mcheck->add_option("--tol", tol, "Residual threshold");
  mcheck->add_option("--symbol", symbol_text, "centered or spectral")->check(CLI::IsMember({"centered", "spectral"}));
  mcheck->add_option("--save-measure", save_path, "Also write the generated measure");
  add_common(mcheck, flags);

  int level = 1;
  auto* oracle = app.add_subcommand("grid-oracle", "Brute-force Grassmannian sweep (d <= 3)");
  oracle->add_option("spec", spec, "Spec file or builtin:NAME[:d=..,p=..]")->required();
  oracle->add_option("--lambda", lambda_text, "Comma list, e<i> or e<i>xe<j>")->required();
  oracle->add_option("--level", level, "Plane dimension l");
  add_common(oracle, flags);

  std::string report_path;
  auto* validate = app.add_subcommand("validate", "Recompute every witness stored in a report");
  validate->add_option("report", report_path, "Report file")->required();
  validate->add_option("--out", flags.out_path, "Write the result here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) {
      const auto res = cmd_analyze(load_operator(spec), effective_config(flags), flags.timings);
      emit(dump_report(res.report), flags.out_path);
      return res.exit_code;
    }
    if (member->parsed()) {
      const OperatorSpec op = load_operator(spec);
      const auto res =
          cmd_member(op, parse_lambda(lambda_text, op.m()), parse_cone_selector(cone_text), effective_config(flags));
      emit(dump_report(res.report), flags.out_path);
      return res.exit_code;
    }
    if (mcheck->parsed()) {
      // A bare builtin name, optionally with parameters (curl:d=2), needs no prefix.
      const std::string head = op_source.substr(0, op_source.find(':'));
      const auto names = builtin_names();
      const std::string src =
          std::find(names.begin(), names.end(), head) != names.end() ? "builtin:" + op_source : op_source;
      const OperatorSpec op = load_operator(src);
      const int planes = !plane_eq.empty() + !plane_normal.empty() + !plane_span.empty();
      const int sources = !measure_path.empty() + (planes > 0) + bv_slab;
      if (sources != 1 || planes > 1) {
        throw InputError("give exactly one of --measure, a plane (--plane, --plane-normal, --plane-span) or --bv-slab");
      }
      std::optional<MeasureCheckInput> input;
      if (!measure_path.empty()) {
        input.emplace(MeasureCheckInput{measure_path, load_measure(measure_path), std::nullopt, std::nullopt});
      } else if (bv_slab) {
        if (op.m() % op.d() != 0) throw InputError("--bv-slab needs an operator on p x d matrix fields");
        const int p = op.m() / op.d();
        Vector a = Vector::Unit(p, 0);
        if (!bv_jump.empty()) {
          try {
            a = parse_lambda(bv_jump, p);
          } catch (const InputError& e) {
            throw InputError(std::string("--jump: ") + e.what());
          }
        }
        if (slab_axis < 1 || slab_axis > op.d()) throw InputError("--slab-axis out of range");
        const auto shape = BvShape::slab(op.d(), slab_axis - 1, 0.25, 0.75);
        input.emplace(MeasureCheckInput{"bv-slab", bv_jump_example(shape, grid_n, a), std::nullopt, std::nullopt});
      } else {
        const Plane pi = !plane_eq.empty()       ? parse_plane_equation(plane_eq, op.d())
                         : !plane_normal.empty() ? parse_plane_normal(plane_normal, op.d())
                                                 : parse_plane_span(plane_span, op.d());
        if (auto_lambda == !lambda_text.empty()) throw InputError("give exactly one of --lambda and --auto-lambda");
        Vector lambda;
        if (auto_lambda) {
          const Matrix adm = admissible_polar_set(op, pi);
          if (adm.cols() == 0) throw InputError("the plane admits no nonzero polar for this operator");
          lambda = adm.col(0);
        } else {
          lambda = parse_lambda(lambda_text, op.m());
          if (lambda.norm() == 0.0) throw InputError("lambda must be nonzero");
          lambda.normalize();
        }
        input.emplace(MeasureCheckInput{"model", model_rectifiable_measure(lambda, pi, grid_n), pi, lambda});
      }
      if (!save_path.empty()) save_measure(save_path, input->measure);
      const auto symbol = symbol_text == "spectral" ? DerivativeSymbol::spectral : DerivativeSymbol::centered;
      const auto res = cmd_measure_check(op, *input, tol, symbol, flags.timings);
      emit(dump_report(res.report), flags.out_path);
      return res.exit_code;
    }
    if (oracle->parsed()) {
      const OperatorSpec op = load_operator(spec);
      const ConeConfig cfg = effective_config(flags);
      emit(dump_report(grid_oracle(op, parse_lambda(lambda_text, op.m()), level, cfg.resolution)), flags.out_path);
      return 0;
    }
    if (validate->parsed()) {
      std::ifstream in(report_path);
      if (!in) throw InputError("cannot open report '" + report_path + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error&) {
        throw InputError(report_path + ": malformed JSON");
      }
      const ValidationResult v = validate_report(doc);
      ReportJson r;
      r["schema_version"] = kReportSchemaVersion;
      r["command"] = "validate";
      r["witnesses_checked"] = v.witnesses;
      r["max_deviation"] = v.max_deviation;
      r["ok"] = v.ok;
      r["failures"] = v.failures;
      emit(dump_report(r), flags.out_path);
      return v.ok ? 0 : 3;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
