#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "wavecone/measure_io.hpp"
#include "wavecone/operator_io.hpp"
#include "wavecone/report.hpp"

using namespace wavecone;
using namespace wavecone::testing;

namespace {

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

bool same_terms(const OperatorSpec& a, const OperatorSpec& b) {
  if (a.terms().size() != b.terms().size()) return false;
  for (const auto& [alpha, A] : a.terms()) {
    const auto it = b.terms().find(alpha);
    if (it == b.terms().end() || it->second != A) return false;
  }
  return true;
}

}  // namespace

TEST(OperatorIo, TableRoundTrip) {
  std::mt19937_64 rng(1);
  const OperatorSpec op = random_operator(rng, 3, 2, 2, 2, 0.6);
  const OperatorSpec back = operator_from_json(operator_to_json(op));
  EXPECT_EQ(back.d(), 3);
  EXPECT_EQ(back.k(), 2);
  EXPECT_TRUE(same_terms(op, back));
}

TEST(OperatorIo, BuiltinRoundTrip) {
  const OperatorSpec op = builtin_operator("curl", {2, 3});
  const nlohmann::json j = operator_to_json(op);
  EXPECT_EQ(j.at("builtin"), "curl");
  EXPECT_EQ(operator_from_json(j).builtin(), op.builtin());
  EXPECT_EQ(load_operator("builtin:curl:d=2,p=3").builtin(), op.builtin());
  EXPECT_EQ(load_operator("builtin:cubic3d").d(), 3);
}

TEST(OperatorIo, ErrorsNameTheField) {
  EXPECT_NE(error_of([] { parse_operator_text(R"({"d": 2, "m": 1, "n": 1, "k": 1,
      "terms": [{"alpha": [1, 0], "matrix": [["x"]]}]})"); })
                .find("terms[0].matrix"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_operator_text(R"({"d": 2, "m": 1, "n": 1, "k": 1,
      "terms": [{"alpha": [1], "matrix": [[1]]}]})"); })
                .find("alpha"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_operator_text("{\"d\": 3,\n \"m\": }"); }).find("line 2"), std::string::npos);
  EXPECT_FALSE(error_of([] { load_operator(WAVECONE_TEST_DATA "/duplicate.json"); }).empty());
  EXPECT_FALSE(error_of([] { load_operator(WAVECONE_TEST_DATA "/malformed.json"); }).empty());
  EXPECT_FALSE(error_of([] { load_operator("/nonexistent/spec.json"); }).empty());
}

TEST(MeasureIo, GridRoundTripTextAndBinary) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> values(4 * 4 * 3);
  for (double& v : values) v = g(rng);
  const DiscreteMeasure mu = DiscreteMeasure::grid(2, 3, 4, values);
  for (PayloadFormat f : {PayloadFormat::text, PayloadFormat::binary}) {
    std::stringstream s;
    write_measure(s, mu, f);
    const DiscreteMeasure back = read_measure(s);
    EXPECT_EQ(back.kind(), MeasureKind::grid);
    EXPECT_EQ(back.N(), 4);
    EXPECT_EQ(back.values(), values);
  }
}

TEST(MeasureIo, AtomicRoundTrip) {
  Vector p(2), w(1);
  p << 0.25, 0.125;
  w << -3.5;
  const DiscreteMeasure mu = DiscreteMeasure::atomic(2, 1, {Atom{p, w}}, 0.01);
  std::stringstream s;
  write_measure(s, mu);
  const DiscreteMeasure back = read_measure(s);
  ASSERT_EQ(back.atoms().size(), 1u);
  EXPECT_EQ(back.atoms()[0].position, p);
  EXPECT_EQ(back.atoms()[0].weight, w);
  EXPECT_EQ(back.spacing(), 0.01);
}

TEST(MeasureIo, ErrorsCarryLineNumbers) {
  std::stringstream bad("wavecone-measure 1\nkind grid\nformat text\nd 2\nm 1\nN 2\n1 2 3 x\n");
  EXPECT_NE(error_of([&] { read_measure(bad); }).find("line 7"), std::string::npos);
  std::stringstream shortfile("wavecone-measure 1\nkind grid\nformat text\nd 2\nm 1\nN 2\n1 2\n");
  EXPECT_FALSE(error_of([&] { read_measure(shortfile); }).empty());
  std::stringstream header("wavecone-measure 2\n");
  EXPECT_NE(error_of([&] { read_measure(header); }).find("line 1"), std::string::npos);
  EXPECT_NE(error_of([] { load_measure("/nonexistent/mu.txt"); }).find("/nonexistent/mu.txt"), std::string::npos);
}

TEST(PolysetIo, RoundTripAndComments) {
  Matrix seg(2, 2);
  seg << 0, 1, 0, 2;
  const PolyhedralSet set{2, 1, {seg}};
  std::stringstream s;
  write_polyhedral_set(s, set);
  const PolyhedralSet back = read_polyhedral_set(s);
  ASSERT_EQ(back.simplices.size(), 1u);
  EXPECT_EQ(back.simplices[0], seg);

  std::stringstream commented("# unit segment\nwavecone-polyset 1\n\nd 2\ndim 1\nsimplices 1\n0 0\n1 0\n");
  EXPECT_NEAR(read_polyhedral_set(commented).hausdorff_measure(), 1.0, 1e-15);
}

TEST(Report, DumpUsesSeventeenDigits) {
  ReportJson doc;
  doc["x"] = 0.1;
  doc["v"] = {1.0, 2.5};
  const std::string text = dump_report(doc);
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(text.find("[1, 2.5]"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(text).at("x").get<double>(), 0.1);
}

TEST(Report, ConfigRoundTripAndUnknownKeys) {
  ConeConfig cfg;
  cfg.seed = 77;
  cfg.plane_budget = 5;
  const ConeConfig back = config_from_json(nlohmann::json::parse(config_to_json(cfg).dump()), ConeConfig{});
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.plane_budget, 5);
  EXPECT_NE(error_of([] { config_from_json({{"bogus", 1}}, ConeConfig{}); }).find("bogus"), std::string::npos);
  EXPECT_THROW(config_from_json({{"tol_zero", -1.0}}, ConeConfig{}), InputError);
  // Missing keys keep the base value.
  EXPECT_EQ(config_from_json({{"resolution", 9}}, cfg).seed, 77u);
}

TEST(Report, Parsers) {
  EXPECT_EQ(parse_lambda("e2", 3), Vector::Unit(3, 1));
  EXPECT_EQ(parse_lambda("e1xe2", 4), Vector::Unit(4, 1));
  EXPECT_EQ(parse_lambda("1,2", 2)(1), 2.0);
  EXPECT_THROW(parse_lambda("e1xe2", 3), InputError);
  EXPECT_THROW(parse_lambda("1,2", 3), InputError);
  EXPECT_EQ(parse_plane_equation("x1=0", 3).dimension(), 2);
  EXPECT_NEAR(parse_plane_normal("0,0,2", 3).basis().col(0)(2), 0.0, 1e-15);
  EXPECT_EQ(parse_plane_span("1,1,0;0,0,1", 3).dimension(), 2);
  EXPECT_THROW(parse_plane_span("1,1,0;2,2,0", 3), InputError);
  EXPECT_EQ(parse_cone_selector("ell:2").level, 2);
  EXPECT_EQ(parse_cone_selector("n:0").kind, ConeKind::n);
  EXPECT_THROW(parse_cone_selector("lambda:1"), InputError);
}

TEST(Report, AnalyzeValidatesAndTamperingIsCaught) {
  const AnalyzeResult r = cmd_analyze(builtin_operator("cubic3d"), ConeConfig{});
  EXPECT_EQ(r.report.at("schema_version"), kReportSchemaVersion);
  const nlohmann::json doc = nlohmann::json::parse(dump_report(r.report));
  const ValidationResult ok = validate_report(doc);
  EXPECT_TRUE(ok.ok);
  EXPECT_GT(ok.witnesses, 0);

  // Corrupt the first witness value found.
  nlohmann::json bad = doc;
  bool done = false;
  auto corrupt = [&](auto&& self, nlohmann::json& node) -> void {
    if (done) return;
    if (node.is_object()) {
      if (node.contains("witnesses") && node["witnesses"].is_array() && !node["witnesses"].empty()) {
        node["witnesses"][0]["value"] = node["witnesses"][0]["value"].get<double>() + 1.0;
        done = true;
        return;
      }
      for (auto& [k, v] : node.items()) self(self, v);
    } else if (node.is_array()) {
      for (auto& v : node) self(self, v);
    }
  };
  corrupt(corrupt, bad);
  ASSERT_TRUE(done);
  EXPECT_FALSE(validate_report(bad).ok);
}

TEST(Report, MemberReportsAndExitCodes) {
  const OperatorSpec op = builtin_operator("cubic3d");
  const AnalyzeResult r = cmd_member(op, Vector::Constant(1, 3.0), {ConeKind::n, 2}, ConeConfig{});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(validate_report(nlohmann::json::parse(dump_report(r.report))).ok);
  EXPECT_THROW(cmd_member(op, Vector::Zero(1), {ConeKind::wave, 0}, ConeConfig{}), InputError);
}

TEST(Report, MeasureCheckExitCodes) {
  const OperatorSpec curl = builtin_operator("curl", {2, 1});
  const Plane line = Plane::coordinate(2, {0});
  Vector good(2), bad(2);
  good << 0, 1;
  bad << 1, 0;
  MeasureCheckInput in{"model", model_rectifiable_measure(good, line, 16), line, good};
  EXPECT_EQ(cmd_measure_check(curl, in, 1e-9, DerivativeSymbol::centered).exit_code, 0);
  in.measure = model_rectifiable_measure(bad, line, 16);
  in.lambda = bad;
  EXPECT_EQ(cmd_measure_check(curl, in, 1e-9, DerivativeSymbol::centered).exit_code, 3);
}
