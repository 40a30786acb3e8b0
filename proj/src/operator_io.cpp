#include "wavecone/operator_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace wavecone {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw InputError("spec field '" + field + "': " + what);
}

int integer_field(const json& doc, const char* key, int min_value) {
  if (!doc.contains(key)) field_error(key, "missing");
  const json& v = doc.at(key);
  if (!v.is_number_integer()) field_error(key, "expected an integer");
  const auto x = v.get<long long>();
  if (x < min_value || x > 1'000'000) field_error(key, "out of range");
  return static_cast<int>(x);
}

BuiltinParams builtin_params(const json& params, const std::string& where) {
  BuiltinParams p;
  if (params.is_null()) return p;
  if (!params.is_object()) field_error(where, "expected an object");
  for (const auto& [key, value] : params.items()) {
    if (!value.is_number_integer()) field_error(where + "." + key, "expected an integer");
    const int v = value.get<int>();
    if (key == "d") {
      p.d = v;
    } else if (key == "p") {
      p.p = v;
    } else {
      field_error(where + "." + key, "unknown parameter");
    }
  }
  return p;
}

// Line and column of a byte offset.
std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

OperatorSpec operator_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("spec: expected a JSON object");
  if (doc.contains("builtin")) {
    if (!doc.at("builtin").is_string()) field_error("builtin", "expected a string");
    for (const auto& [key, value] : doc.items()) {
      if (key != "builtin" && key != "params") field_error(key, "not allowed next to 'builtin'");
    }
    return builtin_operator(doc.at("builtin").get<std::string>(),
                            builtin_params(doc.value("params", json()), "params"));
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "d" && key != "m" && key != "n" && key != "k" && key != "terms") field_error(key, "unknown field");
  }
  const int d = integer_field(doc, "d", 1);
  const int m = integer_field(doc, "m", 1);
  const int n = integer_field(doc, "n", 1);
  const int k = integer_field(doc, "k", 0);
  if (!doc.contains("terms")) field_error("terms", "missing");
  const json& terms = doc.at("terms");
  if (!terms.is_array()) field_error("terms", "expected a list");

  OperatorSpec::TermMap table;
  std::map<MultiIndex, std::size_t, ColexLess> first_seen;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string where = "terms[" + std::to_string(t) + "]";
    const json& term = terms[t];
    if (!term.is_object()) field_error(where, "expected an object");
    for (const auto& [key, value] : term.items()) {
      if (key != "alpha" && key != "matrix") field_error(where + "." + key, "unknown field");
    }
    if (!term.contains("alpha")) field_error(where + ".alpha", "missing");
    if (!term.contains("matrix")) field_error(where + ".matrix", "missing");
    const json& a = term.at("alpha");
    if (!a.is_array() || static_cast<int>(a.size()) != d) {
      field_error(where + ".alpha", "expected " + std::to_string(d) + " non-negative integers");
    }
    std::vector<int> entries;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number_integer() || a[i].get<long long>() < 0 || a[i].get<long long>() > 1000) {
        field_error(where + ".alpha[" + std::to_string(i) + "]", "expected a non-negative integer");
      }
      entries.push_back(a[i].get<int>());
    }
    MultiIndex alpha(entries);
    if (alpha.order() > k) field_error(where + ".alpha", "order exceeds k = " + std::to_string(k));
    if (auto it = first_seen.find(alpha); it != first_seen.end()) {
      field_error(where + ".alpha", "duplicates terms[" + std::to_string(it->second) + "].alpha");
    }
    first_seen.emplace(alpha, t);

    const json& rows = term.at("matrix");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
      field_error(where + ".matrix", "expected " + std::to_string(n) + " rows");
    }
    Matrix A(n, m);
    for (int i = 0; i < n; ++i) {
      const std::string rw = where + ".matrix[" + std::to_string(i) + "]";
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != m) {
        field_error(rw, "expected " + std::to_string(m) + " entries");
      }
      for (int j = 0; j < m; ++j) {
        const json& x = rows[i][j];
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
          field_error(rw + "[" + std::to_string(j) + "]", "expected a finite number");
        }
        A(i, j) = x.get<double>();
      }
    }
    table.emplace(std::move(alpha), std::move(A));
  }
  return OperatorSpec(d, m, n, k, std::move(table));
}

OperatorSpec parse_operator_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("spec: malformed JSON at " + position_of(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  return operator_from_json(doc);
}

OperatorSpec load_operator(const std::string& source) {
  const std::string prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string rest = source.substr(prefix.size());
    const auto colon = rest.find(':');
    const std::string name = rest.substr(0, colon);
    BuiltinParams params;
    if (colon != std::string::npos) {
      std::stringstream ss(rest.substr(colon + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("builtin parameter '" + item + "' must look like key=value");
        const std::string key = item.substr(0, eq);
        int value = 0;
        try {
          std::size_t used = 0;
          value = std::stoi(item.substr(eq + 1), &used);
          if (used != item.size() - eq - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw InputError("builtin parameter '" + key + "' must be an integer");
        }
        if (key == "d") {
          params.d = value;
        } else if (key == "p") {
          params.p = value;
        } else {
          throw InputError("unknown builtin parameter '" + key + "'");
        }
      }
    }
    return builtin_operator(name, params);
  }
  std::ifstream in(source);
  if (!in) throw InputError("cannot open spec file '" + source + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_operator_text(buf.str());
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

json operator_to_json(const OperatorSpec& op) {
  if (op.builtin()) {
    const auto& t = *op.builtin();
    json params = json::object();
    if (t.name != "cubic3d" && t.name != "sextic3d") params["d"] = t.d;
    if (t.name == "curl" || t.name == "div-matrix") params["p"] = t.p;
    return {{"builtin", t.name}, {"params", params}};
  }
  json terms = json::array();
  for (const auto& [alpha, A] : op.terms()) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
      rows.push_back(row);
    }
    terms.push_back({{"alpha", alpha.entries()}, {"matrix", rows}});
  }
  return {{"d", op.d()}, {"m", op.m()}, {"n", op.n()}, {"k", op.k()}, {"terms", terms}};
}

}  // namespace wavecone
