#pragma once

// Operator spec documents (JSON):
//
//   {"d": 3, "m": 1, "n": 1, "k": 3,
//    "terms": [{"alpha": [3, 0, 0], "matrix": [[1]]}, ...]}
//
// or a named operator: {"builtin": "curl", "params": {"d": 3, "p": 1}}.
// On the command line a named operator may also be written
// builtin:NAME[:key=value,...], e.g. builtin:curl:d=2,p=1.

#include <json.hpp>

#include <string>

#include "wavecone/operator.hpp"

namespace wavecone {

/// Errors name the offending field, e.g. "terms[2].matrix[0]".
OperatorSpec operator_from_json(const nlohmann::json& doc);

/// Parses a document; syntax errors report line and column.
OperatorSpec parse_operator_text(const std::string& text);

/// builtin:... shorthand or a path to a spec document.
OperatorSpec load_operator(const std::string& source);

/// Builtins serialize by name and parameters, everything else as a table.
nlohmann::json operator_to_json(const OperatorSpec& op);

}  // namespace wavecone
