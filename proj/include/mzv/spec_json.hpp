#pragma once

#include <string>

#include <json.hpp>

#include "mzv/nested_sum.hpp"

namespace mzv {

/// Canonical JSON form of a nested sum (see docs/spec-format.md). Integer shifts are
/// numbers, fractional ones "p/q" strings, real ones floating-point numbers.
nlohmann::json spec_to_json(const NestedSumSpec& spec);

/// Throws ParseError (position 0) for malformed documents and PreconditionError for
/// out-of-range factor parameters.
NestedSumSpec spec_from_json(const nlohmann::json& document);

NestedSumSpec parse_spec(const std::string& text);

/// Result fields as reported by the CLI.
nlohmann::ordered_json result_to_json(const EvalResult& result);

}  // namespace mzv
