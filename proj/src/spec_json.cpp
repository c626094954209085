#include "mzv/spec_json.hpp"

#include <charconv>

#include "mzv/error.hpp"

namespace mzv {

using nlohmann::json;

namespace {

json shift_to_json(const Shift& shift) {
  if (!shift.is_rational()) return shift.value();
  const std::string text = shift.to_string();
  if (text.find('/') == std::string::npos) return std::stol(text);
  return text;
}

[[noreturn]] void fail(const std::string& message) { throw ParseError("spec: " + message, 0); }

long parse_long(std::string_view text, const std::string& what) {
  long out = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || end != text.data() + text.size()) fail("bad " + what + " '" + std::string(text) + "'");
  return out;
}

Shift shift_from_json(const json& value) {
  if (value.is_number_integer()) return Shift::integer(value.get<long>());
  if (value.is_number_float()) return Shift::real(value.get<double>());
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Shift::integer(parse_long(text, "shift"));
    return Shift::rational(parse_long(std::string_view(text).substr(0, slash), "shift numerator"),
                           parse_long(std::string_view(text).substr(slash + 1), "shift denominator"));
  }
  fail("shift must be a number or a \"p/q\" string");
}

int int_field(const json& factor, const char* name, std::optional<int> fallback = std::nullopt) {
  if (!factor.contains(name)) {
    if (fallback) return *fallback;
    fail(std::string("factor is missing '") + name + "'");
  }
  const json& v = factor.at(name);
  if (!v.is_number_integer()) fail(std::string("'") + name + "' must be an integer");
  return v.get<int>();
}

PositionFactor factor_from_json(const json& factor) {
  if (!factor.is_object() || !factor.contains("type") || !factor.at("type").is_string()) {
    fail("each factor must be an object with a string 'type'");
  }
  const auto type = factor.at("type").get<std::string>();
  if (type == "power") {
    return ShiftedPower{factor.contains("shift") ? shift_from_json(factor.at("shift")) : Shift{},
                        int_field(factor, "exponent")};
  }
  if (type == "extra_power") return ExtraPower{int_field(factor, "shift", 0), int_field(factor, "exponent")};
  if (type == "rising_factorial") return RisingFactorial{int_field(factor, "degree")};
  if (type == "finite_difference") return FiniteDifference{int_field(factor, "order"), int_field(factor, "exponent")};
  fail("unknown factor type '" + type + "'");
}

}  // namespace

json spec_to_json(const NestedSumSpec& spec) {
  json positions = json::array();
  for (const auto& position : spec.positions) {
    json factors = json::array();
    for (const auto& factor : position) {
      std::visit(
          [&factors](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ShiftedPower>) {
              factors.push_back({{"type", "power"}, {"shift", shift_to_json(f.shift)}, {"exponent", f.exponent}});
            } else if constexpr (std::is_same_v<T, ExtraPower>) {
              factors.push_back({{"type", "extra_power"}, {"shift", f.shift}, {"exponent", f.exponent}});
            } else if constexpr (std::is_same_v<T, RisingFactorial>) {
              factors.push_back({{"type", "rising_factorial"}, {"degree", f.degree}});
            } else {
              factors.push_back({{"type", "finite_difference"}, {"order", f.order}, {"exponent", f.exponent}});
            }
          },
          factor);
    }
    positions.push_back(std::move(factors));
  }
  json out{{"depth", spec.depth()}, {"positions", std::move(positions)}};
  if (spec.log_power) out["log_power"] = *spec.log_power;
  return out;
}

NestedSumSpec spec_from_json(const json& document) {
  if (!document.is_object()) fail("document must be an object");
  if (!document.contains("positions") || !document.at("positions").is_array()) fail("'positions' array is required");
  NestedSumSpec spec;
  for (const auto& position : document.at("positions")) {
    if (!position.is_array()) fail("each position must be an array of factors");
    auto& factors = spec.positions.emplace_back();
    for (const auto& factor : position) factors.push_back(factor_from_json(factor));
  }
  if (document.contains("depth")) {
    if (!document.at("depth").is_number_integer() || document.at("depth").get<int>() != spec.depth()) {
      fail("'depth' does not match the number of positions");
    }
  }
  if (document.contains("log_power")) {
    const json& v = document.at("log_power");
    if (!v.is_number_integer() || v.get<int>() < 0) fail("'log_power' must be a nonnegative integer");
    spec.log_power = v.get<int>();
  }
  if (spec.positions.empty()) fail("a spec needs at least one position");
  return spec;
}

NestedSumSpec parse_spec(const std::string& text) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("spec: invalid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  return spec_from_json(document);
}

nlohmann::ordered_json result_to_json(const EvalResult& r) {
  return {{"value", r.value},
          {"tail_bound", r.tail_bound},
          {"cutoff", r.cutoff},
          {"mode", to_string(r.mode)},
          {"accuracy_met", r.accuracy_met},
          {"slow_convergence", r.slow_convergence}};
}

}  // namespace mzv
