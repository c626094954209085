#include "mzv/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mzv/error.hpp"
#include "mzv/spec_json.hpp"

namespace mzv {

using nlohmann::json;
using nlohmann::ordered_json;

ReportSummary VerificationReport::summary() const {
  ReportSummary s;
  s.total = checks.size();
  for (const auto& c : checks) {
    (c.pass ? s.passed : s.failed) += 1;
    if (!c.accuracy_met) ++s.accuracy_missed;
    s.max_abs_diff = std::max(s.max_abs_diff, c.abs_diff);
  }
  return s;
}

namespace {

ordered_json param_to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return ordered_json(v); }, value);
}

std::string params_text(const ParamList& params) {
  std::string out;
  for (const auto& [name, value] : params) {
    if (!out.empty()) out += ' ';
    out += name + "=" + to_string(value);
  }
  return out;
}

}  // namespace

ordered_json check_to_json(const IdentityCheck& check) {
  ordered_json params = ordered_json::object();
  for (const auto& [name, value] : check.params) params[name] = param_to_json(value);
  ordered_json sides = ordered_json::array();
  for (const auto& side : check.sides) {
    ordered_json s{{"label", side.label}};
    const ordered_json result = result_to_json(side.result);
    for (const auto& [key, value] : result.items()) s[key] = value;
    sides.push_back(std::move(s));
  }
  ordered_json out{{"identity", check.identity},
                   {"params", std::move(params)},
                   {"pass", check.pass},
                   {"abs_diff", check.abs_diff},
                   {"tolerance", check.tolerance},
                   {"error_budget", check.error_budget},
                   {"accuracy_met", check.accuracy_met},
                   {"sides", std::move(sides)}};
  if (!check.note.empty()) out["note"] = check.note;
  return out;
}

ordered_json report_to_json(const VerificationReport& report) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) checks.push_back(check_to_json(c));
  const ReportSummary s = report.summary();
  ordered_json out{{"schema", kReportSchema},
                   {"tool", kToolName},
                   {"version", kToolVersion},
                   {"command", report.command},
                   {"config", report.config}};
  if (report.seed) out["seed"] = *report.seed;
  out["checks"] = std::move(checks);
  out["summary"] = {{"total", s.total},
                    {"passed", s.passed},
                    {"failed", s.failed},
                    {"accuracy_missed", s.accuracy_missed},
                    {"max_abs_diff", s.max_abs_diff},
                    {"runtime_seconds", report.runtime_seconds}};
  return out;
}

std::string format_table(const VerificationReport& report) {
  std::ostringstream out;
  char line[160];
  for (const auto& c : report.checks) {
    std::snprintf(line, sizeof line, "%s  %-15s diff=%.3e  tol=%.3e%s  ", c.pass ? "PASS" : "FAIL", c.identity.c_str(),
                  c.abs_diff, c.tolerance, c.accuracy_met ? "" : "  (accuracy not met)");
    out << line << params_text(c.params) << '\n';
    for (const auto& side : c.sides) {
      std::snprintf(line, sizeof line, "      %.16g  +- %.2e  ", side.result.value, side.result.tail_bound);
      out << line << side.label << '\n';
    }
    if (!c.note.empty()) out << "      " << c.note << '\n';
  }
  const ReportSummary s = report.summary();
  std::snprintf(line, sizeof line, "%zu checks, %zu passed, %zu failed, max diff %.3e, %.2f s", s.total, s.passed,
                s.failed, s.max_abs_diff, report.runtime_seconds);
  out << line << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Fuzzing
// ---------------------------------------------------------------------------

FuzzRange FuzzRange::integer(std::int64_t lo, std::int64_t hi) {
  FuzzRange r;
  r.kind = Kind::kInteger;
  r.lo = lo;
  r.hi = hi;
  return r;
}

FuzzRange FuzzRange::real(double lo, double hi) {
  FuzzRange r;
  r.kind = Kind::kReal;
  r.real_lo = lo;
  r.real_hi = hi;
  return r;
}

FuzzRange FuzzRange::choice(std::vector<ParamValue> values) {
  FuzzRange r;
  r.kind = Kind::kChoice;
  r.choices = std::move(values);
  return r;
}

bool FuzzRange::empty() const {
  switch (kind) {
    case Kind::kInteger: return lo > hi;
    case Kind::kReal: return !(real_lo <= real_hi);
    case Kind::kChoice: return choices.empty();
  }
  return true;
}

FuzzRanges default_fuzz_ranges(const std::string& identity) {
  using R = FuzzRange;
  if (identity == "duality") return {{"weight", R::integer(2, 7)}};
  if (identity == "sum_formula") return {{"m", R::integer(2, 8)}, {"p", R::integer(1, 7)}};
  if (identity == "ohno") return {{"weight", R::integer(2, 5)}, {"m", R::integer(0, 2)}};
  if (identity == "composition_duality") return {{"p", R::integer(1, 3)}, {"q", R::integer(1, 3)}, {"m", R::integer(0, 2)}};
  if (identity == "param_duality") {
    return {{"p", R::integer(1, 3)}, {"q", R::integer(1, 3)}, {"r", R::integer(0, 2)},
            {"a", R::real(-0.5, 1.0)},  {"m", R::integer(0, 2)}};
  }
  if (identity == "shifted_sum_formula") return {{"p", R::integer(1, 3)}, {"m", R::integer(0, 3)}, {"r", R::integer(0, 2)}};
  if (identity == "vector_duality") return {{"n", R::integer(1, 2)}, {"entries", R::integer(1, 2)}, {"a", R::real(0.0, 0.5)}};
  if (identity == "three_way" || identity == "quad_three_integrals") {
    return {{"p", R::integer(0, 2)}, {"q", R::integer(0, 2)}, {"r", R::integer(0, 2)}, {"m", R::integer(0, 2)}};
  }
  if (identity == "restricted_sum") return {{"p", R::integer(0, 2)}, {"q", R::integer(0, 2)}, {"r", R::integer(0, 2)}};
  if (identity == "alternating_sums") return {{"m", R::integer(1, 3)}, {"p", R::integer(1, 3)}};
  if (identity == "quad_ones_power") return {{"m", R::integer(0, 1)}, {"n", R::integer(0, 1)}};
  if (identity == "quad_ones_sum") {
    return {{"p", R::integer(0, 1)}, {"q", R::integer(0, 1)}, {"r", R::integer(0, 1)}, {"l", R::integer(0, 1)}};
  }
  if (identity == "quad_ipqar") {
    return {{"p", R::integer(1, 2)}, {"q", R::integer(1, 2)}, {"a", R::real(-0.5, 1.0)}, {"r", R::integer(0, 2)}};
  }
  identity_parameters(identity);  // rejects unknown names
  return {};
}

namespace {

std::optional<std::int64_t> parse_integer(std::string_view text) {
  std::int64_t out = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return out;
}

std::optional<double> parse_real(std::string_view text) {
  double out = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return out;
}

ParamValue scalar_param(std::string_view text) {
  if (auto i = parse_integer(text)) return *i;
  if (auto d = parse_real(text)) return *d;
  return std::string(text);
}

/// Splits on `separator` at parenthesis depth zero.
std::vector<std::pair<std::string_view, std::size_t>> split_top(std::string_view text, char separator) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size()) {
      if (text[i] == '(' || text[i] == '{') ++depth;
      if (text[i] == ')' || text[i] == '}') --depth;
      if (depth > 0 || text[i] != separator) continue;
    }
    out.emplace_back(text.substr(start, i - start), start);
    start = i + 1;
  }
  return out;
}

class Drawer {
 public:
  explicit Drawer(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [lo, hi] by rejection, so the sequence only depends on mt19937_64 itself.
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return lo + static_cast<std::int64_t>(x % span);
  }

  double real(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1p-53;
    return lo + (hi - lo) * u;
  }

  ParamValue draw(const FuzzRange& range) {
    switch (range.kind) {
      case FuzzRange::Kind::kInteger: return integer(range.lo, range.hi);
      case FuzzRange::Kind::kReal: return real(range.real_lo, range.real_hi);
      case FuzzRange::Kind::kChoice:
        return range.choices[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(range.choices.size()) - 1))];
    }
    return std::int64_t{0};
  }

 private:
  std::mt19937_64 engine_;
};

int as_int(const std::string& identity, const std::string& name, const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<int>(*i);
  throw PreconditionError(identity + ": '" + name + "' must be drawn from an integer range");
}

}  // namespace

FuzzRanges parse_fuzz_ranges(const std::string& text) {
  FuzzRanges out;
  if (text.find_first_not_of(" \t") == std::string::npos) return out;
  for (const auto& [item, offset] : split_top(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ParseError("range must look like name=lo:hi", offset);
    const std::string name(item.substr(0, eq));
    const std::string_view body = item.substr(eq + 1);
    const std::size_t body_offset = offset + eq + 1;
    const auto alternatives = split_top(body, '|');
    const auto colon = body.find(':');
    if (alternatives.size() == 1 && colon != std::string_view::npos && body.find('(') == std::string_view::npos) {
      const auto lo_text = body.substr(0, colon);
      const auto hi_text = body.substr(colon + 1);
      const auto lo_int = parse_integer(lo_text);
      const auto hi_int = parse_integer(hi_text);
      if (lo_int && hi_int) {
        out[name] = FuzzRange::integer(*lo_int, *hi_int);
        continue;
      }
      const auto lo = parse_real(lo_text);
      const auto hi = parse_real(hi_text);
      if (!lo) throw ParseError("bad lower bound in range '" + name + "'", body_offset);
      if (!hi) throw ParseError("bad upper bound in range '" + name + "'", body_offset + colon + 1);
      out[name] = FuzzRange::real(*lo, *hi);
      continue;
    }
    std::vector<ParamValue> values;
    for (const auto& [alt, alt_offset] : alternatives) {
      if (alt.empty()) throw ParseError("empty choice in range '" + name + "'", body_offset + alt_offset);
      values.push_back(scalar_param(alt));
    }
    out[name] = FuzzRange::choice(std::move(values));
  }
  return out;
}

std::vector<ParamList> fuzz_instances(const std::string& identity, const FuzzRanges& overrides, std::uint64_t seed,
                                      std::size_t count) {
  const auto& names = identity_parameters(identity);
  FuzzRanges ranges = default_fuzz_ranges(identity);
  if (overrides.count("index")) ranges.erase("weight");
  if (overrides.count("p") && overrides.count("q") && identity == "vector_duality") {
    ranges.erase("n");
    ranges.erase("entries");
  }
  for (const auto& [name, range] : overrides) ranges[name] = range;

  const bool index_by_weight = !ranges.count("index") && ranges.count("weight");
  const bool vectors_by_length = identity == "vector_duality" && ranges.count("n");
  std::set<std::string> allowed(names.begin(), names.end());
  if (index_by_weight) allowed.insert("weight");
  if (vectors_by_length) allowed.insert({"n", "entries"});
  for (const auto& [name, range] : ranges) {
    if (!allowed.count(name)) throw PreconditionError(identity + ": unknown fuzz parameter '" + name + "'");
    if (range.empty()) throw PreconditionError(identity + ": empty range for '" + name + "'");
  }
  for (const auto& name : names) {
    const bool derived = (name == "index" && index_by_weight) || ((name == "p" || name == "q") && vectors_by_length);
    if (!derived && !ranges.count(name)) throw PreconditionError(identity + ": no range for '" + name + "'");
  }

  Drawer drawer(seed);
  std::map<int, std::vector<MzvIndex>> by_weight;
  auto draw_instance = [&]() -> ParamList {
    ParamList params;
    for (const auto& name : names) {
      if (name == "index" && index_by_weight) {
        const int weight = as_int(identity, "weight", drawer.draw(ranges.at("weight")));
        if (weight < 2 || weight > 16) return {};
        auto [it, inserted] = by_weight.try_emplace(weight);
        if (inserted) it->second = admissible_indices(weight);
        const auto& pool = it->second;
        const auto pick = drawer.integer(0, static_cast<std::int64_t>(pool.size()) - 1);
        params.emplace_back(name, pool[static_cast<std::size_t>(pick)].to_string());
      } else if (name == "p" && vectors_by_length) {
        const int n = as_int(identity, "n", drawer.draw(ranges.at("n")));
        if (n < 1 || n > 16) return {};
        const FuzzRange entries = ranges.count("entries") ? ranges.at("entries") : FuzzRange::integer(1, 2);
        for (const char* which : {"p", "q"}) {
          std::vector<int> v;
          for (int i = 0; i < n; ++i) v.push_back(as_int(identity, "entries", drawer.draw(entries)));
          if (*std::min_element(v.begin(), v.end()) < 1) return {};
          params.emplace_back(which, MzvIndex(v).to_string());
        }
      } else if (name == "q" && vectors_by_length) {
        continue;
      } else {
        params.emplace_back(name, drawer.draw(ranges.at(name)));
      }
    }
    return params;
  };

  constexpr int kMaxAttempts = 10000;
  std::vector<ParamList> out;
  while (out.size() < count) {
    bool found = false;
    for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
      ParamList params = draw_instance();
      if (!params.empty() || names.empty()) {
        if (preconditions_hold(identity, params)) {
          out.push_back(std::move(params));
          found = true;
        }
      }
    }
    if (!found) throw PreconditionError(identity + ": no feasible parameters in the fuzz ranges");
  }
  return out;
}

namespace {

ordered_json ranges_echo(const FuzzRanges& ranges) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, r] : ranges) {
    switch (r.kind) {
      case FuzzRange::Kind::kInteger: out[name] = {{"min", r.lo}, {"max", r.hi}}; break;
      case FuzzRange::Kind::kReal: out[name] = {{"min", r.real_lo}, {"max", r.real_hi}}; break;
      case FuzzRange::Kind::kChoice: {
        ordered_json values = ordered_json::array();
        for (const auto& v : r.choices) values.push_back(param_to_json(v));
        out[name] = std::move(values);
        break;
      }
    }
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

VerificationReport run_fuzz(const std::string& identity, const FuzzRanges& overrides, std::uint64_t seed,
                            std::size_t count, const CheckOptions& options, int parallelism) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.command = "fuzz";
  report.seed = seed;
  report.config = {{"identity", identity},
                   {"count", count},
                   {"acc", options.acc},
                   {"tolerance", options.effective_tolerance()},
                   {"ranges", ranges_echo(overrides)}};
  report.checks = run_instances(identity, fuzz_instances(identity, overrides, seed, count), options, parallelism);
  report.runtime_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& message) {
  throw ConfigError("config " + where + ": " + message);
}

void check_keys(const json& object, const std::string& where, std::initializer_list<const char*> keys) {
  if (!object.is_object()) config_fail(where, "must be an object");
  for (const auto& [key, value] : object.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      config_fail(where, "unknown key '" + key + "'");
    }
  }
}

double positive_number(const json& object, const char* key, const std::string& where, double fallback) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  if (!v.is_number() || !(v.get<double>() > 0)) config_fail(where, std::string("'") + key + "' must be positive");
  return v.get<double>();
}

ParamValue json_param(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  config_fail(where, "parameter values must be numbers or strings");
}

std::pair<json, json> min_max(const json& v, const std::string& where) {
  check_keys(v, where, {"min", "max"});
  if (!v.contains("min") || !v.contains("max")) config_fail(where, "needs both 'min' and 'max'");
  return {v.at("min"), v.at("max")};
}

GridRanges grid_ranges(const json& ranges, const std::string& where) {
  GridRanges out;
  if (ranges.is_null()) return out;
  if (!ranges.is_object()) config_fail(where, "'ranges' must be an object");
  for (const auto& [name, v] : ranges.items()) {
    const std::string here = where + "." + name;
    auto& values = out[name];
    if (v.is_array()) {
      for (const auto& item : v) values.push_back(json_param(item, here));
    } else if (v.is_object()) {
      const auto [lo, hi] = min_max(v, here);
      if (!lo.is_number_integer() || !hi.is_number_integer()) config_fail(here, "grid bounds must be integers");
      for (auto i = lo.get<std::int64_t>(); i <= hi.get<std::int64_t>(); ++i) values.emplace_back(i);
    } else {
      values.push_back(json_param(v, here));
    }
  }
  return out;
}

FuzzRanges fuzz_ranges(const json& ranges, const std::string& where) {
  FuzzRanges out;
  if (ranges.is_null()) return out;
  if (!ranges.is_object()) config_fail(where, "'ranges' must be an object");
  for (const auto& [name, v] : ranges.items()) {
    const std::string here = where + "." + name;
    if (v.is_array()) {
      std::vector<ParamValue> values;
      for (const auto& item : v) values.push_back(json_param(item, here));
      out[name] = FuzzRange::choice(std::move(values));
    } else if (v.is_object()) {
      const auto [lo, hi] = min_max(v, here);
      if (!lo.is_number() || !hi.is_number()) config_fail(here, "bounds must be numbers");
      out[name] = lo.is_number_integer() && hi.is_number_integer()
                      ? FuzzRange::integer(lo.get<std::int64_t>(), hi.get<std::int64_t>())
                      : FuzzRange::real(lo.get<double>(), hi.get<double>());
    } else {
      out[name] = FuzzRange::choice({json_param(v, here)});
    }
  }
  return out;
}

std::string identity_of(const json& entry, const std::string& where) {
  if (!entry.contains("identity") || !entry.at("identity").is_string()) config_fail(where, "'identity' is required");
  const auto identity = entry.at("identity").get<std::string>();
  const auto& names = identity_names();
  if (std::find(names.begin(), names.end(), identity) == names.end()) {
    config_fail(where, "unknown identity '" + identity + "'");
  }
  return identity;
}

CheckOptions entry_options(const json& entry, const CheckOptions& base, const std::string& where) {
  CheckOptions options = base;
  options.acc = positive_number(entry, "acc", where, base.acc);
  options.tolerance = positive_number(entry, "tolerance", where, base.tolerance);
  return options;
}

}  // namespace

VerificationReport run_suite(const json& config, int parallelism_override) {
  const auto start = std::chrono::steady_clock::now();
  check_keys(config, "", {"description", "acc", "tolerance", "parallelism", "seed", "max_cutoff", "grids", "fuzz"});
  CheckOptions base;
  base.acc = positive_number(config, "acc", "", base.acc);
  base.tolerance = positive_number(config, "tolerance", "", 0.0);
  if (config.contains("max_cutoff")) {
    const json& v = config.at("max_cutoff");
    if (!v.is_number_integer() || v.get<std::int64_t>() < base.eval.initial_cutoff) {
      config_fail("", "'max_cutoff' must be an integer >= " + std::to_string(base.eval.initial_cutoff));
    }
    base.eval.max_cutoff = v.get<std::int64_t>();
  }
  int parallelism = 1;
  if (config.contains("parallelism")) {
    const json& v = config.at("parallelism");
    if (!v.is_number_integer() || v.get<int>() < 1) config_fail("", "'parallelism' must be a positive integer");
    parallelism = v.get<int>();
  }
  if (parallelism_override > 0) parallelism = parallelism_override;
  std::uint64_t seed = 0;
  if (config.contains("seed")) {
    const json& v = config.at("seed");
    if (!v.is_number_unsigned()) config_fail("", "'seed' must be a nonnegative integer");
    seed = v.get<std::uint64_t>();
  }

  VerificationReport report;
  report.command = "suite";
  report.config = ordered_json::parse(config.dump());

  auto append = [&report](std::vector<IdentityCheck>&& checks) {
    std::move(checks.begin(), checks.end(), std::back_inserter(report.checks));
  };
  auto guarded = [](const std::string& where, auto&& run) {
    try {
      return run();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      config_fail(where, e.what());
    }
  };

  if (config.contains("grids")) {
    if (!config.at("grids").is_array()) config_fail("grids", "must be an array");
    std::size_t i = 0;
    for (const auto& entry : config.at("grids")) {
      const std::string where = "grids[" + std::to_string(i++) + "]";
      check_keys(entry, where, {"label", "identity", "ranges", "acc", "tolerance"});
      const std::string identity = identity_of(entry, where);
      const CheckOptions options = entry_options(entry, base, where);
      const GridRanges ranges = grid_ranges(entry.value("ranges", json()), where);
      append(guarded(where, [&] { return run_grid(identity, ranges, options, parallelism); }));
    }
  }
  if (config.contains("fuzz")) {
    if (!config.at("fuzz").is_array()) config_fail("fuzz", "must be an array");
    std::size_t i = 0;
    for (const auto& entry : config.at("fuzz")) {
      const std::string where = "fuzz[" + std::to_string(i) + "]";
      check_keys(entry, where, {"label", "identity", "ranges", "count", "acc", "tolerance"});
      const std::string identity = identity_of(entry, where);
      const CheckOptions options = entry_options(entry, base, where);
      const FuzzRanges ranges = fuzz_ranges(entry.value("ranges", json()), where);
      if (!entry.contains("count") || !entry.at("count").is_number_unsigned()) {
        config_fail(where, "'count' must be a nonnegative integer");
      }
      const auto count = entry.at("count").get<std::size_t>();
      // Each block gets its own stream so editing one block leaves the others unchanged.
      const std::uint64_t block_seed = seed + i++;
      append(guarded(where, [&] {
        return run_instances(identity, fuzz_instances(identity, ranges, block_seed, count), options, parallelism);
      }));
      report.seed = seed;
    }
  }
  report.runtime_seconds = seconds_since(start);
  return report;
}

VerificationReport run_suite_file(const std::string& path, int parallelism_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return run_suite(config, parallelism_override);
}

}  // namespace mzv
