#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mzv/identities.hpp"

namespace mzv {

inline constexpr const char* kToolName = "mzv";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

struct ReportSummary {
  std::size_t total = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  /// Checks where some evaluation stopped at the maximum cutoff / level.
  std::size_t accuracy_missed = 0;
  double max_abs_diff = 0.0;
};

struct VerificationReport {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::optional<std::uint64_t> seed;
  std::vector<IdentityCheck> checks;
  double runtime_seconds = 0.0;

  ReportSummary summary() const;
  bool all_pass() const { return summary().failed == 0; }
};

nlohmann::ordered_json check_to_json(const IdentityCheck& check);

/// The versioned report document. `runtime_seconds` (in "summary") is the only timing field.
nlohmann::ordered_json report_to_json(const VerificationReport& report);

/// One line per check plus a summary line.
std::string format_table(const VerificationReport& report);

// ---------------------------------------------------------------------------
// Seeded fuzzing
// ---------------------------------------------------------------------------

/// Where a fuzzed parameter is drawn from: an inclusive integer range, a real interval, or a
/// list of values.
struct FuzzRange {
  enum class Kind { kInteger, kReal, kChoice };
  Kind kind = Kind::kInteger;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  double real_lo = 0.0;
  double real_hi = 0.0;
  std::vector<ParamValue> choices;

  static FuzzRange integer(std::int64_t lo, std::int64_t hi);
  static FuzzRange real(double lo, double hi);
  static FuzzRange choice(std::vector<ParamValue> values);
  bool empty() const;
};

using FuzzRanges = std::map<std::string, FuzzRange>;

/// Built-in ranges per identity; `weight` stands for a random admissible index of that weight
/// (duality, ohno) and `n` / `entries` for random p and q vectors (vector_duality).
FuzzRanges default_fuzz_ranges(const std::string& identity);

/// "p=1:3,a=-0.5:1.0,index=(1,2)|(3)": lo:hi is an integer range when both ends are
/// integers and a real interval otherwise; '|' separates choices. Throws ParseError.
FuzzRanges parse_fuzz_ranges(const std::string& text);

/// Draws `count` feasible instances. Parameters are drawn in the identity's parameter
/// order from std::mt19937_64 seeded with `seed`; infeasible draws are redrawn. Throws
/// PreconditionError when a range is empty or no feasible instance turns up.
std::vector<ParamList> fuzz_instances(const std::string& identity, const FuzzRanges& overrides, std::uint64_t seed,
                                      std::size_t count);

VerificationReport run_fuzz(const std::string& identity, const FuzzRanges& overrides, std::uint64_t seed,
                            std::size_t count, const CheckOptions& options, int parallelism = 1);

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

/// Runs every grid and fuzz block of a suite configuration (docs/suite-config.md).
/// Throws ConfigError for malformed configurations.
VerificationReport run_suite(const nlohmann::json& config, int parallelism_override = 0);

/// Reads the configuration file, then runs it. Throws ConfigError when it is missing or
/// is not valid JSON.
VerificationReport run_suite_file(const std::string& path, int parallelism_override = 0);

}  // namespace mzv
