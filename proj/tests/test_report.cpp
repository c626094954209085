#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "mzv/error.hpp"
#include "mzv/report.hpp"
#include "mzv/spec_json.hpp"

using namespace mzv;
using nlohmann::json;

namespace {

std::vector<ParamList> params_of(const VerificationReport& r) {
  std::vector<ParamList> out;
  for (const auto& c : r.checks) out.push_back(c.params);
  return out;
}

json small_suite() {
  return json::parse(R"({
    "acc": 1e-7,
    "seed": 42,
    "parallelism": 2,
    "grids": [
      {"identity": "duality", "ranges": {"weight": {"min": 2, "max": 4}}, "tolerance": 1e-6},
      {"identity": "alternating_sums", "ranges": {"m": [1, 2], "p": [1, 2]}}
    ],
    "fuzz": [
      {"identity": "param_duality", "count": 5, "tolerance": 1e-5},
      {"identity": "vector_duality", "count": 3, "ranges": {"n": {"min": 1, "max": 2}}}
    ]
  })");
}

}  // namespace

TEST(SpecJson, RoundTrip) {
  NestedSumSpec spec;
  spec.positions.push_back({ShiftedPower{Shift::rational(1, 2), 1}, RisingFactorial{2}});
  spec.positions.push_back({ShiftedPower{Shift::real(0.25), 2}, ExtraPower{3, 1}, FiniteDifference{2, 3}});
  spec.log_power = 3;
  const json encoded = spec_to_json(spec);
  EXPECT_EQ(encoded.at("depth"), 2);
  EXPECT_EQ(encoded.at("positions")[0][0].at("shift"), "1/2");
  EXPECT_EQ(encoded.at("positions")[1][0].at("shift"), 0.25);
  EXPECT_EQ(spec_from_json(encoded), spec);
  EXPECT_EQ(parse_spec(encoded.dump()), spec);
}

TEST(SpecJson, DefaultsAndIntegerShift) {
  const auto spec = parse_spec(R"({"positions": [[{"type": "power", "exponent": 1},
                                                  {"type": "extra_power", "shift": 2, "exponent": 1}]]})");
  ASSERT_EQ(spec.depth(), 1);
  EXPECT_NEAR(evaluate(spec, 1e-12).value, 0.75, 1e-12);
  const auto integer = parse_spec(R"({"positions": [[{"type": "power", "shift": "3", "exponent": 2}]]})");
  EXPECT_EQ(std::get<ShiftedPower>(integer.positions[0][0]).shift, Shift::integer(3));
}

TEST(SpecJson, Errors) {
  EXPECT_THROW(parse_spec("{"), ParseError);
  EXPECT_THROW(parse_spec("[]"), ParseError);
  EXPECT_THROW(parse_spec(R"({"positions": []})"), ParseError);
  EXPECT_THROW(parse_spec(R"({"positions": [[{"type": "cosine"}]]})"), ParseError);
  EXPECT_THROW(parse_spec(R"({"positions": [[{"type": "power"}]]})"), ParseError);
  EXPECT_THROW(parse_spec(R"({"depth": 2, "positions": [[{"type": "power", "exponent": 2}]]})"), ParseError);
  EXPECT_THROW(parse_spec(R"({"positions": [[{"type": "power", "shift": "1/x", "exponent": 2}]]})"), ParseError);
  try {
    parse_spec("{\"positions\": [}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 15u);
  }
}

TEST(FuzzRanges, Parsing) {
  const auto r = parse_fuzz_ranges("p=1:3,a=-0.5:1,index=(1,2)|(3),m=2");
  EXPECT_EQ(r.at("p").kind, FuzzRange::Kind::kInteger);
  EXPECT_EQ(r.at("p").hi, 3);
  EXPECT_EQ(r.at("a").kind, FuzzRange::Kind::kReal);
  EXPECT_EQ(r.at("a").real_lo, -0.5);
  ASSERT_EQ(r.at("index").kind, FuzzRange::Kind::kChoice);
  EXPECT_EQ(r.at("index").choices, (std::vector<ParamValue>{std::string("(1,2)"), std::string("(3)")}));
  EXPECT_EQ(r.at("m").choices, (std::vector<ParamValue>{std::int64_t{2}}));
  EXPECT_TRUE(parse_fuzz_ranges("").empty());
  EXPECT_THROW(parse_fuzz_ranges("p"), ParseError);
  EXPECT_THROW(parse_fuzz_ranges("a=x:1"), ParseError);
}

TEST(Fuzz, DeterministicAndFeasible) {
  const auto first = fuzz_instances("param_duality", {}, 42, 10);
  const auto again = fuzz_instances("param_duality", {}, 42, 10);
  const auto other = fuzz_instances("param_duality", {}, 43, 10);
  ASSERT_EQ(first.size(), 10u);
  EXPECT_EQ(first, again);
  EXPECT_NE(first, other);
  for (const auto& p : first) EXPECT_TRUE(preconditions_hold("param_duality", p));
  const auto report = run_fuzz("param_duality", {}, 42, 10, {}, 2);
  EXPECT_EQ(report.checks.size(), 10u);
  EXPECT_TRUE(report.all_pass());
  EXPECT_EQ(params_of(report), first);
}

TEST(Fuzz, RedrawsInfeasibleAndRejectsEmpty) {
  // r = 2 forces m + p >= 3, which most draws violate
  const auto instances = fuzz_instances("shifted_sum_formula", {{"r", FuzzRange::integer(2, 2)}}, 7, 20);
  for (const auto& p : instances) EXPECT_TRUE(preconditions_hold("shifted_sum_formula", p));
  EXPECT_THROW(fuzz_instances("shifted_sum_formula", {{"p", FuzzRange::integer(1, 1)}, {"m", FuzzRange::integer(0, 0)},
                                        {"r", FuzzRange::integer(2, 2)}},
                              1, 1),
               PreconditionError);
  EXPECT_THROW(fuzz_instances("param_duality", {{"p", FuzzRange::integer(3, 1)}}, 1, 1), PreconditionError);
  EXPECT_THROW(fuzz_instances("param_duality", {{"zz", FuzzRange::integer(1, 1)}}, 1, 1), PreconditionError);
  EXPECT_TRUE(fuzz_instances("param_duality", {}, 42, 0).empty());
}

TEST(Fuzz, IndexAndVectorParameters) {
  for (const auto& p : fuzz_instances("duality", {{"weight", FuzzRange::integer(6, 6)}}, 3, 10)) {
    EXPECT_EQ(parse_index(std::get<std::string>(p[0].second)).weight(), 6);
  }
  for (const auto& p : fuzz_instances("vector_duality", {{"n", FuzzRange::integer(3, 3)}}, 3, 5)) {
    EXPECT_EQ(parse_index(std::get<std::string>(p[0].second)).depth(), 3);
    EXPECT_EQ(parse_index(std::get<std::string>(p[1].second)).depth(), 3);
  }
  const auto fixed = fuzz_instances("duality", {{"index", FuzzRange::choice({std::string("(2,3)")})}}, 3, 2);
  EXPECT_EQ(std::get<std::string>(fixed[1][0].second), "(2,3)");
}

TEST(Report, JsonShape) {
  VerificationReport report;
  report.command = "verify";
  report.checks.push_back(check_sum_formula(4, 2));
  const auto doc = report_to_json(report);
  EXPECT_EQ(doc.at("schema"), 1);
  EXPECT_EQ(doc.at("tool"), "mzv");
  EXPECT_EQ(doc.at("version"), kToolVersion);
  EXPECT_FALSE(doc.contains("seed"));
  const auto& check = doc.at("checks")[0];
  EXPECT_EQ(check.at("identity"), "sum_formula");
  EXPECT_EQ(check.at("params").at("m"), 4);
  EXPECT_EQ(check.at("sides").size(), 2u);
  EXPECT_TRUE(check.at("sides")[0].contains("tail_bound"));
  EXPECT_EQ(doc.at("summary").at("passed"), 1);
  EXPECT_NE(format_table(report).find("PASS  sum_formula"), std::string::npos);
}

TEST(Suite, RunsGridsAndFuzzDeterministically) {
  const auto a = run_suite(small_suite());
  const auto b = run_suite(small_suite(), 1);
  EXPECT_TRUE(a.all_pass());
  EXPECT_EQ(a.seed, std::optional<std::uint64_t>(42));
  EXPECT_EQ(a.checks.size(), 7u + 4u + 5u + 3u);
  EXPECT_EQ(params_of(a), params_of(b));
  auto strip_timing = [](const VerificationReport& r) {
    auto doc = report_to_json(r);
    doc["summary"].erase("runtime_seconds");
    return doc.dump();
  };
  EXPECT_EQ(strip_timing(a), strip_timing(b));
}

TEST(Suite, ConfigErrors) {
  EXPECT_THROW(run_suite(json::parse(R"({"grids": [{"identity": "nope"}]})")), ConfigError);
  EXPECT_THROW(run_suite(json::parse(R"({"grids": [{"identity": "composition_duality", "ranges": {"p": [1]}}]})")), ConfigError);
  EXPECT_THROW(run_suite(json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(run_suite(json::parse(R"({"acc": -1})")), ConfigError);
  EXPECT_THROW(run_suite(json::parse(R"({"fuzz": [{"identity": "composition_duality"}]})")), ConfigError);
  EXPECT_THROW(run_suite_file("/nonexistent/config.json"), ConfigError);
  const std::string path = testing::TempDir() + "broken.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(run_suite_file(path), ConfigError);
  std::remove(path.c_str());
}

TEST(Suite, EmptyConfigGivesEmptyPassingReport) {
  const auto r = run_suite(json::object());
  EXPECT_TRUE(r.checks.empty());
  EXPECT_TRUE(r.all_pass());
}
