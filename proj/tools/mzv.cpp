// Command-line front end: eval, dual, verify, fuzz, suite, quad.
// Exit codes: 0 all checks pass, 1 some check failed, 2 usage / input / config error.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mzv/error.hpp"
#include "mzv/identities.hpp"
#include "mzv/quadrature.hpp"
#include "mzv/report.hpp"
#include "mzv/spec_json.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct OutputFlags {
  bool json = false;
  std::string out;
};

void add_output_flags(CLI::App* cmd, OutputFlags& flags) {
  cmd->add_flag("--json", flags.json, "Print the JSON report instead of a table");
  cmd->add_option("--out", flags.out, "Also write the JSON report to this file");
}

int emit(const mzv::VerificationReport& report, const OutputFlags& flags) {
  const auto document = mzv::report_to_json(report);
  if (!flags.out.empty()) {
    std::ofstream file(flags.out);
    if (!file) throw mzv::ConfigError("cannot write '" + flags.out + "'");
    file << document.dump(2) << '\n';
  }
  if (flags.json) {
    std::cout << document.dump(2) << '\n';
  } else {
    std::cout << mzv::format_table(report);
  }
  return report.all_pass() ? 0 : kExitFail;
}

mzv::ParamValue param_from_text(const std::string& text) {
  std::int64_t i = 0;
  if (auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
      ec == std::errc() && end == text.data() + text.size()) {
    return i;
  }
  double d = 0;
  if (auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
      ec == std::errc() && end == text.data() + text.size()) {
    return d;
  }
  return text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mzv::ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void print_result(const std::string& label, const mzv::EvalResult& r, bool json) {
  if (json) {
    auto document = mzv::result_to_json(r);
    document["label"] = label;
    std::cout << document.dump(2) << '\n';
    return;
  }
  std::printf("%s = %.17g\n  tail_bound %.3e  cutoff %lld  mode %s%s%s\n", label.c_str(), r.value, r.tail_bound,
              static_cast<long long>(r.cutoff), mzv::to_string(r.mode).c_str(),
              r.accuracy_met ? "" : "  (accuracy target not met)", r.slow_convergence ? "  (slow convergence)" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple zeta values: evaluation and identity verification"};
  app.set_version_flag("--version", std::string(mzv::kToolName) + " " + mzv::kToolVersion);
  app.require_subcommand(1);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate zeta(index) or a nested-sum spec");
  std::string eval_index;
  std::string eval_spec;
  double eval_acc = 1e-10;
  std::int64_t eval_max_cutoff = mzv::EvalOptions{}.max_cutoff;
  bool eval_json = false;
  eval->add_option("index", eval_index, "Index such as \"(1,2)\" or \"{1}^2,3\"");
  eval->add_option("--spec", eval_spec, "JSON nested-sum spec file (docs/spec-format.md)");
  eval->add_option("--acc", eval_acc, "Target accuracy")->check(CLI::PositiveNumber);
  eval->add_option("--max-cutoff", eval_max_cutoff, "Largest truncation point");
  eval->add_flag("--json", eval_json, "Print JSON");

  // dual
  auto* dual = app.add_subcommand("dual", "Print the dual index");
  std::string dual_index;
  dual->add_option("index", dual_index, "Admissible index")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "Check one instance of a named identity");
  std::string verify_identity;
  std::map<std::string, std::string> verify_params;
  double verify_acc = 1e-8;
  double verify_tol = 0.0;
  OutputFlags verify_out;
  verify->add_option("identity", verify_identity, "Identity name (see --list)");
  for (const char* name : {"p", "q", "r", "a", "m", "n", "l", "index"}) {
    verify->add_option(std::string("--") + name, verify_params[name], std::string("Parameter ") + name);
  }
  bool verify_list = false;
  verify->add_flag("--list", verify_list, "List identities and their parameters");
  verify->add_option("--acc", verify_acc, "Per-side accuracy target")->check(CLI::PositiveNumber);
  verify->add_option("--tol", verify_tol, "Tolerance on the difference (default 10 * acc)");
  add_output_flags(verify, verify_out);

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "Seeded random instances of an identity");
  std::string fuzz_identity;
  std::uint64_t fuzz_seed = 0;
  std::size_t fuzz_count = 10;
  std::string fuzz_ranges;
  double fuzz_acc = 1e-8;
  double fuzz_tol = 0.0;
  int fuzz_jobs = 1;
  OutputFlags fuzz_out;
  fuzz->add_option("--identity", fuzz_identity, "Identity name")->required();
  fuzz->add_option("--seed", fuzz_seed, "Generator seed (std::mt19937_64)");
  fuzz->add_option("--count", fuzz_count, "Number of instances");
  fuzz->add_option("--ranges", fuzz_ranges, "Overrides such as \"p=1:3,a=-0.5:1,index=(1,2)|(3)\"");
  fuzz->add_option("--acc", fuzz_acc, "Per-side accuracy target")->check(CLI::PositiveNumber);
  fuzz->add_option("--tol", fuzz_tol, "Tolerance on the difference (default 10 * acc)");
  fuzz->add_option("--jobs", fuzz_jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_output_flags(fuzz, fuzz_out);

  // suite
  auto* suite = app.add_subcommand("suite", "Run a suite configuration (docs/suite-config.md)");
  std::string suite_config;
  int suite_jobs = 0;
  OutputFlags suite_out;
  suite->add_option("--config", suite_config, "Config file")->required();
  suite->add_option("--jobs", suite_jobs, "Worker threads (overrides the config)");
  add_output_flags(suite, suite_out);

  // quad
  auto* quad = app.add_subcommand("quad", "Evaluate one of the double-integral representations");
  std::string quad_which;
  int qp = 1, qq = 1, qr = 0, qm = 0, qn = 0, ql = 0;
  double qa = 0.0;
  double quad_acc = 1e-10;
  bool quad_json = false;
  quad->add_option("integral", quad_which, "e2-anchor | e3-anchor | ones-power | ones-sum | ipqar | three-integrals")
      ->required()
      ->check(CLI::IsMember({"e2-anchor", "e3-anchor", "ones-power", "ones-sum", "ipqar", "three-integrals"}));
  quad->add_option("--p", qp);
  quad->add_option("--q", qq);
  quad->add_option("--r", qr);
  quad->add_option("--m", qm);
  quad->add_option("--n", qn);
  quad->add_option("--l", ql);
  quad->add_option("--a", qa);
  quad->add_option("--acc", quad_acc, "Target accuracy")->check(CLI::PositiveNumber);
  quad->add_flag("--json", quad_json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*eval) {
      if (eval_index.empty() == eval_spec.empty()) {
        std::cerr << "eval: give exactly one of an index or --spec\n";
        return kExitUsage;
      }
      mzv::EvalOptions options;
      options.max_cutoff = eval_max_cutoff;
      if (!eval_spec.empty()) {
        const auto spec = mzv::parse_spec(read_file(eval_spec));
        print_result(eval_spec, mzv::evaluate(spec, eval_acc, options), eval_json);
      } else {
        const auto index = mzv::parse_index(eval_index);
        print_result("zeta" + index.to_string(), mzv::mzv(index, eval_acc, options), eval_json);
      }
      return 0;
    }
    if (*dual) {
      std::cout << mzv::dual(mzv::parse_index(dual_index)).to_string() << '\n';
      return 0;
    }
    if (*verify) {
      if (verify_list) {
        for (const auto& name : mzv::identity_names()) {
          std::cout << name;
          for (const auto& p : mzv::identity_parameters(name)) std::cout << " --" << p;
          std::cout << '\n';
        }
        return 0;
      }
      if (verify_identity.empty()) {
        std::cerr << "verify: identity name required\n";
        return kExitUsage;
      }
      const auto& names = mzv::identity_parameters(verify_identity);
      mzv::ParamList params;
      for (const auto& name : names) {
        const auto& text = verify_params[name];
        if (text.empty()) throw mzv::PreconditionError(verify_identity + ": missing --" + name);
        params.emplace_back(name, name == "index" ? mzv::ParamValue(text) : param_from_text(text));
      }
      for (const auto& [name, text] : verify_params) {
        if (!text.empty() && std::find(names.begin(), names.end(), name) == names.end()) {
          throw mzv::PreconditionError(verify_identity + " takes no --" + name);
        }
      }
      mzv::CheckOptions options;
      options.acc = verify_acc;
      options.tolerance = verify_tol;
      mzv::VerificationReport report;
      report.command = "verify";
      report.config = {{"identity", verify_identity}, {"acc", options.acc}, {"tolerance", options.effective_tolerance()}};
      report.checks.push_back(mzv::run_check(verify_identity, params, options));
      return emit(report, verify_out);
    }
    if (*fuzz) {
      mzv::CheckOptions options;
      options.acc = fuzz_acc;
      options.tolerance = fuzz_tol;
      const auto ranges = mzv::parse_fuzz_ranges(fuzz_ranges);
      return emit(mzv::run_fuzz(fuzz_identity, ranges, fuzz_seed, fuzz_count, options, fuzz_jobs), fuzz_out);
    }
    if (*suite) {
      return emit(mzv::run_suite_file(suite_config, suite_jobs), suite_out);
    }
    if (*quad) {
      if (quad_which == "e2-anchor") {
        mzv::E2Integrand f;
        f.t2_power = 2;
        print_result("int_E2 t2^2 dt1 dt2/((1-t1) t2)", mzv::integrate_E2(f, quad_acc), quad_json);
      } else if (quad_which == "e3-anchor") {
        print_result("int_E3 dt1/(1-t1)^2 dt2/t2 dt3/t3", mzv::zeta2_from_E3(quad_acc), quad_json);
      } else if (quad_which == "ones-power") {
        const auto forms = mzv::ones_power_forms(qm, qn, quad_acc);
        print_result("log(1/(1-t1)) form", forms.first, quad_json);
        print_result("log((1-t1)/(1-t2)) form", forms.second, quad_json);
      } else if (quad_which == "ones-sum") {
        print_result("double integral", mzv::ones_sum_value(qp, qq, qr, ql, quad_acc), quad_json);
      } else if (quad_which == "ipqar") {
        const auto forms = mzv::I_pqar(qp, qq, qa, qr, quad_acc);
        print_result("I(p,q;a,r)", forms.first, quad_json);
        print_result("dual form", forms.second, quad_json);
      } else {
        const auto forms = mzv::three_integrals(qp, qq, qr, qm, quad_acc);
        const char* labels[] = {"(t1/t2)^m form", "u2^m form", "(1-v1)^m form"};
        for (int i = 0; i < 3; ++i) print_result(labels[i], forms[static_cast<std::size_t>(i)], quad_json);
      }
      return 0;
    }
  } catch (const mzv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
