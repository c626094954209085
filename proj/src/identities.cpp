#include "mzv/identities.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "mzv/error.hpp"
#include "mzv/kahan.hpp"
#include "mzv/quadrature.hpp"

namespace mzv {

std::string to_string(const ParamValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) {
    char buffer[32];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, *d);
    return std::string(buffer, end);
  }
  return std::get<std::string>(value);
}

namespace {

constexpr int kMaxThreeWayM = 4;

// ---------------------------------------------------------------------------
// Evaluation helpers
// ---------------------------------------------------------------------------

/// Evaluates specs through a per-check cache keyed by canonical form, so structurally equal
/// terms on both sides of an identity are computed once and compare exactly.
class Evaluator {
 public:
  explicit Evaluator(const CheckOptions& options) : options_(options) {}

  EvalResult operator()(const NestedSumSpec& spec) {
    NestedSumSpec key = canonicalize(spec);
    for (const auto& [cached_spec, result] : cache_) {
      if (cached_spec == key) return result;
    }
    EvalResult result = evaluate(key, options_.acc, options_.eval);
    cache_.emplace_back(std::move(key), result);
    return result;
  }

  EvalResult zeta(const std::vector<int>& parts) { return (*this)(NestedSumSpec::from_index(MzvIndex(parts))); }

 private:
  const CheckOptions& options_;
  std::vector<std::pair<NestedSumSpec, EvalResult>> cache_;
};

/// Accumulates a signed combination of evaluations into one side.
class SideSum {
 public:
  void add(const EvalResult& r, double coefficient = 1.0) {
    sum_ += coefficient * r.value;
    bound_ += std::abs(coefficient) * r.tail_bound;
    cutoff_ = std::max(cutoff_, r.cutoff);
    met_ = met_ && r.accuracy_met;
    mode_ = r.mode;
    slow_ = slow_ || r.slow_convergence;
  }

  void add_exact(double value) { sum_ += value; }

  EvalResult result() const {
    EvalResult out;
    out.value = sum_.value();
    out.tail_bound = bound_;
    out.cutoff = cutoff_;
    out.mode = mode_;
    out.accuracy_met = met_;
    out.slow_convergence = slow_;
    return out;
  }

 private:
  CompensatedSum sum_;
  double bound_ = 0.0;
  std::int64_t cutoff_ = 0;
  bool met_ = true;
  bool slow_ = false;
  EvalMode mode_ = EvalMode::kFloatExtrapolated;
};

EvalResult exact_value(double value) {
  EvalResult out;
  out.value = value;
  out.mode = EvalMode::kExactTruncated;
  return out;
}

IdentityCheck finish(std::string identity, ParamList params, std::vector<Side> sides, const CheckOptions& options) {
  IdentityCheck check;
  check.identity = std::move(identity);
  check.params = std::move(params);
  double bound_sum = 0.0;
  double magnitude = 0.0;
  for (std::size_t i = 0; i < sides.size(); ++i) {
    bound_sum += sides[i].result.tail_bound;
    magnitude = std::max(magnitude, std::abs(sides[i].result.value));
    check.accuracy_met = check.accuracy_met && sides[i].result.accuracy_met;
    for (std::size_t j = i + 1; j < sides.size(); ++j) {
      check.abs_diff = std::max(check.abs_diff, std::abs(sides[i].result.value - sides[j].result.value));
    }
  }
  check.sides = std::move(sides);
  check.error_budget = bound_sum + 16 * std::numeric_limits<double>::epsilon() * (1.0 + magnitude);
  check.tolerance = std::max(options.effective_tolerance(), check.error_budget);
  check.pass = check.abs_diff <= check.tolerance;
  return check;
}

std::vector<int> with_last_incremented(std::vector<int> parts, int increment) {
  parts.back() += increment;
  return parts;
}

std::vector<int> ones_then(int ones, const std::vector<int>& rest) {
  std::vector<int> parts(static_cast<std::size_t>(ones), 1);
  parts.insert(parts.end(), rest.begin(), rest.end());
  return parts;
}

std::string vector_string(const std::vector<int>& v) { return MzvIndex(v).to_string(); }

// ---------------------------------------------------------------------------
// Preconditions
// ---------------------------------------------------------------------------

void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

void require_admissible(const MzvIndex& index) {
  if (!index.admissible()) {
    throw NotAdmissibleError("index " + index.to_string() + " is not admissible (last part is 1)");
  }
}

void validate_param_duality(const ParamDualityParams& t) {
  require(t.p >= 1 && t.q >= 1, "param_duality needs p, q >= 1");
  require(t.r >= 0 && t.r <= kMaxFactorDegree, "param_duality needs 0 <= r <= " + std::to_string(kMaxFactorDegree));
  require(t.a > -1.0, "param_duality needs a > -1");
  require(t.m >= 0, "param_duality needs m >= 0");
}

void validate_shifted_sum_formula(int p, int m, int r) {
  require(p >= 1, "shifted_sum_formula needs p >= 1");
  require(m >= 0 && r >= 0, "shifted_sum_formula needs m, r >= 0");
  require(r <= kMaxFactorDegree, "shifted_sum_formula needs r <= " + std::to_string(kMaxFactorDegree));
  require(m + p >= r + 1, "shifted_sum_formula needs m + p >= r + 1");
}

void validate_vector_duality(const std::vector<int>& pvec, const std::vector<int>& qvec, double a) {
  require(!pvec.empty() && pvec.size() == qvec.size(), "vector_duality needs p and q of equal length >= 1");
  for (int v : pvec) require(v >= 1, "vector_duality entries must be positive");
  for (int v : qvec) require(v >= 1, "vector_duality entries must be positive");
  require(a > -1.0, "vector_duality needs a > -1");
}

void validate_three_way(int p, int q, int r, int m) {
  require(p >= 0 && q >= 0 && r >= 0 && m >= 0, "three_way needs p, q, r, m >= 0");
  require(m <= kMaxThreeWayM, "three_way supports m <= " + std::to_string(kMaxThreeWayM));
}

}  // namespace

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

IdentityCheck check_duality(const MzvIndex& index, const CheckOptions& options) {
  require_admissible(index);
  const MzvIndex other = dual(index);
  Evaluator eval(options);
  std::vector<Side> sides{{"zeta" + index.to_string(), eval.zeta(index.parts())},
                          {"zeta" + other.to_string(), eval.zeta(other.parts())}};
  return finish("duality", {{"index", index.to_string()}}, std::move(sides), options);
}

IdentityCheck check_sum_formula(int m, int p, const CheckOptions& options) {
  require(p >= 1 && m >= p, "sum_formula needs m >= p >= 1");
  Evaluator eval(options);
  SideSum lhs;
  for (const auto& alpha : compositions(m, p, 1)) lhs.add(eval.zeta(with_last_incremented(alpha, 1)));
  std::vector<Side> sides{{"sum_{|alpha|=m} zeta(alpha_1..alpha_p+1)", lhs.result()},
                          {"zeta(m+1)", eval.zeta({m + 1})}};
  return finish("sum_formula", {{"m", std::int64_t{m}}, {"p", std::int64_t{p}}}, std::move(sides), options);
}

IdentityCheck check_ohno(const MzvIndex& index, int m, const CheckOptions& options) {
  require_admissible(index);
  require(m >= 0, "ohno needs m >= 0");
  const MzvIndex other = dual(index);
  Evaluator eval(options);
  SideSum lhs;
  SideSum rhs;
  for (const auto& c : compositions(m, index.depth(), 0)) lhs.add(eval.zeta(index.shifted(c).parts()));
  for (const auto& d : compositions(m, other.depth(), 0)) rhs.add(eval.zeta(other.shifted(d).parts()));
  std::vector<Side> sides{{"sum_{|c|=m} zeta(k+c)", lhs.result()}, {"sum_{|d|=m} zeta(k'+d)", rhs.result()}};
  return finish("ohno", {{"index", index.to_string()}, {"m", std::int64_t{m}}}, std::move(sides), options);
}

IdentityCheck check_composition_duality(int p, int q, int m, const CheckOptions& options) {
  require(p >= 1 && q >= 1, "composition_duality needs p, q >= 1");
  require(m >= 0, "composition_duality needs m >= 0");
  Evaluator eval(options);
  SideSum lhs;
  SideSum rhs;
  for (const auto& alpha : compositions(p + m, p, 1)) lhs.add(eval.zeta(with_last_incremented(alpha, q)));
  for (const auto& beta : compositions(q + m, q, 1)) rhs.add(eval.zeta(with_last_incremented(beta, p)));
  std::vector<Side> sides{{"sum_{|alpha|=p+m} zeta(..., alpha_p+q)", lhs.result()},
                          {"sum_{|beta|=q+m} zeta(..., beta_q+p)", rhs.result()}};
  return finish("composition_duality", {{"p", std::int64_t{p}}, {"q", std::int64_t{q}}, {"m", std::int64_t{m}}}, std::move(sides),
                options);
}

IdentityCheck check_param_duality(const ParamDualityParams& t, const CheckOptions& options) {
  validate_param_duality(t);
  const Shift shift = Shift::real(t.a);
  Evaluator eval(options);
  SideSum lhs;
  for (const auto& alpha : compositions(t.p + t.m, t.p, 1)) {
    NestedSumSpec spec;
    for (int e : alpha) spec.positions.push_back({ShiftedPower{shift, e}});
    spec.positions.back().push_back(ExtraPower{t.r, t.q});
    lhs.add(eval(spec));
  }
  SideSum rhs;
  for (const auto& beta : compositions(t.q + t.m, t.q, 1)) {
    NestedSumSpec spec;
    for (int e : beta) spec.positions.push_back({ShiftedPower{shift, e}});
    spec.positions.front().push_back(RisingFactorial{t.r});
    spec.positions.back().push_back(FiniteDifference{t.r, t.p});
    rhs.add(eval(spec));
  }
  std::vector<Side> sides{{"sum (k+a)^-alpha (k_p+r)^-q", lhs.result()},
                          {"(1/r!) sum rising(l_1) (l+a)^-beta diff_r(l_q)^-p", rhs.result()}};
  return finish("param_duality",
                {{"p", std::int64_t{t.p}},
                 {"q", std::int64_t{t.q}},
                 {"r", std::int64_t{t.r}},
                 {"a", t.a},
                 {"m", std::int64_t{t.m}}},
                std::move(sides), options);
}

IdentityCheck check_shifted_sum_formula(int p, int m, int r, const CheckOptions& options) {
  validate_shifted_sum_formula(p, m, r);
  const Shift shift = Shift::integer(r);
  Evaluator eval(options);
  SideSum lhs;
  for (const auto& alpha : compositions(p + m, p, 1)) {
    NestedSumSpec spec;
    for (int e : with_last_incremented(alpha, 1)) spec.positions.push_back({ShiftedPower{shift, e}});
    lhs.add(eval(spec));
  }
  NestedSumSpec rhs_spec;
  rhs_spec.positions.push_back({RisingFactorial{r}, ExtraPower{r, m + 1}, FiniteDifference{r, p}});
  std::vector<Side> sides{{"truncated sum (k+r)^-alpha (k_p+r)^-1", lhs.result()},
                          {"(1/r!) sum rising(l) (l+r)^-(m+1) diff_r(l)^-p", eval(rhs_spec)}};
  return finish("shifted_sum_formula", {{"p", std::int64_t{p}}, {"m", std::int64_t{m}}, {"r", std::int64_t{r}}}, std::move(sides),
                options);
}

IdentityCheck check_vector_duality(const std::vector<int>& pvec, const std::vector<int>& qvec, double a,
                         const CheckOptions& options) {
  validate_vector_duality(pvec, qvec, a);
  const Shift shift = Shift::real(a);
  auto build = [&shift](const std::vector<int>& run_lengths, const std::vector<int>& exponents) {
    NestedSumSpec spec;
    for (std::size_t block = 0; block < run_lengths.size(); ++block) {
      for (int i = 0; i < run_lengths[block]; ++i) spec.positions.push_back({ShiftedPower{shift, 1}});
      spec.positions.back().push_back(ExtraPower{0, exponents[block]});
    }
    return spec;
  };
  std::vector<int> q_reversed(qvec.rbegin(), qvec.rend());
  std::vector<int> p_reversed(pvec.rbegin(), pvec.rend());
  Evaluator eval(options);
  std::vector<Side> sides{{"sum 1/prod(k+a) k_{p1}^q1 ... k_|p|^qn", eval(build(pvec, qvec))},
                          {"sum 1/prod(l+a) l_{qn}^pn ... l_|q|^p1", eval(build(q_reversed, p_reversed))}};
  return finish("vector_duality", {{"p", vector_string(pvec)}, {"q", vector_string(qvec)}, {"a", a}}, std::move(sides), options);
}

IdentityCheck check_three_way(int p, int q, int r, int m, const CheckOptions& options) {
  validate_three_way(p, q, r, m);
  Evaluator eval(options);
  const Shift zero = Shift::integer(0);

  SideSum first;
  for (const auto& alpha : compositions(q + r + 1, r + 1, 1)) {
    NestedSumSpec spec;
    for (int i = 0; i < p; ++i) spec.positions.push_back({ShiftedPower{zero, 1}});
    for (int e : alpha) spec.positions.push_back({ShiftedPower{Shift::integer(m), e}});
    spec.positions.back().push_back(ExtraPower{0, 1});
    first.add(eval(spec));
  }

  SideSum second;
  for (const auto& beta : compositions(p + r + 1, p + 1, 1)) {
    NestedSumSpec spec;
    for (int e : beta) spec.positions.push_back({ShiftedPower{zero, e}});
    spec.positions.back().push_back(ExtraPower{m, q + 1});
    second.add(eval(spec));
  }

  SideSum third;
  for (int j = 0; j <= m; ++j) {
    const double coefficient = static_cast<double>((j % 2 ? -1 : 1) * binomial(m, j));
    for (const auto& beta : compositions(p + r + 1, r + 1, 1)) {
      NestedSumSpec spec;
      for (int i = 0; i < q; ++i) spec.positions.push_back({ShiftedPower{zero, 1}});
      for (int e : with_last_incremented(beta, 1)) spec.positions.push_back({ShiftedPower{Shift::integer(j), e}});
      third.add(eval(spec), coefficient);
    }
  }
  std::vector<Side> sides{{"sum k^-1 (k+m)^-alpha", first.result()},
                          {"sum l^-beta (l_{p+1}+m)^-(q+1)", second.result()},
                          {"sum_j (-1)^j C(m,j) sum (l+j)^-beta", third.result()}};
  return finish("three_way",
                {{"p", std::int64_t{p}}, {"q", std::int64_t{q}}, {"r", std::int64_t{r}}, {"m", std::int64_t{m}}},
                std::move(sides), options);
}

IdentityCheck check_restricted_sum(int p, int q, int r, const CheckOptions& options) {
  require(p >= 0 && q >= 0 && r >= 0, "restricted_sum needs p, q, r >= 0");
  Evaluator eval(options);
  SideSum ones_p;
  for (const auto& alpha : compositions(q + r + 1, r + 1, 1)) {
    ones_p.add(eval.zeta(ones_then(p, with_last_incremented(alpha, 1))));
  }
  SideSum leading;
  for (const auto& beta : compositions(p + r + 1, p + 1, 1)) leading.add(eval.zeta(with_last_incremented(beta, q + 1)));
  SideSum ones_q;
  for (const auto& beta : compositions(p + r + 1, r + 1, 1)) {
    ones_q.add(eval.zeta(ones_then(q, with_last_incremented(beta, 1))));
  }
  std::vector<Side> sides{{"sum zeta({1}^p, alpha..., alpha_{r+1}+1)", ones_p.result()},
                          {"sum zeta(beta_0, ..., beta_p+q+1)", leading.result()},
                          {"sum zeta({1}^q, beta..., beta_{r+1}+1)", ones_q.result()}};
  return finish("restricted_sum", {{"p", std::int64_t{p}}, {"q", std::int64_t{q}}, {"r", std::int64_t{r}}},
                std::move(sides), options);
}

IdentityCheck check_alternating_sums(int m, int p, const CheckOptions& options) {
  require(m >= 1 && p >= 1, "alternating_sums needs m, p >= 1");
  Evaluator eval(options);
  const auto alphas = compositions(m + p, p, 1);

  // S_p counts the compositions: every term is 1.
  const auto s_p = static_cast<std::int64_t>(alphas.size());
  const std::int64_t expected_s_p = binomial(m + p - 1, m);

  SideSum alternating;
  for (int j = 1; j < p; ++j) {
    const double sign = (j % 2) ? 1.0 : -1.0;
    for (const auto& alpha : alphas) {
      std::vector<int> tail(alpha.begin() + j, alpha.end());
      alternating.add(eval.zeta(with_last_incremented(tail, 1)), sign);
    }
  }
  alternating.add_exact((p % 2 ? 1.0 : -1.0) * static_cast<double>(s_p));

  SideSum closed_form;
  closed_form.add(eval.zeta({m + p}));
  NestedSumSpec correction;
  correction.positions.emplace_back();
  if (p > 1) correction.positions[0].push_back(ShiftedPower{Shift::integer(0), p - 1});
  correction.positions[0].push_back(ExtraPower{1, m + 1});
  closed_form.add(eval(correction), -1.0);

  // S: the k_1 = 1 slice, i.e. a depth p-1 sum over 1 < k_2 < ... < k_p (shift by one).
  SideSum direct;
  if (p == 1) {
    direct.add_exact(static_cast<double>(alphas.size()));
  } else {
    for (const auto& alpha : alphas) {
      std::vector<int> tail(alpha.begin() + 1, alpha.end());
      direct.add(eval(NestedSumSpec::from_index(MzvIndex(with_last_incremented(tail, 1)), Shift::integer(1))));
    }
  }
  std::vector<Side> sides{{"S_1 - S_2 + ... + (-1)^(p-1) S_p", alternating.result()},
                          {"zeta(m+p) - sum l^(1-p) (l+1)^(-m-1)", closed_form.result()},
                          {"S (k_1 = 1 slice)", direct.result()}};
  IdentityCheck check = finish("alternating_sums", {{"m", std::int64_t{m}}, {"p", std::int64_t{p}}}, std::move(sides), options);
  check.note = "S_p = " + std::to_string(s_p) + ", C(m+p-1, m) = " + std::to_string(expected_s_p);
  if (s_p != expected_s_p) check.pass = false;
  return check;
}

// ---------------------------------------------------------------------------
// Quadrature cross-checks
// ---------------------------------------------------------------------------

IdentityCheck check_quad_e2_anchor(const CheckOptions& options) {
  E2Integrand f;
  f.t2_power = 2;
  Evaluator eval(options);
  NestedSumSpec series;
  series.positions.push_back({ShiftedPower{Shift::integer(0), 1}, ExtraPower{2, 1}});
  std::vector<Side> sides{{"int_E2 t2^2 dt1 dt2/((1-t1) t2)", integrate_E2(f, options.acc)},
                          {"sum 1/(k(k+2))", eval(series)},
                          {"3/4", exact_value(0.75)}};
  return finish("quad_e2_anchor", {}, std::move(sides), options);
}

IdentityCheck check_quad_e3_anchor(const CheckOptions& options) {
  Evaluator eval(options);
  std::vector<Side> sides{{"int_E3 dt1/(1-t1)^2 dt2/t2 dt3/t3", zeta2_from_E3(options.acc)},
                          {"zeta(2)", eval.zeta({2})}};
  return finish("quad_e3_anchor", {}, std::move(sides), options);
}

IdentityCheck check_quad_ones_power(int m, int n, const CheckOptions& options) {
  require(m >= 0 && n >= 0, "quad_ones_power needs m, n >= 0");
  const TwoFormResult forms = ones_power_forms(m, n, options.acc);
  Evaluator eval(options);
  std::vector<Side> sides{{"log(1/(1-t1)) form", forms.first},
                          {"log((1-t1)/(1-t2)) form", forms.second},
                          {"zeta({1}^m, n+2)", eval.zeta(ones_then(m, {n + 2}))}};
  return finish("quad_ones_power", {{"m", std::int64_t{m}}, {"n", std::int64_t{n}}}, std::move(sides), options);
}

IdentityCheck check_quad_ones_sum(int p, int q, int r, int l, const CheckOptions& options) {
  require(p >= 0 && q >= 0 && r >= 0 && l >= 0, "quad_ones_sum needs nonnegative parameters");
  Evaluator eval(options);
  SideSum series;
  for (const auto& alpha : compositions(q + r + 1, r + 1, 1)) {
    series.add(eval.zeta(ones_then(p, with_last_incremented(alpha, l + 1))));
  }
  std::vector<Side> sides{{"double integral", ones_sum_value(p, q, r, l, options.acc)},
                          {"sum zeta({1}^p, alpha..., alpha_{r+1}+l+1)", series.result()}};
  return finish("quad_ones_sum",
                {{"p", std::int64_t{p}}, {"q", std::int64_t{q}}, {"r", std::int64_t{r}}, {"l", std::int64_t{l}}},
                std::move(sides), options);
}

IdentityCheck check_quad_ipqar(int p, int q, double a, int r, const CheckOptions& options) {
  require(p >= 1 && q >= 1 && r >= 0 && a > -1.0, "quad_ipqar needs p, q >= 1, r >= 0, a > -1");
  const TwoFormResult forms = I_pqar(p, q, a, r, options.acc);
  NestedSumSpec spec;
  for (int i = 0; i < p; ++i) spec.positions.push_back({ShiftedPower{Shift::real(a), 1}});
  spec.positions.back().push_back(ExtraPower{r, q});
  Evaluator eval(options);
  std::vector<Side> sides{{"collapsed I(p,q;a,r)", forms.first},
                          {"dual form", forms.second},
                          {"sum 1/prod(k+a) (k_p+r)^-q", eval(spec)}};
  return finish("quad_ipqar", {{"p", std::int64_t{p}}, {"q", std::int64_t{q}}, {"a", a}, {"r", std::int64_t{r}}},
                std::move(sides), options);
}

IdentityCheck check_quad_three_integrals(int p, int q, int r, int m, const CheckOptions& options) {
  validate_three_way(p, q, r, m);
  const auto integrals = three_integrals(p, q, r, m, options.acc);
  Evaluator eval(options);
  SideSum series;
  for (const auto& beta : compositions(p + r + 1, p + 1, 1)) {
    NestedSumSpec spec;
    for (int e : beta) spec.positions.push_back({ShiftedPower{Shift::integer(0), e}});
    spec.positions.back().push_back(ExtraPower{m, q + 1});
    series.add(eval(spec));
  }
  std::vector<Side> sides{{"(t1/t2)^m form", integrals[0]},
                          {"u2^m form", integrals[1]},
                          {"(1-v1)^m form", integrals[2]},
                          {"series sum l^-beta (l_{p+1}+m)^-(q+1)", series.result()}};
  return finish("quad_three_integrals",
                {{"p", std::int64_t{p}}, {"q", std::int64_t{q}}, {"r", std::int64_t{r}}, {"m", std::int64_t{m}}},
                std::move(sides), options);
}

// ---------------------------------------------------------------------------
// Named dispatch
// ---------------------------------------------------------------------------

namespace {

class Args {
 public:
  Args(const std::string& identity, const ParamList& params) : identity_(identity), params_(params) {}

  const ParamValue& raw(const std::string& name) const {
    for (const auto& [key, value] : params_) {
      if (key == name) return value;
    }
    throw PreconditionError(identity_ + ": missing parameter '" + name + "'");
  }

  int integer(const std::string& name) const {
    const ParamValue& v = raw(name);
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      if (*i < std::numeric_limits<int>::min() || *i > std::numeric_limits<int>::max()) {
        throw PreconditionError(identity_ + ": parameter '" + name + "' out of range");
      }
      return static_cast<int>(*i);
    }
    if (const auto* d = std::get_if<double>(&v); d && *d == std::floor(*d) && std::abs(*d) < 1e9) {
      return static_cast<int>(*d);
    }
    if (const auto* s = std::get_if<std::string>(&v)) {
      int out = 0;
      const auto [end, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
      if (ec == std::errc() && end == s->data() + s->size()) return out;
    }
    throw PreconditionError(identity_ + ": parameter '" + name + "' must be an integer");
  }

  double real(const std::string& name) const {
    const ParamValue& v = raw(name);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    const auto& s = std::get<std::string>(v);
    try {
      std::size_t used = 0;
      const double out = std::stod(s, &used);
      if (used == s.size()) return out;
    } catch (const std::exception&) {
    }
    throw PreconditionError(identity_ + ": parameter '" + name + "' must be a number");
  }

  MzvIndex index(const std::string& name) const {
    const ParamValue& v = raw(name);
    if (const auto* s = std::get_if<std::string>(&v)) return parse_index(*s);
    throw PreconditionError(identity_ + ": parameter '" + name + "' must be an index like \"(1,2)\"");
  }

  std::vector<int> vector(const std::string& name) const { return index(name).parts(); }

 private:
  const std::string& identity_;
  const ParamList& params_;
};

struct IdentityEntry {
  std::string name;
  std::vector<std::string> parameters;
  std::function<void(const Args&)> validate;
  std::function<IdentityCheck(const Args&, const CheckOptions&)> run;
};

const std::vector<IdentityEntry>& registry() {
  static const std::vector<IdentityEntry> entries = [] {
    std::vector<IdentityEntry> e;
    e.push_back({"duality", {"index"}, [](const Args& a) { require_admissible(a.index("index")); },
                 [](const Args& a, const CheckOptions& o) { return check_duality(a.index("index"), o); }});
    e.push_back({"sum_formula", {"m", "p"},
                 [](const Args& a) {
                   const int m = a.integer("m");
                   const int p = a.integer("p");
                   require(p >= 1 && m >= p, "sum_formula needs m >= p >= 1");
                 },
                 [](const Args& a, const CheckOptions& o) { return check_sum_formula(a.integer("m"), a.integer("p"), o); }});
    e.push_back({"ohno", {"index", "m"},
                 [](const Args& a) {
                   require_admissible(a.index("index"));
                   require(a.integer("m") >= 0, "ohno needs m >= 0");
                 },
                 [](const Args& a, const CheckOptions& o) { return check_ohno(a.index("index"), a.integer("m"), o); }});
    e.push_back({"composition_duality", {"p", "q", "m"},
                 [](const Args& a) {
                   require(a.integer("p") >= 1 && a.integer("q") >= 1, "composition_duality needs p, q >= 1");
                   require(a.integer("m") >= 0, "composition_duality needs m >= 0");
                 },
                 [](const Args& a, const CheckOptions& o) {
                   return check_composition_duality(a.integer("p"), a.integer("q"), a.integer("m"), o);
                 }});
    auto param_duality_params = [](const Args& a) {
      return ParamDualityParams{a.integer("p"), a.integer("q"), a.integer("r"), a.real("a"), a.integer("m")};
    };
    e.push_back({"param_duality", {"p", "q", "r", "a", "m"},
                 [param_duality_params](const Args& a) { validate_param_duality(param_duality_params(a)); },
                 [param_duality_params](const Args& a, const CheckOptions& o) { return check_param_duality(param_duality_params(a), o); }});
    e.push_back({"shifted_sum_formula", {"p", "m", "r"},
                 [](const Args& a) { validate_shifted_sum_formula(a.integer("p"), a.integer("m"), a.integer("r")); },
                 [](const Args& a, const CheckOptions& o) {
                   return check_shifted_sum_formula(a.integer("p"), a.integer("m"), a.integer("r"), o);
                 }});
    e.push_back({"vector_duality", {"p", "q", "a"},
                 [](const Args& a) { validate_vector_duality(a.vector("p"), a.vector("q"), a.real("a")); },
                 [](const Args& a, const CheckOptions& o) {
                   return check_vector_duality(a.vector("p"), a.vector("q"), a.real("a"), o);
                 }});
    e.push_back({"three_way", {"p", "q", "r", "m"},
                 [](const Args& a) { validate_three_way(a.integer("p"), a.integer("q"), a.integer("r"), a.integer("m")); },
                 [](const Args& a, const CheckOptions& o) {
                   return check_three_way(a.integer("p"), a.integer("q"), a.integer("r"), a.integer("m"), o);
                 }});
    e.push_back({"restricted_sum", {"p", "q", "r"},
                 [](const Args& a) {
                   require(a.integer("p") >= 0 && a.integer("q") >= 0 && a.integer("r") >= 0,
                           "restricted_sum needs p, q, r >= 0");
                 },
                 [](const Args& a, const CheckOptions& o) {
                   return check_restricted_sum(a.integer("p"), a.integer("q"), a.integer("r"), o);
                 }});
    e.push_back({"alternating_sums", {"m", "p"},
                 [](const Args& a) { require(a.integer("m") >= 1 && a.integer("p") >= 1, "alternating_sums needs m, p >= 1"); },
                 [](const Args& a, const CheckOptions& o) { return check_alternating_sums(a.integer("m"), a.integer("p"), o); }});
    e.push_back({"quad_e2_anchor", {}, [](const Args&) {},
                 [](const Args&, const CheckOptions& o) { return check_quad_e2_anchor(o); }});
    e.push_back({"quad_e3_anchor", {}, [](const Args&) {},
                 [](const Args&, const CheckOptions& o) { return check_quad_e3_anchor(o); }});
    e.push_back({"quad_ones_power", {"m", "n"},
                 [](const Args& a) { require(a.integer("m") >= 0 && a.integer("n") >= 0, "quad_ones_power needs m, n >= 0"); },
                 [](const Args& a, const CheckOptions& o) { return check_quad_ones_power(a.integer("m"), a.integer("n"), o); }});
    e.push_back({"quad_ones_sum", {"p", "q", "r", "l"},
                 [](const Args& a) {
                   require(a.integer("p") >= 0 && a.integer("q") >= 0 && a.integer("r") >= 0 && a.integer("l") >= 0,
                           "quad_ones_sum needs nonnegative parameters");
                 },
                 [](const Args& a, const CheckOptions& o) {
                   return check_quad_ones_sum(a.integer("p"), a.integer("q"), a.integer("r"), a.integer("l"), o);
                 }});
    e.push_back({"quad_ipqar", {"p", "q", "a", "r"},
                 [](const Args& a) {
                   require(a.integer("p") >= 1 && a.integer("q") >= 1 && a.integer("r") >= 0 && a.real("a") > -1.0,
                           "quad_ipqar needs p, q >= 1, r >= 0, a > -1");
                 },
                 [](const Args& a, const CheckOptions& o) {
                   return check_quad_ipqar(a.integer("p"), a.integer("q"), a.real("a"), a.integer("r"), o);
                 }});
    e.push_back({"quad_three_integrals", {"p", "q", "r", "m"},
                 [](const Args& a) { validate_three_way(a.integer("p"), a.integer("q"), a.integer("r"), a.integer("m")); },
                 [](const Args& a, const CheckOptions& o) {
                   return check_quad_three_integrals(a.integer("p"), a.integer("q"), a.integer("r"), a.integer("m"), o);
                 }});
    return e;
  }();
  return entries;
}

const IdentityEntry& lookup(const std::string& identity) {
  for (const auto& entry : registry()) {
    if (entry.name == identity) return entry;
  }
  throw PreconditionError("unknown identity '" + identity + "'");
}

}  // namespace

const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : registry()) out.push_back(entry.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& identity_parameters(const std::string& identity) {
  return lookup(identity).parameters;
}

IdentityCheck run_check(const std::string& identity, const ParamList& params, const CheckOptions& options) {
  const IdentityEntry& entry = lookup(identity);
  const Args args(identity, params);
  entry.validate(args);
  return entry.run(args, options);
}

bool preconditions_hold(const std::string& identity, const ParamList& params) {
  const IdentityEntry& entry = lookup(identity);
  try {
    entry.validate(Args(identity, params));
    return true;
  } catch (const NotAdmissibleError&) {
    return false;
  } catch (const PreconditionError&) {
    return false;
  } catch (const ParseError&) {
    return false;
  }
}

GridRanges expand_ranges(const std::string& identity, const GridRanges& ranges) {
  lookup(identity);
  GridRanges out = ranges;
  if ((identity == "duality" || identity == "ohno") && out.count("weight")) {
    std::vector<ParamValue> indices;
    if (auto it = out.find("index"); it != out.end()) indices = it->second;
    for (const auto& w : out["weight"]) {
      const int weight = Args(identity, {{"weight", w}}).integer("weight");
      for (const auto& index : admissible_indices(weight)) indices.emplace_back(index.to_string());
    }
    out.erase("weight");
    out["index"] = std::move(indices);
  }
  if (identity == "vector_duality" && out.count("n")) {
    std::vector<ParamValue> entries{std::int64_t{1}, std::int64_t{2}};
    if (auto it = out.find("entries"); it != out.end()) entries = it->second;
    std::vector<int> values;
    for (const auto& v : entries) values.push_back(Args(identity, {{"entries", v}}).integer("entries"));
    std::vector<ParamValue> vectors;
    for (const auto& nv : out["n"]) {
      const int n = Args(identity, {{"n", nv}}).integer("n");
      require(n >= 1 && n <= 6, "vector_duality grid needs 1 <= n <= 6");
      std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
      while (true) {
        std::vector<int> v;
        for (std::size_t d : digits) v.push_back(values[d]);
        vectors.emplace_back(vector_string(v));
        std::size_t pos = digits.size();
        while (pos > 0 && ++digits[pos - 1] == values.size()) digits[--pos] = 0;
        if (pos == 0) break;
      }
    }
    out.erase("n");
    out.erase("entries");
    out["p"] = vectors;
    out["q"] = vectors;
  }
  return out;
}

std::vector<ParamList> grid_instances(const std::string& identity, const GridRanges& ranges) {
  const auto& names = identity_parameters(identity);
  const GridRanges expanded = expand_ranges(identity, ranges);
  for (const auto& [name, values] : expanded) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw PreconditionError(identity + ": unknown parameter '" + name + "'");
    }
  }
  std::vector<const std::vector<ParamValue>*> axes;
  for (const auto& name : names) {
    auto it = expanded.find(name);
    if (it == expanded.end()) throw PreconditionError(identity + ": missing range for '" + name + "'");
    if (it->second.empty()) return {};
    axes.push_back(&it->second);
  }
  std::vector<ParamList> out;
  std::vector<std::size_t> digits(axes.size(), 0);
  while (true) {
    ParamList params;
    for (std::size_t i = 0; i < axes.size(); ++i) params.emplace_back(names[i], (*axes[i])[digits[i]]);
    if (preconditions_hold(identity, params)) out.push_back(std::move(params));
    std::size_t pos = digits.size();
    while (pos > 0 && ++digits[pos - 1] == axes[pos - 1]->size()) digits[--pos] = 0;
    if (pos == 0) break;
  }
  return out;
}

std::vector<IdentityCheck> run_instances(const std::string& identity, const std::vector<ParamList>& instances,
                                         const CheckOptions& options, int parallelism) {
  lookup(identity);
  std::vector<IdentityCheck> results(instances.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        results[i] = run_check(identity, instances[i], options);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto threads = std::min(static_cast<std::size_t>(std::clamp(parallelism, 1, 64)), instances.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<IdentityCheck> run_grid(const std::string& identity, const GridRanges& ranges,
                                    const CheckOptions& options, int parallelism) {
  return run_instances(identity, grid_instances(identity, ranges), options, parallelism);
}

}  // namespace mzv
