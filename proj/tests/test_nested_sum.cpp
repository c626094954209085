#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mzv/error.hpp"
#include "mzv/nested_sum.hpp"

using namespace mzv;

namespace {

// Reference constants (mpmath, 30 digits; depth-2 values from their closed forms).
constexpr double kZeta2 = 1.64493406684822643647241516665;
constexpr double kZeta3 = 1.20205690315959428539973816151;
constexpr double kZeta4 = 1.08232323371113819151600369654;
constexpr double kZeta5 = 1.03692775514336992633136548646;
constexpr double kZeta13 = 0.270580808427784547879000924135;  // pi^4 / 360
constexpr double kZeta22 = 0.811742425283353643637002772406;  // pi^4 / 120
constexpr double kZeta23 = 0.228810397603353759768746148942;  // 3 zeta(2) zeta(3) - 11/2 zeta(5)

NestedSumSpec one_over_k_k_plus_2() {
  NestedSumSpec spec;
  spec.positions.push_back({ShiftedPower{Shift::integer(0), 1}, ExtraPower{2, 1}});
  return spec;
}

NestedSumSpec shifted_zeta(std::vector<int> parts, Shift shift) {
  return NestedSumSpec::from_index(MzvIndex(std::move(parts)), shift);
}

/// Exact closed form r! / (ell (ell+1) ... (ell+r)).
BigRational closed_form_p1(long ell, int r) {
  BigRational out(1);
  for (int j = 1; j <= r; ++j) out *= BigRational(j);
  for (int j = 0; j <= r; ++j) out /= BigRational(ell + j);
  return out;
}

/// A random convergent spec with rational shifts and every factor kind.
NestedSumSpec random_spec(std::mt19937_64& rng) {
  auto pick = [&rng](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  NestedSumSpec spec;
  const int depth = pick(1, 3);
  for (int i = 0; i < depth; ++i) {
    std::vector<PositionFactor> factors;
    const int den = pick(1, 4);  // shifts stay above -1
    factors.push_back(ShiftedPower{Shift::rational(pick(1 - den, 6), den), pick(1, 2)});
    if (pick(0, 2) == 0) factors.push_back(ExtraPower{pick(0, 3), 1});
    if (pick(0, 3) == 0) factors.push_back(RisingFactorial{pick(1, 2)});
    if (pick(0, 3) == 0) factors.push_back(FiniteDifference{pick(1, 3), pick(1, 2)});
    spec.positions.push_back(std::move(factors));
  }
  spec.positions.back().push_back(ExtraPower{pick(0, 2), 2});
  return spec;
}

}  // namespace

TEST(Shift, Forms) {
  EXPECT_EQ(Shift::rational(2, 4).to_string(), "1/2");
  EXPECT_EQ(Shift::rational(4, 2), Shift::integer(2));
  EXPECT_EQ(Shift::real(3.0), Shift::integer(3));
  EXPECT_FALSE(Shift::real(0.3).is_rational());
  EXPECT_THROW(Shift::real(0.3).exact(), PreconditionError);
  EXPECT_EQ(Shift::rational(-1, 3).exact(), BigRational(-1, 3));
  EXPECT_THROW(Shift::rational(1, 0), PreconditionError);
}

TEST(ExactTruncated, Examples) {
  EXPECT_EQ(evaluate_exact_truncated(one_over_k_k_plus_2(), 3), BigRational(21, 40));
  EXPECT_EQ(evaluate_exact_truncated(NestedSumSpec::from_index({2}), 2), BigRational(5, 4));
  EXPECT_EQ(evaluate_exact_truncated(NestedSumSpec::from_index({1, 2}), 3), BigRational(5, 12));
  EXPECT_EQ(evaluate_exact_truncated(NestedSumSpec::from_index({1, 2}), 1), BigRational(0));
}

TEST(ExactTruncated, RejectsRealShift) {
  EXPECT_THROW(evaluate_exact_truncated(shifted_zeta({2}, Shift::real(0.3)), 10), PreconditionError);
}

TEST(ExactTruncated, TelescopingPartialSums) {
  // sum_{k <= N} 1/(k(k+1)) = 1 - 1/(N+1)
  NestedSumSpec spec;
  spec.positions.push_back({ShiftedPower{Shift::integer(0), 1}, ExtraPower{1, 1}});
  for (long n : {1L, 7L, 100L}) {
    EXPECT_EQ(evaluate_exact_truncated(spec, n), BigRational(n, n + 1));
  }
}

TEST(OracleEquivalence, RandomRationalSpecsAtN1000) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 20; ++i) {
    const NestedSumSpec spec = random_spec(rng);
    const double exact = evaluate_exact_truncated(spec, 1000).to_double();
    const double approx = partial_sum(spec, 1000);
    EXPECT_LE(std::abs(approx - exact), 1e-12 * std::abs(exact)) << "spec " << i;
  }
}

TEST(PartialSums, StrictlyIncreasingAndConsistent) {
  const NestedSumSpec spec = NestedSumSpec::from_index({1, 1, 3});
  const std::vector<std::int64_t> cutoffs{3, 4, 10, 100, 1000};
  const auto partials = partial_sums(spec, cutoffs);
  ASSERT_EQ(partials.size(), cutoffs.size());
  for (std::size_t i = 0; i < partials.size(); ++i) {
    EXPECT_EQ(partials[i].cutoff, cutoffs[i]);
    EXPECT_EQ(partials[i].value, partial_sum(spec, cutoffs[i]));
    if (i > 0) EXPECT_GT(partials[i].value, partials[i - 1].value);
  }
}

TEST(FiniteDifference, Examples) {
  EXPECT_DOUBLE_EQ(finite_difference_factor(1, 1, 1), 0.5);
  EXPECT_DOUBLE_EQ(finite_difference_factor(2, 2, 1), 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(finite_difference_factor(1, 0, 3), 1.0);
  EXPECT_EQ(finite_difference_exact(2, 2, 1), BigRational(1, 12));
  EXPECT_EQ(finite_difference_exact(2, 2, 1), BigRational(1, 2) - BigRational(2, 3) + BigRational(1, 4));
}

TEST(FiniteDifference, MatchesExactRationals) {
  for (long ell = 1; ell <= 50; ++ell) {
    for (int r = 0; r <= 5; ++r) {
      for (int p = 1; p <= 5; ++p) {
        const double exact = finite_difference_exact(ell, r, p).to_double();
        const double value = finite_difference_factor(ell, r, p);
        ASSERT_GT(value, 0.0);
        ASSERT_LE(std::abs(value - exact), 4e-15 * exact) << ell << " " << r << " " << p;
      }
    }
  }
}

TEST(FiniteDifference, ClosedFormAtPEqualsOne) {
  for (long ell = 1; ell <= 100; ++ell) {
    for (int r = 0; r <= 8; ++r) {
      const BigRational closed = closed_form_p1(ell, r);
      ASSERT_EQ(finite_difference_exact(ell, r, 1), closed) << ell << " " << r;
      ASSERT_LE(std::abs(finite_difference_factor(ell, r, 1) - closed.to_double()), 4e-15 * closed.to_double());
    }
  }
}

TEST(FiniteDifference, IntegralRepresentationMatchesExact) {
  for (long ell = 1; ell <= 50; ++ell) {
    for (int r = 0; r <= 5; ++r) {
      for (int p = 1; p <= 5; ++p) {
        const double exact = finite_difference_exact(ell, r, p).to_double();
        ASSERT_LE(std::abs(finite_difference_integral(ell, r, p) - exact), 1e-12 * exact) << ell << " " << r << " " << p;
      }
    }
  }
}

TEST(FiniteDifference, LargeEllAgainstIntegralAndAsymptotics) {
  for (std::int64_t ell : {1000, 100000, 1000000}) {
    for (int r = 1; r <= 4; ++r) {
      for (int p = 1; p <= 3; ++p) {
        const double value = finite_difference_factor(ell, r, p);
        EXPECT_NEAR(value, finite_difference_integral(ell, r, p), 1e-11 * value);
        // leading term r! C(p+r-1, r) / ell^(p+r)
        double leading = std::pow(static_cast<double>(ell), -(p + r));
        for (int j = 1; j <= r; ++j) leading *= (p + j - 1);
        EXPECT_NEAR(value / leading, 1.0, 20.0 * r * p / static_cast<double>(ell));
      }
    }
  }
}

TEST(TailModel, DecayAndLogPower) {
  const TailModel z2 = tail_model(NestedSumSpec::from_index({2}));
  EXPECT_DOUBLE_EQ(z2.s, 2.0);
  EXPECT_EQ(z2.max_log_power, 0);
  EXPECT_EQ(tail_model(NestedSumSpec::from_index({1, 1, 2})).max_log_power, 2);
  NestedSumSpec with_override = NestedSumSpec::from_index({1, 2});
  with_override.log_power = 4;
  EXPECT_EQ(tail_model(with_override).max_log_power, 4);
}

TEST(TailModel, RejectsDivergentAndInvalidSpecs) {
  EXPECT_THROW(tail_model(NestedSumSpec::from_index({2, 1})), DivergentSpecError);
  EXPECT_THROW(tail_model(NestedSumSpec::from_index({1})), DivergentSpecError);
  EXPECT_THROW(tail_model(shifted_zeta({2}, Shift::integer(-1))), PreconditionError);
  NestedSumSpec rising;
  rising.positions.push_back({ShiftedPower{Shift::integer(0), 2}, RisingFactorial{1}});
  EXPECT_THROW(tail_model(rising), DivergentSpecError);
  NestedSumSpec too_high;
  too_high.positions.push_back({ShiftedPower{Shift::integer(0), 2}, RisingFactorial{kMaxFactorDegree + 1}});
  EXPECT_THROW(tail_model(too_high), PreconditionError);
  EXPECT_THROW(tail_model(NestedSumSpec{}), PreconditionError);
}

TEST(Evaluate, WorkedExamples) {
  const EvalResult three_quarters = evaluate(one_over_k_k_plus_2(), 1e-12);
  EXPECT_NEAR(three_quarters.value, 0.75, 1e-12);
  EXPECT_LE(three_quarters.tail_bound, 1e-12);
  EXPECT_TRUE(three_quarters.accuracy_met);

  struct Case {
    std::vector<int> index;
    double truth;
  };
  const std::vector<Case> cases{{{2}, kZeta2},     {{1, 2}, kZeta3},  {{1, 1, 2}, kZeta4}, {{4}, kZeta4},
                                {{1, 3}, kZeta13}, {{2, 2}, kZeta22}, {{2, 3}, kZeta23},   {{1, 2, 2}, kZeta23}};
  for (const auto& c : cases) {
    const EvalResult r = mzv::mzv(MzvIndex(c.index), 1e-10);
    const double error = std::abs(r.value - c.truth);
    EXPECT_LE(error, 1e-10) << MzvIndex(c.index).to_string();
    EXPECT_LE(error, r.tail_bound + 1e-15) << "bound not honest for " << MzvIndex(c.index).to_string();
    EXPECT_TRUE(r.accuracy_met);
    EXPECT_EQ(r.mode, EvalMode::kFloatExtrapolated);
  }
}

TEST(Evaluate, DeepIndexMeetsTarget) {
  // zeta({1}^5, 2) = zeta(7) by duality
  const EvalResult deep = mzv::mzv({1, 1, 1, 1, 1, 2}, 1e-9);
  const EvalResult single = mzv::mzv({7}, 1e-12);
  EXPECT_NEAR(deep.value, single.value, 1e-9);
  EXPECT_TRUE(deep.accuracy_met);
}

TEST(Evaluate, ReportsUnmetAccuracyHonestly) {
  EvalOptions options;
  options.max_cutoff = options.initial_cutoff;
  const EvalResult r = mzv::mzv({1, 1, 1, 2}, 1e-16, options);
  EXPECT_FALSE(r.accuracy_met);
  EXPECT_GT(r.tail_bound, 1e-16);
  EXPECT_EQ(r.cutoff, options.initial_cutoff);
  // zeta(1,1,1,2) = zeta(5) by duality
  EXPECT_LE(std::abs(r.value - kZeta5), r.tail_bound);
}

TEST(Evaluate, RejectsBadInput) {
  EXPECT_THROW(mzv::mzv({2, 1}, 1e-8), NotAdmissibleError);
  EXPECT_THROW(evaluate(NestedSumSpec::from_index({2}), 0.0), PreconditionError);
  EXPECT_THROW(evaluate(NestedSumSpec::from_index({1, 1}), 1e-6), DivergentSpecError);
}

TEST(Evaluate, FlagsShiftsNearMinusOne) {
  const EvalResult near = evaluate(shifted_zeta({3}, Shift::real(-0.9995)), 1e-8);
  EXPECT_TRUE(near.slow_convergence);
  const EvalResult fine = evaluate(shifted_zeta({3}, Shift::real(-0.5)), 1e-8);
  EXPECT_FALSE(fine.slow_convergence);
}

TEST(Evaluate, StrictlyDecreasingInShift) {
  for (const auto& parts : std::vector<std::vector<int>>{{2}, {1, 2}, {2, 1, 3}}) {
    double previous = std::numeric_limits<double>::infinity();
    for (double a : {-0.5, -0.25, 0.0, 0.5, 1.0, 2.5}) {
      const double value = evaluate(shifted_zeta(parts, Shift::real(a)), 1e-10).value;
      EXPECT_LT(value, previous) << MzvIndex(parts).to_string() << " a=" << a;
      previous = value;
    }
  }
}

TEST(Evaluate, ContinuousInShift) {
  constexpr double kEps = 1e-6;
  for (const auto& parts : std::vector<std::vector<int>>{{2}, {1, 2}, {1, 1, 3}}) {
    for (double a : {-0.5, 0.0, 0.5, 1.0}) {
      const double f0 = evaluate(shifted_zeta(parts, Shift::real(a)), 1e-12).value;
      const double f1 = evaluate(shifted_zeta(parts, Shift::real(a + kEps)), 1e-12).value;
      EXPECT_GT(f0 - f1, 0.0);
      // steepest case: d/da sum (k+a)^-2 at a = -1/2 is -14 zeta(3) = -16.83
      EXPECT_LE(f0 - f1, 17.0 * kEps) << MzvIndex(parts).to_string() << " a=" << a;
    }
  }
}

TEST(Evaluate, ExactShiftValues) {
  // sum (k+1)^-2 = zeta(2) - 1 and sum (k+1/2)^-2 = 4 (1 - 1/4) zeta(2) - 4
  EXPECT_NEAR(evaluate(shifted_zeta({2}, Shift::integer(1)), 1e-12).value, kZeta2 - 1, 1e-12);
  EXPECT_NEAR(evaluate(shifted_zeta({2}, Shift::rational(1, 2)), 1e-12).value, 3 * kZeta2 - 4, 1e-12);
}

TEST(Canonicalize, EquivalentFormsCompareEqual) {
  NestedSumSpec merged;
  merged.positions.push_back({ShiftedPower{Shift::integer(0), 1}, ExtraPower{0, 2}, RisingFactorial{0}});
  NestedSumSpec plain = NestedSumSpec::from_index({3});
  EXPECT_EQ(canonicalize(merged), canonicalize(plain));
  NestedSumSpec fd;
  fd.positions.push_back({FiniteDifference{0, 3}});
  EXPECT_EQ(canonicalize(fd), canonicalize(plain));
  EXPECT_EQ(evaluate(canonicalize(merged), 1e-10).value, evaluate(plain, 1e-10).value);
}

TEST(ExtrapolateTail, ZetaTwoFromThreePartials) {
  const NestedSumSpec spec = NestedSumSpec::from_index({2});
  const std::vector<std::int64_t> cutoffs{1000, 2000, 4000};
  const auto partials = partial_sums(spec, cutoffs);
  const EvalResult r = extrapolate_tail(partials, tail_model(spec));
  EXPECT_NEAR(r.value, kZeta2, 1e-9);
  EXPECT_EQ(r.cutoff, 4000);
}

TEST(ExtrapolateTail, ZetaOneTwoFromThreePartials) {
  const NestedSumSpec spec = NestedSumSpec::from_index({1, 2});
  const std::vector<std::int64_t> cutoffs{10000, 20000, 40000};
  const auto partials = partial_sums(spec, cutoffs);
  const EvalResult r = extrapolate_tail(partials, tail_model(spec));
  EXPECT_NEAR(r.value, kZeta3, 1e-7);
  EXPECT_LE(std::abs(r.value - kZeta3), r.tail_bound);
}

TEST(ExtrapolateTail, ConstantPartials) {
  const std::vector<PartialSum> partials{{10, 2.5}, {20, 2.5}, {40, 2.5}};
  const EvalResult r = extrapolate_tail(partials, {2.0, 0});
  EXPECT_EQ(r.value, 2.5);
  EXPECT_EQ(r.tail_bound, 0.0);
}

TEST(ExtrapolateTail, RejectsNonMonotoneAndBadInput) {
  const std::vector<PartialSum> bumpy{{10, 1.0}, {20, 1.2}, {40, 1.1}};
  EXPECT_THROW(extrapolate_tail(bumpy, {2.0, 0}), PreconditionError);
  const std::vector<PartialSum> one{{10, 1.0}};
  EXPECT_THROW(extrapolate_tail(one, {2.0, 0}), PreconditionError);
  const std::vector<PartialSum> fine{{10, 1.0}, {20, 1.1}};
  EXPECT_THROW(extrapolate_tail(fine, {1.0, 0}), PreconditionError);
}
