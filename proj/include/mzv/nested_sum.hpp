#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mzv/index.hpp"
#include "mzv/rational.hpp"

namespace mzv {

/// A real shift a in (k + a). Integers and fractions keep their exact value so the
/// rational oracle can use them; `real()` shifts are float-only.
class Shift {
 public:
  Shift() = default;
  static Shift integer(long value) { return Shift(static_cast<double>(value), value, 1); }
  static Shift rational(long num, long den);
  static Shift real(double value);

  double value() const noexcept { return value_; }
  bool is_rational() const noexcept { return den_ != 0; }
  /// Throws PreconditionError for a real shift.
  BigRational exact() const;
  /// "0", "1/2", or the shortest round-trip decimal for real shifts.
  std::string to_string() const;

  friend bool operator==(const Shift&, const Shift&) = default;

 private:
  Shift(double value, long num, long den) : value_(value), num_(num), den_(den) {}
  double value_ = 0.0;
  long num_ = 0;
  long den_ = 1;  // 0 marks a real (non-rational) shift
};

/// (k + shift)^(-exponent), shift > -1.
struct ShiftedPower {
  Shift shift;
  int exponent = 1;
  friend bool operator==(const ShiftedPower&, const ShiftedPower&) = default;
};

/// (k + shift)^(-exponent) with a nonnegative integer shift.
struct ExtraPower {
  int shift = 0;
  int exponent = 1;
  friend bool operator==(const ExtraPower&, const ExtraPower&) = default;
};

/// k(k+1)...(k+degree-1) / degree!  =  C(k+degree-1, degree).
struct RisingFactorial {
  int degree = 0;
  friend bool operator==(const RisingFactorial&, const RisingFactorial&) = default;
};

/// sum_{j=0}^{order} (-1)^j C(order, j) (k+j)^(-exponent).
struct FiniteDifference {
  int order = 0;
  int exponent = 1;
  friend bool operator==(const FiniteDifference&, const FiniteDifference&) = default;
};

using PositionFactor = std::variant<ShiftedPower, ExtraPower, RisingFactorial, FiniteDifference>;

/// Upper bound on RisingFactorial::degree and FiniteDifference::order.
inline constexpr int kMaxFactorDegree = 16;

/// Sum over 1 <= k_1 < ... < k_d of prod_i (product of positions[i] evaluated at k_i).
struct NestedSumSpec {
  std::vector<std::vector<PositionFactor>> positions;
  /// Highest power of log N in the tail model; depth - 1 when unset.
  std::optional<int> log_power;

  int depth() const noexcept { return static_cast<int>(positions.size()); }

  /// zeta(index) with every denominator k_i + shift.
  static NestedSumSpec from_index(const MzvIndex& index, Shift shift = {});

  friend bool operator==(const NestedSumSpec&, const NestedSumSpec&) = default;
};

enum class EvalMode { kFloat, kFloatExtrapolated, kExactTruncated, kQuadrature };

std::string to_string(EvalMode mode);

struct EvalResult {
  double value = 0.0;
  /// Estimated absolute error of `value` (truncation plus roundoff).
  double tail_bound = 0.0;
  std::int64_t cutoff = 0;
  EvalMode mode = EvalMode::kFloat;
  /// False when the configured maximum cutoff was hit before the target accuracy.
  bool accuracy_met = true;
  /// Set when a shift lies within EvalOptions::min_shift_gap of -1.
  bool slow_convergence = false;
};

struct EvalOptions {
  std::int64_t initial_cutoff = std::int64_t{1} << 14;
  std::int64_t max_cutoff = std::int64_t{1} << 24;
  /// Number of 1/N orders per tail in the fit.
  int tail_orders = 5;
  /// The fit uses partial sums with cutoffs in [N / 2^window_octaves, N].
  int window_octaves = 10;
  double min_shift_gap = 1e-3;
};

/// Leading decay of the truncation error: error(N) ~ (log N)^J N^(1-s).
struct TailModel {
  double s = 2.0;
  int max_log_power = 0;
};

struct PartialSum {
  std::int64_t cutoff = 0;
  double value = 0.0;
};

/// Same value, normalized form: powers with equal shift merged (ExtraPower becomes an
/// integer-shift ShiftedPower), degree-0 rising factorials dropped, order-0 finite
/// differences turned into plain powers, factors sorted. Equal canonical specs evaluate to
/// bit-identical results.
NestedSumSpec canonicalize(const NestedSumSpec& spec);

/// Validates factor parameters and the decay of every suffix; throws
/// PreconditionError / DivergentSpecError. Returns the tail model.
TailModel tail_model(const NestedSumSpec& spec);

/// Float partial sum over 1 <= k_1 < ... < k_d <= cutoff (compensated).
double partial_sum(const NestedSumSpec& spec, std::int64_t cutoff);

/// Partial sums at every requested cutoff (ascending) from a single scan.
std::vector<PartialSum> partial_sums(const NestedSumSpec& spec, std::span<const std::int64_t> cutoffs);

/// Exact partial sum; every shift must be rational.
BigRational evaluate_exact_truncated(const NestedSumSpec& spec, std::int64_t cutoff);

/// The infinite sum to `target_accuracy`.
EvalResult evaluate(const NestedSumSpec& spec, double target_accuracy, const EvalOptions& options = {});

/// zeta(index); throws NotAdmissibleError.
EvalResult mzv(const MzvIndex& index, double target_accuracy, const EvalOptions& options = {});

/// Fits value + sum_{n, j} c_{n,j} (log N)^j N^(1-s-n) through the partials (ascending
/// cutoffs, at least two) using one basis function fewer than there are points. The
/// bound is 4x the change from dropping the last basis function.
EvalResult extrapolate_tail(std::span<const PartialSum> partials, const TailModel& model);

/// sum_{j=0}^r (-1)^j C(r,j) (ell+j)^(-p) without cancellation.
double finite_difference_factor(std::int64_t ell, int r, int p);

/// Exact value of the same alternating sum.
BigRational finite_difference_exact(std::int64_t ell, int r, int p);

/// (1/(p-1)!) int_0^1 (-log x)^(p-1) x^(ell-1) (1-x)^r dx by tanh-sinh quadrature; an
/// independent route to finite_difference_factor for large ell.
double finite_difference_integral(std::int64_t ell, int r, int p);

}  // namespace mzv
