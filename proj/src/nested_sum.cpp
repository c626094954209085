#include "mzv/nested_sum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "mzv/error.hpp"
#include "mzv/kahan.hpp"

namespace mzv {

Shift Shift::rational(long num, long den) {
  if (den <= 0) throw PreconditionError("shift denominator must be positive");
  const long g = std::gcd(num, den);
  return Shift(static_cast<double>(num) / static_cast<double>(den), num / g, den / g);
}

Shift Shift::real(double value) {
  if (!std::isfinite(value)) throw PreconditionError("shift must be finite");
  if (value == std::floor(value) && std::abs(value) < 1e15) return integer(static_cast<long>(value));
  return Shift(value, 0, 0);
}

BigRational Shift::exact() const {
  if (!is_rational()) throw PreconditionError("shift " + to_string() + " has no exact rational value");
  return BigRational(num_, den_);
}

std::string Shift::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  if (den_ != 0) return std::to_string(num_) + "/" + std::to_string(den_);
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value_);
  return std::string(buffer, end);
}

NestedSumSpec NestedSumSpec::from_index(const MzvIndex& index, Shift shift) {
  NestedSumSpec spec;
  for (int a : index.parts()) spec.positions.push_back({ShiftedPower{shift, a}});
  return spec;
}

NestedSumSpec canonicalize(const NestedSumSpec& spec) {
  NestedSumSpec out;
  out.log_power = spec.log_power;
  for (const auto& position : spec.positions) {
    std::vector<ShiftedPower> powers;
    std::vector<PositionFactor> others;
    auto add_power = [&powers](const Shift& shift, int exponent) {
      for (auto& existing : powers) {
        if (existing.shift == shift) {
          existing.exponent += exponent;
          return;
        }
      }
      powers.push_back({shift, exponent});
    };
    for (const auto& factor : position) {
      if (const auto* sp = std::get_if<ShiftedPower>(&factor)) {
        add_power(sp->shift, sp->exponent);
      } else if (const auto* ep = std::get_if<ExtraPower>(&factor)) {
        add_power(Shift::integer(ep->shift), ep->exponent);
      } else if (const auto* rf = std::get_if<RisingFactorial>(&factor)) {
        if (rf->degree != 0) others.push_back(*rf);
      } else {
        const auto& fd = std::get<FiniteDifference>(factor);
        if (fd.order == 0) {
          add_power(Shift::integer(0), fd.exponent);
        } else {
          others.push_back(fd);
        }
      }
    }
    std::sort(powers.begin(), powers.end(), [](const ShiftedPower& a, const ShiftedPower& b) {
      if (a.shift.value() != b.shift.value()) return a.shift.value() < b.shift.value();
      return a.shift.is_rational() && !b.shift.is_rational();
    });
    std::stable_sort(others.begin(), others.end(),
                     [](const PositionFactor& a, const PositionFactor& b) { return a.index() < b.index(); });
    std::vector<PositionFactor> merged(powers.begin(), powers.end());
    merged.insert(merged.end(), others.begin(), others.end());
    out.positions.push_back(std::move(merged));
  }
  return out;
}

std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kFloat:
      return "float";
    case EvalMode::kFloatExtrapolated:
      return "float-extrapolated";
    case EvalMode::kExactTruncated:
      return "exact-truncated";
    case EvalMode::kQuadrature:
      return "quadrature";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Finite-difference factor
// ---------------------------------------------------------------------------

double finite_difference_factor(std::int64_t ell, int r, int p) {
  if (ell < 1) throw PreconditionError("finite difference needs ell >= 1");
  if (r < 0 || r > kMaxFactorDegree) throw PreconditionError("finite difference order out of range");
  if (p < 1) throw PreconditionError("finite difference exponent must be positive");
  // With P(x) = prod_{j<=r} 1/(x+j), the factor equals r! (-1)^(p-1) P^(p-1)(ell)/(p-1)!.
  // Q_n = (-1)^n P^(n)/n! obeys Q_n = (1/n) sum_k Q_{n-1-k} s_{k+1}, s_m = sum_j (ell+j)^(-m),
  // a recursion with positive terms only.
  const double x = static_cast<double>(ell);
  double product = 1.0;
  double factorial = 1.0;
  for (int j = 0; j <= r; ++j) {
    product /= (x + j);
    if (j > 0) factorial *= j;
  }
  if (p == 1) return factorial * product;

  std::vector<double> power_sums(static_cast<std::size_t>(p), 0.0);  // power_sums[m] = s_m
  for (int j = 0; j <= r; ++j) {
    const double inv = 1.0 / (x + j);
    double term = inv;
    for (int m = 1; m < p; ++m) {
      power_sums[m] += term;
      term *= inv;
    }
  }
  std::vector<double> q(static_cast<std::size_t>(p), 0.0);
  q[0] = product;
  for (int n = 1; n < p; ++n) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += q[n - 1 - k] * power_sums[k + 1];
    q[n] = acc / n;
  }
  return factorial * q[p - 1];
}

BigRational finite_difference_exact(std::int64_t ell, int r, int p) {
  if (ell < 1) throw PreconditionError("finite difference needs ell >= 1");
  if (r < 0 || r > kMaxFactorDegree) throw PreconditionError("finite difference order out of range");
  if (p < 1) throw PreconditionError("finite difference exponent must be positive");
  BigRational total;
  for (int j = 0; j <= r; ++j) {
    BigRational term = BigRational(static_cast<long>(ell + j)).inverse_power(p) * BigRational(binomial(r, j));
    if (j % 2) {
      total -= term;
    } else {
      total += term;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Validation and tail model
// ---------------------------------------------------------------------------

namespace {

void validate_factor(const PositionFactor& factor) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ShiftedPower>) {
          if (!(f.shift.value() > -1.0)) {
            throw PreconditionError("shifted power needs shift > -1, got " + f.shift.to_string());
          }
          if (f.exponent < 1) throw PreconditionError("shifted power exponent must be positive");
        } else if constexpr (std::is_same_v<T, ExtraPower>) {
          if (f.shift < 0) throw PreconditionError("extra power shift must be nonnegative");
          if (f.exponent < 1) throw PreconditionError("extra power exponent must be positive");
        } else if constexpr (std::is_same_v<T, RisingFactorial>) {
          if (f.degree < 0 || f.degree > kMaxFactorDegree) {
            throw PreconditionError("rising factorial degree out of range");
          }
        } else {
          if (f.order < 0 || f.order > kMaxFactorDegree) {
            throw PreconditionError("finite difference order out of range");
          }
          if (f.exponent < 1) throw PreconditionError("finite difference exponent must be positive");
        }
      },
      factor);
}

/// Decay exponent of one position: its term behaves like k^(-e).
int effective_exponent(const std::vector<PositionFactor>& factors) {
  int e = 0;
  for (const auto& factor : factors) {
    std::visit(
        [&e](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ShiftedPower> || std::is_same_v<T, ExtraPower>) {
            e += f.exponent;
          } else if constexpr (std::is_same_v<T, RisingFactorial>) {
            e -= f.degree;
          } else {
            e += f.exponent + f.order;
          }
        },
        factor);
  }
  return e;
}

double min_shift(const NestedSumSpec& spec) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& position : spec.positions) {
    for (const auto& factor : position) {
      if (const auto* sp = std::get_if<ShiftedPower>(&factor)) lowest = std::min(lowest, sp->shift.value());
    }
  }
  return lowest;
}

}  // namespace

namespace {

struct DecayProfile {
  /// suffix_decay[j]: the tail over positions j..d-1 with all k > N decays like N^-suffix_decay[j].
  std::vector<int> suffix_decay;
  /// Slowest decay of the truncation error.
  int decay = 0;
};

DecayProfile decay_profile(const NestedSumSpec& spec) {
  if (spec.depth() < 1) throw PreconditionError("nested sum needs depth >= 1");
  for (const auto& position : spec.positions) {
    for (const auto& factor : position) validate_factor(factor);
  }
  const int d = spec.depth();
  std::vector<int> e(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) e[i] = effective_exponent(spec.positions[i]);

  // The error of the partial sum at N is sum_j A_j(N) T_j(N): A_j is the prefix sum over
  // positions < j (grows like N^growth), T_j the tail with all of k_j..k_d > N (decays like
  // N^-suffix). Each product must decay.
  DecayProfile profile;
  profile.decay = std::numeric_limits<int>::max();
  for (int j = 0; j < d; ++j) {
    int suffix = -(d - j);
    for (int i = j; i < d; ++i) suffix += e[i];
    int growth = 0;
    int run = 0;
    for (int i = j - 1; i >= 0; --i) {
      run += 1 - e[i];
      growth = std::max(growth, run);
    }
    profile.suffix_decay.push_back(suffix);
    profile.decay = std::min(profile.decay, suffix - growth);
  }
  if (profile.decay < 1) {
    throw DivergentSpecError("nested sum diverges: its truncation error behaves like N^" +
                             std::to_string(-profile.decay) + " (needs N^-1 or faster)");
  }
  return profile;
}

}  // namespace

TailModel tail_model(const NestedSumSpec& spec) {
  const DecayProfile profile = decay_profile(spec);
  TailModel model;
  model.s = profile.decay + 1;
  model.max_log_power = spec.log_power.value_or(spec.depth() - 1);
  if (model.max_log_power < 0) throw PreconditionError("log power must be nonnegative");
  return model;
}

// ---------------------------------------------------------------------------
// Float scan
// ---------------------------------------------------------------------------

namespace {

double factor_value(const PositionFactor& factor, std::int64_t k) {
  const double x = static_cast<double>(k);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ShiftedPower> || std::is_same_v<T, ExtraPower>) {
          double base;
          if constexpr (std::is_same_v<T, ShiftedPower>) {
            base = 1.0 / (x + f.shift.value());
          } else {
            base = 1.0 / (x + f.shift);
          }
          double out = 1.0;
          for (int i = 0; i < f.exponent; ++i) out *= base;
          return out;
        } else if constexpr (std::is_same_v<T, RisingFactorial>) {
          double out = 1.0;
          for (int j = 0; j < f.degree; ++j) out *= (x + j) / (j + 1);
          return out;
        } else {
          return finite_difference_factor(k, f.order, f.exponent);
        }
      },
      factor);
}

/// Incremental evaluation of the prefix accumulators
///   A_i(k) = A_i(k-1) + f_i(k) A_{i-1}(k-1),  A_0 = 1.
class Scanner {
 public:
  explicit Scanner(const NestedSumSpec& spec)
      : spec_(spec), accumulators_(static_cast<std::size_t>(spec.depth())) {}

  std::int64_t position() const { return k_; }

  void advance_to(std::int64_t cutoff) {
    const int d = spec_.depth();
    while (k_ < cutoff) {
      ++k_;
      for (int i = d - 1; i >= 0; --i) {
        const double inner = i == 0 ? 1.0 : accumulators_[i - 1].value();
        if (inner == 0.0) continue;
        double term = inner;
        for (const auto& factor : spec_.positions[i]) term *= factor_value(factor, k_);
        accumulators_[i].add(term);
      }
    }
  }

  double value() const { return accumulators_.back().value(); }

  /// A_0 = 1, A_1(k), ..., A_{d-1}(k).
  std::vector<double> prefixes() const {
    std::vector<double> out{1.0};
    for (std::size_t i = 0; i + 1 < accumulators_.size(); ++i) out.push_back(accumulators_[i].value());
    return out;
  }

 private:
  const NestedSumSpec& spec_;
  std::vector<CompensatedSum> accumulators_;
  std::int64_t k_ = 0;
};

}  // namespace

double partial_sum(const NestedSumSpec& spec, std::int64_t cutoff) {
  tail_model(spec);
  Scanner scanner(spec);
  scanner.advance_to(cutoff);
  return scanner.value();
}

std::vector<PartialSum> partial_sums(const NestedSumSpec& spec, std::span<const std::int64_t> cutoffs) {
  tail_model(spec);
  Scanner scanner(spec);
  std::vector<PartialSum> out;
  out.reserve(cutoffs.size());
  for (std::int64_t n : cutoffs) {
    if (n < scanner.position()) throw PreconditionError("cutoffs must be ascending");
    scanner.advance_to(n);
    out.push_back({n, scanner.value()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact scan
// ---------------------------------------------------------------------------

namespace {

BigRational exact_factor_value(const PositionFactor& factor, std::int64_t k) {
  return std::visit(
      [&](const auto& f) -> BigRational {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ShiftedPower>) {
          return (BigRational(static_cast<long>(k)) + f.shift.exact()).inverse_power(f.exponent);
        } else if constexpr (std::is_same_v<T, ExtraPower>) {
          return BigRational(static_cast<long>(k + f.shift)).inverse_power(f.exponent);
        } else if constexpr (std::is_same_v<T, RisingFactorial>) {
          BigRational out(1);
          for (int j = 0; j < f.degree; ++j) out *= BigRational(static_cast<long>(k + j), j + 1);
          return out;
        } else {
          return finite_difference_exact(k, f.order, f.exponent);
        }
      },
      factor);
}

}  // namespace

BigRational evaluate_exact_truncated(const NestedSumSpec& spec, std::int64_t cutoff) {
  if (spec.depth() < 1) throw PreconditionError("nested sum needs depth >= 1");
  for (const auto& position : spec.positions) {
    for (const auto& factor : position) {
      validate_factor(factor);
      if (const auto* sp = std::get_if<ShiftedPower>(&factor); sp && !sp->shift.is_rational()) {
        throw PreconditionError("exact evaluation needs rational shifts, got " + sp->shift.to_string());
      }
    }
  }
  const int d = spec.depth();
  std::vector<BigRational> acc(static_cast<std::size_t>(d));
  for (std::int64_t k = 1; k <= cutoff; ++k) {
    for (int i = d - 1; i >= 0; --i) {
      if (i > 0 && acc[i - 1].sign() == 0) continue;
      BigRational term = i == 0 ? BigRational(1) : acc[i - 1];
      for (const auto& factor : spec.positions[i]) term *= exact_factor_value(factor, k);
      acc[i] += term;
    }
  }
  return acc.back();
}

// ---------------------------------------------------------------------------
// Tail fitting
// ---------------------------------------------------------------------------

namespace {

struct BasisTerm {
  int order;      // power of 1/N beyond the leading N^(1-s)
  int log_power;  // power of log N
};

std::vector<BasisTerm> basis_terms(int orders, int max_log_power) {
  std::vector<BasisTerm> terms;
  for (int n = 0; n < orders; ++n) {
    for (int j = max_log_power; j >= 0; --j) terms.push_back({n, j});
  }
  return terms;
}

/// Least-squares fit of S(N) = V + sum_b c_b basis_b(N); returns V.
double fit_limit(std::span<const PartialSum> samples, double s, std::span<const BasisTerm> terms) {
  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto cols = static_cast<Eigen::Index>(terms.size()) + 1;
  const double log_lo = std::log(static_cast<double>(samples.front().cutoff));
  const double log_hi = std::log(static_cast<double>(samples.back().cutoff));
  const double center = 0.5 * (log_lo + log_hi);
  const double half_width = std::max(0.5 * (log_hi - log_lo), 1e-300);
  // Anchor N^-x at the largest cutoff so columns stay O(1) there.
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double n = static_cast<double>(samples[i].cutoff);
    const double log_n = std::log(n);
    const double t = (log_n - center) / half_width;
    a(i, 0) = 1.0;
    for (std::size_t b = 0; b < terms.size(); ++b) {
      const double exponent = (s - 1.0) + terms[b].order;
      a(i, static_cast<Eigen::Index>(b) + 1) = std::pow(t, terms[b].log_power) * std::exp(-exponent * (log_n - log_hi));
    }
    y(i) = samples[i].value;
  }
  for (Eigen::Index c = 1; c < cols; ++c) {
    const double norm = a.col(c).norm();
    if (norm > 0) a.col(c) /= norm;
  }
  const Eigen::VectorXd solution = a.colPivHouseholderQr().solve(y);
  return solution(0);
}

/// Every term is positive and every accumulator is compensated, so the float error is a
/// relative error per term: a couple of ulps per operation that forms it.
double roundoff_bound(const NestedSumSpec& spec, double value) {
  double ulps = 4.0;
  for (const auto& position : spec.positions) {
    ulps += 4.0;
    for (const auto& factor : position) {
      ulps += std::visit(
          [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ShiftedPower> || std::is_same_v<T, ExtraPower>) {
              return 2.0 * (f.exponent + 2);
            } else if constexpr (std::is_same_v<T, RisingFactorial>) {
              return 4.0 * f.degree + 2;
            } else {
              return 4.0 * (f.order + 1) * (f.exponent + 2);
            }
          },
          factor);
    }
  }
  return ulps * std::ldexp(1.0, -53) * std::abs(value);
}

}  // namespace

EvalResult extrapolate_tail(std::span<const PartialSum> partials, const TailModel& model) {
  if (partials.size() < 2) throw PreconditionError("extrapolation needs at least two partial sums");
  if (!(model.s > 1.0)) throw PreconditionError("tail model needs s > 1");
  for (std::size_t i = 1; i < partials.size(); ++i) {
    if (partials[i].cutoff <= partials[i - 1].cutoff) throw PreconditionError("cutoffs must be increasing");
  }
  const bool increasing = std::all_of(partials.begin() + 1, partials.end(), [&](const PartialSum& p) {
    return p.value >= (&p - 1)->value;
  });
  const bool decreasing = std::all_of(partials.begin() + 1, partials.end(), [&](const PartialSum& p) {
    return p.value <= (&p - 1)->value;
  });
  if (!increasing && !decreasing) throw PreconditionError("partial sums are not monotone");

  EvalResult result;
  result.cutoff = partials.back().cutoff;
  result.mode = EvalMode::kFloatExtrapolated;
  if (partials.front().value == partials.back().value) {
    result.value = partials.back().value;
    return result;
  }
  const auto all_terms = basis_terms(static_cast<int>(partials.size()), model.max_log_power);
  const std::span<const BasisTerm> full(all_terms.data(), partials.size() - 1);
  result.value = fit_limit(partials, model.s, full);
  const double reduced = partials.size() > 2 ? fit_limit(partials.subspan(1), model.s, full.first(full.size() - 1))
                                             : partials.back().value;
  result.tail_bound = 4.0 * std::abs(result.value - reduced);
  return result;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

namespace {

/// Cutoffs floor(2^(i/8)) >= 16, deduplicated.
std::vector<std::int64_t> sample_schedule(std::int64_t max_cutoff) {
  std::vector<std::int64_t> out;
  for (int i = 32;; ++i) {
    const auto n = static_cast<std::int64_t>(std::floor(std::exp2(i / 8.0)));
    if (n > max_cutoff) break;
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

struct Sample {
  std::int64_t cutoff;
  double value;
  std::vector<double> prefixes;
};

/// Least-squares fit of S(N) = V - sum_j A_j(N) N^-sigma_j (c_j0 + c_j1/N + ...); returns V.
/// The prefix sums A_j carry all log N growth, so each tail factor is a plain power series.
double fit_structured(std::span<const Sample> samples, const std::vector<int>& suffix_decay, int orders) {
  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto d = static_cast<Eigen::Index>(suffix_decay.size());
  const auto cols = 1 + d * orders;
  const double log_hi = std::log(static_cast<double>(samples.back().cutoff));
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double log_n = std::log(static_cast<double>(samples[i].cutoff));
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (int n = 0; n < orders; ++n) {
        const double exponent = suffix_decay[j] + n;
        a(i, 1 + j * orders + n) = samples[i].prefixes[j] * std::exp(-exponent * (log_n - log_hi));
      }
    }
    y(i) = samples[i].value;
  }
  for (Eigen::Index c = 1; c < cols; ++c) {
    const double norm = a.col(c).norm();
    if (norm > 0) a.col(c) /= norm;
  }
  const Eigen::VectorXd solution = a.colPivHouseholderQr().solve(y);
  return solution(0);
}

}  // namespace

EvalResult evaluate(const NestedSumSpec& spec, double target_accuracy, const EvalOptions& options) {
  if (!(target_accuracy > 0)) throw PreconditionError("target accuracy must be positive");
  if (options.initial_cutoff < 64 || options.max_cutoff < options.initial_cutoff) {
    throw PreconditionError("invalid cutoff configuration");
  }
  if (options.tail_orders < 2) throw PreconditionError("tail fit needs at least two orders");
  if (options.window_octaves < 2) throw PreconditionError("tail fit window too narrow");
  const DecayProfile profile = decay_profile(spec);

  EvalResult result;
  result.mode = EvalMode::kFloatExtrapolated;
  result.slow_convergence = min_shift(spec) <= -1.0 + options.min_shift_gap;

  const auto schedule = sample_schedule(options.max_cutoff);
  Scanner scanner(spec);
  std::vector<Sample> samples;
  auto record = [&] {
    if (samples.empty() || samples.back().cutoff != scanner.position()) {
      samples.push_back({scanner.position(), scanner.value(), scanner.prefixes()});
    }
  };
  auto next = schedule.begin();
  for (std::int64_t cutoff = options.initial_cutoff;; cutoff *= 2) {
    cutoff = std::min(cutoff, options.max_cutoff);
    for (; next != schedule.end() && *next <= cutoff; ++next) {
      scanner.advance_to(*next);
      record();
    }
    scanner.advance_to(cutoff);
    record();

    const auto lo = static_cast<std::int64_t>(std::ldexp(static_cast<double>(cutoff), -options.window_octaves));
    const auto first = std::find_if(samples.begin(), samples.end(), [&](const Sample& p) { return p.cutoff >= lo; });
    const std::span<const Sample> window(&*first, static_cast<std::size_t>(samples.end() - first));

    result.cutoff = cutoff;
    const double roundoff = roundoff_bound(spec, window.back().value);
    if (window.front().value == window.back().value) {
      result.value = window.back().value;
      result.tail_bound = roundoff;
    } else {
      result.value = fit_structured(window, profile.suffix_decay, options.tail_orders);
      const double reduced = fit_structured(window, profile.suffix_decay, options.tail_orders - 1);
      result.tail_bound = 4.0 * std::abs(result.value - reduced) + roundoff;
    }
    if (result.tail_bound <= target_accuracy) {
      result.accuracy_met = true;
      return result;
    }
    if (cutoff >= options.max_cutoff) {
      result.accuracy_met = false;
      return result;
    }
  }
}

EvalResult mzv(const MzvIndex& index, double target_accuracy, const EvalOptions& options) {
  if (!index.admissible()) {
    throw NotAdmissibleError("index " + index.to_string() + " is not admissible (last part is 1)");
  }
  return evaluate(NestedSumSpec::from_index(index), target_accuracy, options);
}

}  // namespace mzv
