#include "mzv/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "mzv/error.hpp"
#include "mzv/kahan.hpp"

namespace mzv {

namespace {

constexpr int kTopLevel = 12;
// Nodes closer than this to either endpoint are dropped; the mass beyond is negligible for
// every integrand accepted below and it keeps 1/(1-t1) well inside double range.
constexpr double kMinComplement = 1e-200;

struct Node {
  UnitPoint point;
  double dxdt;  // weight without the step h
};

/// Top-level abscissas t = k h_top, k = -K..K, in order.
class NodeTable {
 public:
  NodeTable() {
    const double h = step(kTopLevel);
    std::vector<Node> positive;
    for (int k = 0;; ++k) {
      const double t = k * h;
      const double s = std::numbers::pi / 2 * std::sinh(t);
      const double e = std::exp(-2.0 * s);
      const double x = 1.0 / (1.0 + e);
      const double xc = e / (1.0 + e);
      if (xc < kMinComplement) break;
      const double dxdt = std::numbers::pi / 2 * std::cosh(t) * 2.0 * e / ((1.0 + e) * (1.0 + e));
      positive.push_back({{x, xc}, dxdt});
    }
    half_count_ = static_cast<int>(positive.size()) - 1;
    for (int k = half_count_; k >= 1; --k) {
      const Node& n = positive[k];
      nodes_.push_back({{n.point.complement, n.point.x}, n.dxdt});
    }
    nodes_.insert(nodes_.end(), positive.begin(), positive.end());
  }

  static double step(int level) { return std::ldexp(1.0, 4 - level); }

  /// Nodes of `level` with their full weights.
  template <typename Visit>
  void for_each(int level, Visit&& visit) const {
    const int stride = 1 << (kTopLevel - level);
    const double h = step(level);
    const int first = half_count_ % stride;
    for (int i = first; i < static_cast<int>(nodes_.size()); i += stride) {
      visit(nodes_[i].point, h * nodes_[i].dxdt);
    }
  }

  std::vector<std::pair<UnitPoint, double>> level_nodes(int level) const {
    std::vector<std::pair<UnitPoint, double>> out;
    for_each(level, [&](UnitPoint p, double w) { out.emplace_back(p, w); });
    return out;
  }

 private:
  std::vector<Node> nodes_;
  int half_count_ = 0;
};

const NodeTable& node_table() {
  static const NodeTable table;
  return table;
}

void check_levels(const QuadratureOptions& options) {
  if (options.min_level < 1 || options.max_level > kTopLevel || options.min_level > options.max_level) {
    throw PreconditionError("quadrature levels must satisfy 1 <= min <= max <= " + std::to_string(kTopLevel));
  }
}

/// log(x) accurate near both endpoints.
double log_unit(UnitPoint p) { return p.x < 0.5 ? std::log(p.x) : std::log1p(-p.complement); }

double int_power(double base, int exponent) {
  double out = 1.0;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

double factorial(int n) {
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

template <typename LevelSum>
EvalResult refine(LevelSum&& level_sum, double acc, const QuadratureOptions& options) {
  check_levels(options);
  if (!(acc > 0)) throw PreconditionError("quadrature accuracy must be positive");
  EvalResult result;
  result.mode = EvalMode::kQuadrature;
  double previous = 0.0;
  for (int level = 1; level <= options.max_level; ++level) {
    const auto [value, magnitude] = level_sum(level);
    result.value = value;
    result.cutoff = level;
    if (level > 1) {
      result.tail_bound = std::abs(value - previous) + 64 * std::numeric_limits<double>::epsilon() * magnitude;
      if (level >= options.min_level && result.tail_bound <= acc) {
        result.accuracy_met = true;
        return result;
      }
    }
    previous = value;
  }
  result.accuracy_met = false;
  return result;
}

}  // namespace

EvalResult integrate_unit(const std::function<double(UnitPoint)>& f, double acc, const QuadratureOptions& options) {
  const NodeTable& table = node_table();
  return refine(
      [&](int level) {
        CompensatedSum sum;
        double magnitude = 0.0;
        table.for_each(level, [&](UnitPoint p, double w) {
          const double term = w * f(p);
          sum += term;
          magnitude += std::abs(term);
        });
        return std::pair{sum.value(), magnitude};
      },
      acc, options);
}

EvalResult integrate_unit_square(const std::function<double(UnitPoint, UnitPoint)>& f, double acc,
                                 const QuadratureOptions& options) {
  const NodeTable& table = node_table();
  return refine(
      [&](int level) {
        const auto nodes = table.level_nodes(level);
        CompensatedSum sum;
        double magnitude = 0.0;
        for (const auto& [outer, outer_w] : nodes) {
          CompensatedSum row;
          for (const auto& [inner, inner_w] : nodes) row += inner_w * f(inner, outer);
          const double term = outer_w * row.value();
          sum += term;
          magnitude += std::abs(term);
        }
        return std::pair{sum.value(), magnitude};
      },
      acc, options);
}

EvalResult integrate_E2(const E2Integrand& f, double acc, const QuadratureOptions& options) {
  if (f.log_inv_one_minus_t1 < 0 || f.log_one_minus_ratio < 0 || f.log_t2_over_t1 < 0 || f.log_inv_t2 < 0) {
    throw PreconditionError("log exponents must be nonnegative");
  }
  if (!(f.ratio_power > -1.0)) throw PreconditionError("(t1/t2)^a needs a > -1");
  if (f.t2_power < 0 || f.complement_ratio_power < 0 || f.one_minus_t1_power < 0) {
    throw PreconditionError("t2, (1-t2)/(1-t1) and (1-t1) powers must be nonnegative");
  }
  // t1 = t2 u, dt1 = t2 du: the measure dt1 dt2 / ((1-t1) t2) becomes du dt2 / (1-t1).
  auto integrand = [&f](UnitPoint u, UnitPoint t2) {
    const double one_minus_t1 = t2.complement + t2.x * u.complement;
    double value = f.constant / one_minus_t1;
    if (f.log_inv_one_minus_t1) value *= int_power(-std::log(one_minus_t1), f.log_inv_one_minus_t1);
    if (f.log_one_minus_ratio) {
      value *= int_power(std::log1p(t2.x * u.complement / t2.complement), f.log_one_minus_ratio);
    }
    if (f.log_t2_over_t1) value *= int_power(-log_unit(u), f.log_t2_over_t1);
    if (f.log_inv_t2) value *= int_power(-log_unit(t2), f.log_inv_t2);
    if (f.ratio_power != 0.0) value *= std::exp(f.ratio_power * log_unit(u));
    if (f.t2_power != 0.0) value *= std::exp(f.t2_power * log_unit(t2));
    if (f.complement_ratio_power != 0.0) {
      value *= std::pow(t2.complement / one_minus_t1, f.complement_ratio_power);
    }
    if (f.one_minus_t1_power != 0.0) value *= std::pow(one_minus_t1, f.one_minus_t1_power);
    return value;
  };
  return integrate_unit_square(integrand, acc, options);
}

double TwoFormResult::difference() const { return std::abs(first.value - second.value); }

EvalResult TwoFormResult::combined() const {
  EvalResult out = first;
  out.tail_bound = std::max({first.tail_bound, second.tail_bound, difference()});
  out.accuracy_met = first.accuracy_met && second.accuracy_met;
  return out;
}

TwoFormResult ones_power_forms(int m, int n, double acc) {
  if (m < 0 || n < 0) throw PreconditionError("ones_power needs m, n >= 0");
  E2Integrand a;
  a.log_inv_one_minus_t1 = m;
  a.log_inv_t2 = n;
  a.constant = 1.0 / (factorial(m) * factorial(n));
  E2Integrand b = a;
  b.log_inv_one_minus_t1 = 0;
  b.log_one_minus_ratio = m;
  return {integrate_E2(a, acc), integrate_E2(b, acc)};
}

EvalResult ones_power_value(int m, int n, double acc) { return ones_power_forms(m, n, acc).combined(); }

EvalResult ones_sum_value(int p, int q, int r, int l, double acc) {
  if (p < 0 || q < 0 || r < 0 || l < 0) throw PreconditionError("ones_sum needs nonnegative parameters");
  E2Integrand f;
  f.log_inv_one_minus_t1 = p;
  f.log_one_minus_ratio = r;
  f.log_t2_over_t1 = q;
  f.log_inv_t2 = l;
  f.constant = 1.0 / (factorial(p) * factorial(q) * factorial(r) * factorial(l));
  return integrate_E2(f, acc);
}

TwoFormResult I_pqar(int p, int q, double a, int r, double acc) {
  if (p < 1 || q < 1) throw PreconditionError("I(p,q;a,r) needs p, q >= 1");
  if (r < 0) throw PreconditionError("I(p,q;a,r) needs r >= 0");
  if (!(a > -1.0)) throw PreconditionError("I(p,q;a,r) needs a > -1");
  const double constant = 1.0 / (factorial(p - 1) * factorial(q - 1));
  E2Integrand collapsed;
  collapsed.t2_power = r;
  collapsed.ratio_power = a;
  collapsed.log_one_minus_ratio = p - 1;
  collapsed.log_inv_t2 = q - 1;
  collapsed.constant = constant;
  E2Integrand mirrored;
  mirrored.complement_ratio_power = r;
  mirrored.ratio_power = a;
  mirrored.log_one_minus_ratio = q - 1;
  mirrored.log_inv_t2 = p - 1;
  mirrored.constant = constant;
  return {integrate_E2(collapsed, acc), integrate_E2(mirrored, acc)};
}

std::array<EvalResult, 3> three_integrals(int p, int q, int r, double m, double acc) {
  if (p < 0 || q < 0 || r < 0) throw PreconditionError("three integrals need p, q, r >= 0");
  if (!(m >= 0)) throw PreconditionError("three integrals need m >= 0");
  const double constant = 1.0 / (factorial(p) * factorial(q) * factorial(r));
  E2Integrand first;
  first.ratio_power = m;
  first.log_inv_one_minus_t1 = p;
  first.log_one_minus_ratio = r;
  first.log_t2_over_t1 = q;
  first.constant = constant;
  E2Integrand second;
  second.t2_power = m;
  second.log_one_minus_ratio = p;
  second.log_t2_over_t1 = r;
  second.log_inv_t2 = q;
  second.constant = constant;
  E2Integrand third;
  third.one_minus_t1_power = m;
  third.log_inv_one_minus_t1 = q;
  third.log_one_minus_ratio = r;
  third.log_t2_over_t1 = p;
  third.constant = constant;
  return {integrate_E2(first, acc), integrate_E2(second, acc), integrate_E2(third, acc)};
}

EvalResult zeta2_from_E3(double acc) {
  // Inner integrations: int_0^t2 dt1/(1-t1)^2 = t2/(1-t2), then int_0^t3 dt2/(1-t2) = log(1/(1-t3)).
  return integrate_unit(
      [](UnitPoint t) {
        const double log_inv = t.x < 0.5 ? -std::log1p(-t.x) : -std::log(t.complement);
        return log_inv / t.x;
      },
      acc);
}

double finite_difference_integral(std::int64_t ell, int r, int p) {
  if (ell < 1 || r < 0 || p < 1) throw PreconditionError("finite difference integral needs ell, p >= 1, r >= 0");
  // Scale by ell^(p+r) so the integral is O(1) and an absolute target is a relative one.
  const double x_ell = static_cast<double>(ell);
  const double log_scale = (p + r) * std::log(x_ell);
  const double constant = 1.0 / factorial(p - 1);
  const auto result = integrate_unit(
      [&](UnitPoint x) {
        const double log_x = log_unit(x);
        return constant * std::exp(log_scale + (x_ell - 1.0) * log_x + r * std::log(x.complement)) *
               int_power(-log_x, p - 1);
      },
      1e-14);
  return result.value * std::exp(-log_scale);
}

}  // namespace mzv
