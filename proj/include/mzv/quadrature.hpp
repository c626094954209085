#pragma once

#include <array>
#include <functional>

#include "mzv/nested_sum.hpp"

namespace mzv {

/// A point of (0,1) together with its complement 1 - x, both to full relative precision.
struct UnitPoint {
  double x;
  double complement;
};

struct QuadratureOptions {
  int min_level = 4;
  int max_level = 12;
};

/// Tanh-sinh rule on (0,1). Level L uses step 2^(4-L); each level contains the nodes of the
/// previous one. The error estimate is the change from the previous level.
EvalResult integrate_unit(const std::function<double(UnitPoint)>& f, double acc, const QuadratureOptions& options = {});

/// Product tanh-sinh rule on (0,1)^2.
EvalResult integrate_unit_square(const std::function<double(UnitPoint, UnitPoint)>& f, double acc,
                                 const QuadratureOptions& options = {});

/// constant * (t1/t2)^a t2^rho ((1-t2)/(1-t1))^sigma (1-t1)^mu
///   * log(1/(1-t1))^p log((1-t1)/(1-t2))^r log(t2/t1)^q log(1/t2)^l
/// against dt1 dt2 / ((1-t1) t2) over 0 < t1 < t2 < 1.
struct E2Integrand {
  int log_inv_one_minus_t1 = 0;  // p
  int log_one_minus_ratio = 0;   // r
  int log_t2_over_t1 = 0;        // q
  int log_inv_t2 = 0;            // l
  double ratio_power = 0.0;              // a > -1
  double t2_power = 0.0;                 // rho >= 0
  double complement_ratio_power = 0.0;   // sigma >= 0
  double one_minus_t1_power = 0.0;       // mu >= 0
  double constant = 1.0;
};

/// Integrates over the triangle via t1 = t2 u (so every singularity sits on the boundary of
/// the unit square). Throws PreconditionError for parameters outside the convergence region.
EvalResult integrate_E2(const E2Integrand& f, double acc, const QuadratureOptions& options = {});

/// Two integral forms of the same quantity.
struct TwoFormResult {
  EvalResult first;
  EvalResult second;

  double difference() const;
  /// The first form, with tail_bound widened to cover the second form as well.
  EvalResult combined() const;
};

/// zeta({1}^m, n+2) via both double-integral forms (1/(1-t1) and (1-t1)/(1-t2) logs).
TwoFormResult ones_power_forms(int m, int n, double acc);
EvalResult ones_power_value(int m, int n, double acc);

/// sum_{|alpha| = q+r+1} zeta({1}^p, alpha_1, ..., alpha_{r+1} + l + 1) as a double integral.
EvalResult ones_sum_value(int p, int q, int r, int l, double acc);

/// I(p, q; a, r): the collapsed double integral with t2^r (t1/t2)^a and the dual form with
/// ((1-u2)/(1-u1))^r (u1/u2)^a and the log powers exchanged.
TwoFormResult I_pqar(int p, int q, double a, int r, double acc);

/// The three equal double integrals with (t1/t2)^m, u2^m and (1-v1)^m. m may be real (>= 0).
std::array<EvalResult, 3> three_integrals(int p, int q, int r, double m, double acc);

/// int_{0<t1<t2<t3<1} dt1/(1-t1)^2 dt2/t2 dt3/t3, reduced to int_0^1 log(1/(1-t))/t dt.
EvalResult zeta2_from_E3(double acc = 1e-12);

}  // namespace mzv
