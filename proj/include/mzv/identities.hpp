#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mzv/index.hpp"
#include "mzv/nested_sum.hpp"

namespace mzv {

/// A parameter value as it appears in reports: integer, real, or text (indices, vectors).
using ParamValue = std::variant<std::int64_t, double, std::string>;

/// Parameters in their identity-specific order.
using ParamList = std::vector<std::pair<std::string, ParamValue>>;

std::string to_string(const ParamValue& value);

/// One evaluated side of an identity.
struct Side {
  std::string label;
  EvalResult result;
};

/// One verified identity instance.
struct IdentityCheck {
  std::string identity;
  ParamList params;
  /// Two sides, or three for three_way / restricted_sum / alternating_sums and some quadrature checks.
  std::vector<Side> sides;
  /// Largest pairwise difference between sides.
  double abs_diff = 0.0;
  /// max(requested tolerance, error_budget).
  double tolerance = 0.0;
  /// Sum of the sides' tail bounds plus a roundoff margin.
  double error_budget = 0.0;
  /// abs_diff <= tolerance.
  bool pass = false;
  /// Every evaluation reached its accuracy target.
  bool accuracy_met = true;
  std::string note;

  const EvalResult& lhs() const { return sides.at(0).result; }
  const EvalResult& rhs() const { return sides.at(1).result; }
  /// The tolerance had to grow beyond the requested one to cover the error budget.
  bool budget_exceeded(double requested) const { return error_budget > requested; }
};

struct CheckOptions {
  /// Accuracy target for every individual series / integral.
  double acc = 1e-7;
  /// Requested tolerance on the difference; 10 * acc when <= 0.
  double tolerance = 0.0;
  EvalOptions eval;

  double effective_tolerance() const { return tolerance > 0 ? tolerance : 10.0 * acc; }
};

struct ParamDualityParams {
  int p = 1;
  int q = 1;
  int r = 0;
  double a = 0.0;
  int m = 0;
};

IdentityCheck check_duality(const MzvIndex& index, const CheckOptions& options = {});
IdentityCheck check_sum_formula(int m, int p, const CheckOptions& options = {});
IdentityCheck check_ohno(const MzvIndex& index, int m, const CheckOptions& options = {});
IdentityCheck check_composition_duality(int p, int q, int m, const CheckOptions& options = {});
IdentityCheck check_param_duality(const ParamDualityParams& params, const CheckOptions& options = {});
IdentityCheck check_shifted_sum_formula(int p, int m, int r, const CheckOptions& options = {});
IdentityCheck check_vector_duality(const std::vector<int>& pvec, const std::vector<int>& qvec, double a,
                         const CheckOptions& options = {});
IdentityCheck check_three_way(int p, int q, int r, int m, const CheckOptions& options = {});
IdentityCheck check_restricted_sum(int p, int q, int r, const CheckOptions& options = {});
IdentityCheck check_alternating_sums(int m, int p, const CheckOptions& options = {});

/// Quadrature cross-checks, reported in the same record shape.
IdentityCheck check_quad_e2_anchor(const CheckOptions& options = {});
IdentityCheck check_quad_e3_anchor(const CheckOptions& options = {});
IdentityCheck check_quad_ones_power(int m, int n, const CheckOptions& options = {});
IdentityCheck check_quad_ones_sum(int p, int q, int r, int l, const CheckOptions& options = {});
IdentityCheck check_quad_ipqar(int p, int q, double a, int r, const CheckOptions& options = {});
IdentityCheck check_quad_three_integrals(int p, int q, int r, int m, const CheckOptions& options = {});

/// Stable identity names: the series identities, then the quad_* cross-checks.
const std::vector<std::string>& identity_names();

/// Parameter names of an identity in their canonical order. Throws PreconditionError.
const std::vector<std::string>& identity_parameters(const std::string& identity);

/// Runs one instance from named parameters. Throws PreconditionError for unknown identities,
/// missing parameters, or violated preconditions.
IdentityCheck run_check(const std::string& identity, const ParamList& params, const CheckOptions& options = {});

/// Whether the parameters satisfy the identity's preconditions (no evaluation).
bool preconditions_hold(const std::string& identity, const ParamList& params);

/// Parameter name -> candidate values.
using GridRanges = std::map<std::string, std::vector<ParamValue>>;

/// Expands grid conveniences: "weight" into every admissible "index" of that weight (duality,
/// ohno), and for vector_duality "n" + "entries" into every pair of p/q vectors.
GridRanges expand_ranges(const std::string& identity, const GridRanges& ranges);

/// The Cartesian product of the ranges in parameter order, infeasible instances dropped.
std::vector<ParamList> grid_instances(const std::string& identity, const GridRanges& ranges);

/// Checks the instances, possibly concurrently; results follow input order. The first
/// error raised by any instance is rethrown.
std::vector<IdentityCheck> run_instances(const std::string& identity, const std::vector<ParamList>& instances,
                                         const CheckOptions& options = {}, int parallelism = 1);

/// Checks every grid instance; results follow grid order whatever the parallelism.
std::vector<IdentityCheck> run_grid(const std::string& identity, const GridRanges& ranges,
                                    const CheckOptions& options = {}, int parallelism = 1);

}  // namespace mzv
