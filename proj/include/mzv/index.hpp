#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mzv {

/// A composition (a_1, ..., a_r) of positive integers, stored leftmost-first:
/// a_1 is the exponent of the innermost (smallest) summation variable k_1.
class MzvIndex {
 public:
  explicit MzvIndex(std::vector<int> parts);
  MzvIndex(std::initializer_list<int> parts) : MzvIndex(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const noexcept { return parts_; }
  int depth() const noexcept { return static_cast<int>(parts_.size()); }
  int weight() const noexcept;
  bool admissible() const noexcept { return parts_.back() >= 2; }

  int operator[](std::size_t i) const { return parts_[i]; }

  /// Entrywise sum with a shift vector of the same length.
  MzvIndex shifted(const std::vector<int>& shift) const;

  /// "(1,2,3)".
  std::string to_string() const;

  friend bool operator==(const MzvIndex&, const MzvIndex&) = default;
  friend auto operator<=>(const MzvIndex&, const MzvIndex&) = default;

 private:
  std::vector<int> parts_;
};

/// One (p, q) pair of the run-length form ({1}^{p-1}, q+1).
struct PqPair {
  int p = 1;
  int q = 1;
  friend bool operator==(const PqPair&, const PqPair&) = default;
};

using PqDecomposition = std::vector<PqPair>;

/// Nonnegative integer vector c added entrywise to an index.
using ShiftVector = std::vector<int>;

/// Splits an admissible index into its (p_i, q_i) pairs. Throws NotAdmissibleError.
PqDecomposition pq_decompose(const MzvIndex& index);

/// Inverse of pq_decompose. Throws PreconditionError on an empty list or nonpositive entries.
MzvIndex pq_compose(const PqDecomposition& pairs);

/// The dual index: pairs reversed with p and q swapped. Throws NotAdmissibleError.
MzvIndex dual(const MzvIndex& index);

/// All length-`parts` vectors with entries >= min_part summing to `total`, in
/// lexicographic order. An infeasible request yields an empty list.
std::vector<std::vector<int>> compositions(int total, int parts, int min_part);

/// All admissible indices of the given weight, ordered by depth then lexicographically.
std::vector<MzvIndex> admissible_indices(int weight);

/// Parses "(1,2,3)", "1,2,3", "{1}^4,3" or "({1}^2,3)". Throws ParseError.
MzvIndex parse_index(std::string_view text);

/// Exact binomial coefficient for small arguments (n <= 62).
std::int64_t binomial(int n, int k);

}  // namespace mzv
