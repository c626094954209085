#include "mzv/index.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "mzv/error.hpp"

namespace mzv {

MzvIndex::MzvIndex(std::vector<int> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw PreconditionError("index must have at least one part");
  for (int a : parts_) {
    if (a < 1) throw PreconditionError("index parts must be positive, got " + std::to_string(a));
  }
}

int MzvIndex::weight() const noexcept { return std::accumulate(parts_.begin(), parts_.end(), 0); }

MzvIndex MzvIndex::shifted(const std::vector<int>& shift) const {
  if (shift.size() != parts_.size()) throw PreconditionError("shift length differs from index depth");
  std::vector<int> out(parts_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (shift[i] < 0) throw PreconditionError("shift entries must be nonnegative");
    out[i] += shift[i];
  }
  return MzvIndex(std::move(out));
}

std::string MzvIndex::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(parts_[i]);
  }
  return s + ")";
}

PqDecomposition pq_decompose(const MzvIndex& index) {
  if (!index.admissible()) {
    throw NotAdmissibleError("index " + index.to_string() + " is not admissible (last part is 1)");
  }
  PqDecomposition pairs;
  int ones = 0;
  for (int a : index.parts()) {
    if (a == 1) {
      ++ones;
    } else {
      pairs.push_back({ones + 1, a - 1});
      ones = 0;
    }
  }
  return pairs;
}

MzvIndex pq_compose(const PqDecomposition& pairs) {
  if (pairs.empty()) throw PreconditionError("pq_compose needs at least one pair");
  std::vector<int> parts;
  for (const auto& [p, q] : pairs) {
    if (p < 1 || q < 1) throw PreconditionError("pq pairs must be positive");
    parts.insert(parts.end(), static_cast<std::size_t>(p - 1), 1);
    parts.push_back(q + 1);
  }
  return MzvIndex(std::move(parts));
}

MzvIndex dual(const MzvIndex& index) {
  PqDecomposition pairs = pq_decompose(index);
  std::reverse(pairs.begin(), pairs.end());
  for (auto& pair : pairs) std::swap(pair.p, pair.q);
  return pq_compose(pairs);
}

namespace {

void compositions_rec(int remaining, int slot, int min_part, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  const int slots_left = static_cast<int>(current.size()) - slot;
  if (slots_left == 1) {
    current[slot] = remaining;
    out.push_back(current);
    return;
  }
  const int reserve = (slots_left - 1) * min_part;
  for (int v = min_part; v <= remaining - reserve; ++v) {
    current[slot] = v;
    compositions_rec(remaining - v, slot + 1, min_part, current, out);
  }
}

}  // namespace

std::vector<std::vector<int>> compositions(int total, int parts, int min_part) {
  if (parts < 1) throw PreconditionError("compositions needs a positive number of parts");
  if (min_part != 0 && min_part != 1) throw PreconditionError("min_part must be 0 or 1");
  std::vector<std::vector<int>> out;
  if (total < parts * min_part) return out;
  std::vector<int> current(static_cast<std::size_t>(parts));
  compositions_rec(total, 0, min_part, current, out);
  return out;
}

std::vector<MzvIndex> admissible_indices(int weight) {
  std::vector<MzvIndex> out;
  for (int depth = 1; depth < weight; ++depth) {
    for (auto& c : compositions(weight, depth, 1)) {
      if (c.back() >= 2) out.emplace_back(std::move(c));
    }
  }
  return out;
}

namespace {

class IndexParser {
 public:
  explicit IndexParser(std::string_view text) : text_(text) {}

  MzvIndex parse() {
    skip_space();
    bool paren = false;
    if (peek() == '(') {
      paren = true;
      ++pos_;
    }
    std::vector<int> parts;
    while (true) {
      skip_space();
      if (peek() == '{') {
        ++pos_;
        const int value = part();
        expect('}');
        expect('^');
        const int count = number();
        parts.insert(parts.end(), static_cast<std::size_t>(count), value);
      } else {
        parts.push_back(part());
      }
      skip_space();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      break;
    }
    if (paren) expect(')');
    skip_space();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    if (parts.empty()) throw ParseError("empty index", pos_);
    return MzvIndex(std::move(parts));
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  int part() {
    skip_space();
    const std::size_t start = pos_;
    const int value = number();
    if (value < 1) throw ParseError("index parts must be positive", start);
    return value;
  }

  int number() {
    skip_space();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 1000000) throw ParseError("number too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected a number", start);
    return static_cast<int>(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

MzvIndex parse_index(std::string_view text) { return IndexParser(text).parse(); }

std::int64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (n > 62) throw PreconditionError("binomial argument too large");
  k = std::min(k, n - k);
  __int128 result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return static_cast<std::int64_t>(result);
}

}  // namespace mzv
