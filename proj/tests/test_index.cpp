#include <gtest/gtest.h>

#include "mzv/error.hpp"
#include "mzv/index.hpp"

using namespace mzv;

namespace {

using Parts = std::vector<int>;

}  // namespace

TEST(MzvIndex, WeightDepthAdmissible) {
  const MzvIndex k{1, 2, 3};
  EXPECT_EQ(k.weight(), 6);
  EXPECT_EQ(k.depth(), 3);
  EXPECT_TRUE(k.admissible());
  EXPECT_FALSE((MzvIndex{2, 1}).admissible());
  EXPECT_EQ(k.to_string(), "(1,2,3)");
}

TEST(MzvIndex, RejectsEmptyAndNonPositiveParts) {
  EXPECT_THROW(MzvIndex(Parts{}), PreconditionError);
  EXPECT_THROW((MzvIndex{1, 0, 2}), PreconditionError);
}

TEST(MzvIndex, ShiftedKeepsDepth) {
  const MzvIndex k{1, 2};
  EXPECT_EQ(k.shifted({0, 3}), (MzvIndex{1, 5}));
  EXPECT_THROW(k.shifted({1}), PreconditionError);
  EXPECT_THROW(k.shifted({-1, 0}), PreconditionError);
}

TEST(PqDecompose, Examples) {
  EXPECT_EQ(pq_decompose({2}), (PqDecomposition{{1, 1}}));
  EXPECT_EQ(pq_decompose({1, 2}), (PqDecomposition{{2, 1}}));
  EXPECT_EQ(pq_decompose({2, 3}), (PqDecomposition{{1, 1}, {1, 2}}));
  EXPECT_THROW(pq_decompose({2, 1}), NotAdmissibleError);
}

TEST(PqCompose, Examples) {
  EXPECT_EQ(pq_compose({{1, 1}}), (MzvIndex{2}));
  EXPECT_EQ(pq_compose({{2, 1}}), (MzvIndex{1, 2}));
  EXPECT_EQ(pq_compose({{1, 2}, {2, 1}}), (MzvIndex{3, 1, 2}));
  EXPECT_THROW(pq_compose({}), PreconditionError);
  EXPECT_THROW(pq_compose({{0, 1}}), PreconditionError);
}

TEST(Dual, Examples) {
  EXPECT_EQ(dual({1, 2}), (MzvIndex{3}));
  EXPECT_EQ(dual({2}), (MzvIndex{2}));
  EXPECT_EQ(dual({2, 3}), (MzvIndex{1, 2, 2}));
  EXPECT_EQ(dual({1, 1, 2}), (MzvIndex{4}));
  EXPECT_THROW(dual({1}), NotAdmissibleError);
}

TEST(Dual, InvolutionAndWeightExhaustiveToWeight12) {
  std::size_t seen = 0;
  for (int w = 2; w <= 12; ++w) {
    const auto indices = admissible_indices(w);
    // admissible indices of weight w: compositions of w - 2 extended by last part >= 2
    EXPECT_EQ(indices.size(), std::size_t{1} << (w - 2)) << "weight " << w;
    for (const auto& k : indices) {
      const MzvIndex d = dual(k);
      ASSERT_EQ(dual(d), k) << k.to_string();
      ASSERT_EQ(d.weight(), k.weight()) << k.to_string();
      ASSERT_EQ(d.depth(), k.weight() - k.depth()) << k.to_string();
      ASSERT_EQ(pq_compose(pq_decompose(k)), k) << k.to_string();
      ++seen;
    }
  }
  EXPECT_EQ(seen, std::size_t{2047});
}

TEST(Compositions, Examples) {
  EXPECT_EQ(compositions(3, 2, 1), (std::vector<Parts>{{1, 2}, {2, 1}}));
  EXPECT_EQ(compositions(2, 2, 0), (std::vector<Parts>{{0, 2}, {1, 1}, {2, 0}}));
  EXPECT_EQ(compositions(6, 3, 1).size(), 10u);
  EXPECT_TRUE(compositions(2, 3, 1).empty());
  EXPECT_EQ(compositions(0, 2, 0), (std::vector<Parts>{{0, 0}}));
}

TEST(Compositions, CountsAndOrder) {
  for (int w = 1; w <= 10; ++w) {
    for (int r = 1; r <= w; ++r) {
      const auto list = compositions(w, r, 1);
      EXPECT_EQ(static_cast<std::int64_t>(list.size()), binomial(w - 1, r - 1));
      EXPECT_TRUE(std::is_sorted(list.begin(), list.end()));
      EXPECT_EQ(std::adjacent_find(list.begin(), list.end()), list.end());
      for (const auto& c : list) {
        EXPECT_EQ(static_cast<int>(c.size()), r);
        int sum = 0;
        for (int v : c) sum += v;
        EXPECT_EQ(sum, w);
      }
    }
    for (int r = 1; r <= 4; ++r) {
      EXPECT_EQ(static_cast<std::int64_t>(compositions(w, r, 0).size()), binomial(w + r - 1, r - 1));
    }
  }
}

TEST(Binomial, Values) {
  EXPECT_EQ(binomial(5, 2), 10);
  EXPECT_EQ(binomial(0, 0), 1);
  EXPECT_EQ(binomial(4, 5), 0);
  EXPECT_EQ(binomial(62, 31), 465428353255261088LL);
}

TEST(ParseIndex, AcceptedForms) {
  EXPECT_EQ(parse_index("(1,2,3)"), (MzvIndex{1, 2, 3}));
  EXPECT_EQ(parse_index("1,2"), (MzvIndex{1, 2}));
  EXPECT_EQ(parse_index(" ( 2 , 3 ) "), (MzvIndex{2, 3}));
  EXPECT_EQ(parse_index("{1}^4,3"), (MzvIndex{1, 1, 1, 1, 3}));
  EXPECT_EQ(parse_index("({1}^2,3)"), (MzvIndex{1, 1, 3}));
  EXPECT_EQ(parse_index("{1}^2,3"), (MzvIndex{1, 1, 3}));
  EXPECT_EQ(parse_index(MzvIndex{4, 1, 2}.to_string()), (MzvIndex{4, 1, 2}));
}

TEST(ParseIndex, ErrorsCarryPosition) {
  auto position_of = [](const char* text) -> std::size_t {
    try {
      parse_index(text);
    } catch (const ParseError& e) {
      return e.position();
    }
    ADD_FAILURE() << "no error for " << text;
    return 0;
  };
  EXPECT_EQ(position_of("(1,x)"), 3u);
  EXPECT_EQ(position_of("(1,2"), 4u);
  EXPECT_EQ(position_of(""), 0u);
  EXPECT_EQ(position_of("(1,,2)"), 3u);
  EXPECT_EQ(position_of("(0,2)"), 1u);
  EXPECT_THROW(parse_index("{1}^,2"), ParseError);
  EXPECT_THROW(parse_index("(1,2))"), ParseError);
}
