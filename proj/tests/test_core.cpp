#include <random>

#include "doctest.h"
#include "semsearch/core.hpp"
#include "semsearch/matching.hpp"
#include "support/workloads.hpp"

using namespace semsearch;

TEST_CASE("apply_threshold keeps values at or above alpha and zeros the rest") {
  CHECK(apply_threshold(0.85, 0.8) == doctest::Approx(0.85));
  CHECK(apply_threshold(0.79, 0.8) == 0.0);
  CHECK(apply_threshold(1.0, 0.8) == doctest::Approx(1.0));
}

TEST_CASE("apply_threshold maps into {0} union [alpha, 1]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    double alpha = 0.05 + 0.9 * unit(rng);
    double s = unit(rng);
    double out = apply_threshold(s, alpha);
    CHECK((out == 0.0 || (out >= alpha && out <= 1.0)));
  }
}

TEST_CASE("vanilla_overlap basics") {
  std::vector<ElementId> a{1, 2, 3}, b{2, 3, 4}, c{3, 4};
  CHECK(vanilla_overlap(a, a) == 3);
  CHECK(vanilla_overlap({1, 2}, {3, 4}) == 0);
  CHECK(vanilla_overlap(a, b) == 2);
  CHECK(vanilla_overlap(a, c) == 1);
}

TEST_CASE("vanilla_overlap is symmetric and self-counting") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    std::vector<ElementId> a, b;
    for (ElementId e = 0; e < 20; ++e) {
      if (rng() & 1) a.push_back(e);
      if (rng() & 1) b.push_back(e);
    }
    CHECK(vanilla_overlap(a, b) == vanilla_overlap(b, a));
    CHECK(vanilla_overlap(a, a) == a.size());
  }
}

TEST_CASE("vanilla overlap never exceeds the exact semantic overlap") {
  // identical ids always weigh 1, so the identity matching alone reaches
  // the vanilla overlap on every instance
  std::mt19937_64 rng(13);
  for (int it = 0; it < 60; ++it) {
    auto inst = testing::make_pair_instance(rng);
    const auto& set = inst.collection.sets[0];
    double so = exact_so(inst.query, set, inst.provider, inst.alpha);
    CHECK(vanilla_overlap(inst.query.elements, set.elements) <= so + kScoreEps);
  }
}

TEST_CASE("make_query dedups, sorts, and quarantines unknown tokens") {
  Dictionary dict;
  dict.intern("a");
  dict.intern("b");
  QuerySet q = make_query({"b", "a", "b", "zz", "zz", "yy"}, dict);
  REQUIRE(q.elements.size() == 4);
  CHECK(std::is_sorted(q.elements.begin(), q.elements.end()));
  CHECK(q.oov_base == 2);
  CHECK(q.oov_tokens.size() == 2);  // zz, yy each once
  CHECK(q.elements[0] == *dict.find("a"));
  CHECK(q.elements[1] == *dict.find("b"));
}

TEST_CASE("dictionary interning is idempotent and first-seen ordered") {
  Dictionary dict;
  CHECK(dict.intern("x") == 0);
  CHECK(dict.intern("y") == 1);
  CHECK(dict.intern("x") == 0);
  CHECK(dict.token(1) == "y");
  CHECK(!dict.find("z").has_value());
}

TEST_CASE("collection add_set collapses duplicates and tracks frequency") {
  Collection c;
  ElementId a = c.dictionary.intern("a"), b = c.dictionary.intern("b");
  c.add_set({b, a, b});
  c.add_set({a});
  REQUIRE(c.sets.size() == 2);
  CHECK(c.sets[0].elements == std::vector<ElementId>{a, b});
  CHECK(c.frequency[a] == 2);
  CHECK(c.frequency[b] == 1);
}

TEST_CASE("search params validation") {
  SearchParams p;
  CHECK_NOTHROW(p.validate());
  p.k = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.k = 1;
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 1.0;
  p.partitions = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
