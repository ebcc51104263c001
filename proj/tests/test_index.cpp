#include <random>

#include "doctest.h"
#include "semsearch/index.hpp"
#include "support/workloads.hpp"

using namespace semsearch;

TEST_CASE("inverted index postings layout") {
  Collection coll;
  ElementId e1 = coll.dictionary.intern("1"), e2 = coll.dictionary.intern("2"),
            e3 = coll.dictionary.intern("3");
  coll.add_set({e1, e2});
  coll.add_set({e2, e3});
  auto index = InvertedIndex::build(coll);
  CHECK(std::vector<std::uint32_t>(index.postings(e1).begin(), index.postings(e1).end()) ==
        std::vector<std::uint32_t>{0});
  CHECK(std::vector<std::uint32_t>(index.postings(e2).begin(), index.postings(e2).end()) ==
        std::vector<std::uint32_t>{0, 1});
  CHECK(std::vector<std::uint32_t>(index.postings(e3).begin(), index.postings(e3).end()) ==
        std::vector<std::uint32_t>{1});
  CHECK(index.postings(99).empty());
}

TEST_CASE("empty collection yields an empty index") {
  Collection coll;
  auto index = InvertedIndex::build(coll);
  CHECK(index.total_postings() == 0);
  CHECK(index.postings(0).empty());
}

TEST_CASE("membership round-trip and posting mass on a random collection") {
  std::mt19937_64 rng(31);
  Collection coll;
  for (int i = 0; i < 30; ++i) coll.dictionary.intern("t" + std::to_string(i));
  std::size_t mass = 0;
  for (int s = 0; s < 100; ++s) {
    std::vector<ElementId> elements;
    for (ElementId e = 0; e < 30; ++e)
      if (rng() % 4 == 0) elements.push_back(e);
    if (elements.empty()) elements.push_back(static_cast<ElementId>(rng() % 30));
    coll.add_set(std::move(elements));
  }
  auto index = InvertedIndex::build(coll);
  for (const auto& set : coll.sets) mass += set.elements.size();
  CHECK(index.total_postings() == mass);

  for (ElementId t = 0; t < coll.dictionary.size(); ++t) {
    auto posting = index.postings(t);
    CHECK(std::is_sorted(posting.begin(), posting.end()));
    std::vector<char> in_posting(coll.sets.size(), 0);
    for (std::uint32_t sid : posting) in_posting[sid] = 1;
    for (const auto& set : coll.sets) {
      bool member = std::binary_search(set.elements.begin(), set.elements.end(), t);
      CHECK(member == static_cast<bool>(in_posting[set.id]));
    }
  }
}

TEST_CASE("partition index equals filtered full index") {
  std::mt19937_64 rng(32);
  Collection coll;
  for (int i = 0; i < 20; ++i) coll.dictionary.intern("t" + std::to_string(i));
  for (int s = 0; s < 40; ++s) {
    std::vector<ElementId> elements;
    for (ElementId e = 0; e < 20; ++e)
      if (rng() % 3 == 0) elements.push_back(e);
    if (elements.empty()) elements.push_back(0);
    coll.add_set(std::move(elements));
  }
  std::vector<std::uint32_t> subset;
  for (std::uint32_t s = 0; s < coll.sets.size(); s += 2) subset.push_back(s);
  auto part = InvertedIndex::build(coll, subset);
  auto full = InvertedIndex::build(coll);
  for (ElementId t = 0; t < coll.dictionary.size(); ++t) {
    std::vector<std::uint32_t> expected;
    for (std::uint32_t sid : full.postings(t))
      if (sid % 2 == 0) expected.push_back(sid);
    CHECK(std::vector<std::uint32_t>(part.postings(t).begin(), part.postings(t).end()) ==
          expected);
  }
}
