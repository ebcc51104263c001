#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semsearch {

/// Dense index into the dictionary. Ids are assigned in first-seen order
/// during ingestion; two equal surface strings always map to the same id.
using ElementId = std::uint32_t;

/// Similarity mass. All cross-module score comparisons use this absolute
/// tolerance.
using Score = double;
inline constexpr double kScoreEps = 1e-9;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroVector : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownProvider : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bidirectional string <-> id map over the vocabulary of a collection.
class Dictionary {
 public:
  ElementId intern(std::string_view token);
  std::optional<ElementId> find(std::string_view token) const;
  const std::string& token(ElementId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, ElementId> ids_;
};

/// One set of the repository. Elements are strictly ascending ids.
struct CandidateSet {
  std::uint32_t id = 0;
  std::vector<ElementId> elements;
};

/// The repository: all candidate sets plus the shared dictionary.
/// frequency[t] is the number of sets containing t (the posting length).
struct Collection {
  Dictionary dictionary;
  std::vector<CandidateSet> sets;
  std::vector<std::uint32_t> frequency;

  void add_set(std::vector<ElementId> elements);
};

/// A query. Tokens absent from the dictionary keep fresh temporary ids
/// (>= oov_base); they can only ever match by exact identity.
struct QuerySet {
  std::vector<ElementId> elements;  // sorted, duplicate-free
  ElementId oov_base = 0;
  std::vector<std::string> oov_tokens;  // id == oov_base + index

  std::size_t size() const { return elements.size(); }
};

QuerySet make_query(const std::vector<std::string>& tokens, const Dictionary& dictionary);

struct SearchParams {
  int k = 10;
  double alpha = 0.8;
  int partitions = 10;
  int workers = 0;  // 0 = one per available hardware thread
  std::uint64_t seed = 1;
  std::optional<double> timeout_seconds = 2500.0;
  bool collect_traces = false;  // record theta traces (meaningful for partitions == 1)

  void validate() const;
};

/// sim_alpha: similarities below the threshold contribute exactly zero.
inline double apply_threshold(double sim, double alpha) {
  return sim >= alpha ? sim : 0.0;
}

/// |Q ∩ C| over ascending id lists.
std::uint32_t vanilla_overlap(const std::vector<ElementId>& a, const std::vector<ElementId>& b);

}  // namespace semsearch
