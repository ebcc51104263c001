#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semsearch/core.hpp"

namespace semsearch {

/// Element similarity contract: symmetric, deterministic, sim(x, x) = 1 for
/// identical surface strings, range [0, 1]. Ids outside the dictionary
/// (temporary query ids) match nothing but themselves.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double similarity(ElementId a, ElementId b) const = 0;
  virtual std::string_view name() const = 0;
};

/// dot(u,v) / (|u||v|), clamped to [0, 1].
double cosine_sim(std::span<const double> u, std::span<const double> v);

/// Jaccard over distinct q-grams. Strings shorter than q contribute the
/// whole string as a single gram; identical strings score 1.
double qgram_jaccard(std::string_view a, std::string_view b, int q);

/// sim(x, y) = 1 iff x == y. The degenerate provider that reduces semantic
/// overlap to vanilla overlap.
class ExactMatchProvider final : public SimilarityProvider {
 public:
  double similarity(ElementId a, ElementId b) const override { return a == b ? 1.0 : 0.0; }
  std::string_view name() const override { return "exact"; }
};

/// Cosine similarity over per-token embedding vectors. Tokens without a
/// vector can only match by identity.
class CosineEmbeddingProvider final : public SimilarityProvider {
 public:
  CosineEmbeddingProvider(const Dictionary& dictionary,
                          const std::vector<std::pair<std::string, std::vector<double>>>& entries);

  /// Plain-text embeddings: one "token v1 ... vd" entry per line, optional
  /// "count dim" header (auto-detected).
  static CosineEmbeddingProvider load(const std::string& path, const Dictionary& dictionary);

  double similarity(ElementId a, ElementId b) const override;
  std::string_view name() const override { return "cosine"; }
  int dim() const { return dim_; }
  bool has_vector(ElementId id) const { return id < has_vector_.size() && has_vector_[id]; }

 private:
  int dim_ = 0;
  std::vector<double> vectors_;  // row-major, unit-normalized
  std::vector<char> has_vector_;
};

/// Jaccard of q-gram sets of the token strings.
class QGramJaccardProvider final : public SimilarityProvider {
 public:
  QGramJaccardProvider(const Dictionary& dictionary, int q);

  double similarity(ElementId a, ElementId b) const override;
  std::string_view name() const override { return "qgram-jaccard"; }
  int q() const { return q_; }

 private:
  int q_ = 3;
  std::vector<std::vector<std::string>> grams_;  // sorted distinct grams per id
};

/// Similarity given by an explicit pair table; identities are 1, unlisted
/// pairs 0. Useful for hand-built fixtures and ground-truth tables.
class TableProvider final : public SimilarityProvider {
 public:
  TableProvider() = default;
  void set(ElementId a, ElementId b, double sim);

  /// Text format: one "tokenA<TAB>tokenB<TAB>sim" entry per line.
  static TableProvider load(const std::string& path, const Dictionary& dictionary);

  double similarity(ElementId a, ElementId b) const override;
  std::string_view name() const override { return "table"; }

 private:
  std::unordered_map<std::uint64_t, double> pairs_;
};

/// Parse an embedding text file into (token, vector) entries.
std::vector<std::pair<std::string, std::vector<double>>> read_embedding_file(
    const std::string& path);

}  // namespace semsearch
