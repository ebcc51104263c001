#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "semsearch/core.hpp"
#include "semsearch/index.hpp"
#include "semsearch/similarity.hpp"

namespace semsearch {

struct ProviderConfig {
  std::string name = "exact";    // "cosine" | "qgram-jaccard" | "exact" | "table"
  std::string embedding_path;    // cosine
  int qgram_q = 3;               // qgram-jaccard
  std::string table_path;        // table
};

/// The persisted artifact: dictionary, sets, postings, and the provider
/// configuration, behind a format-version gate.
struct IndexBundle {
  static constexpr std::uint32_t kFormatVersion = 1;
  Collection collection;
  InvertedIndex index;
  ProviderConfig provider;
};

void save_bundle(const std::string& path, const IndexBundle& bundle);
IndexBundle load_bundle(const std::string& path);

std::unique_ptr<SimilarityProvider> make_provider(const ProviderConfig& config,
                                                  const Dictionary& dictionary);

/// Line-oriented set file: one set per line, elements split on `delimiter`,
/// duplicates within a line collapsed. Lines that end up empty are skipped
/// through `warn`. With `drop_numeric`, purely numeric tokens are removed.
Collection read_set_file(const std::string& path, char delimiter, bool drop_numeric,
                         const std::function<void(const std::string&)>& warn = {});

std::vector<std::string> split_tokens(const std::string& line, char delimiter);
bool is_numeric_token(const std::string& token);

/// Query tokens from a file (first line) or an inline list.
std::vector<std::string> read_query_line(const std::string& line, char delimiter);

}  // namespace semsearch
