#include "semsearch/bundle.hpp"

#include <charconv>
#include <fstream>

#include "json.hpp"

namespace semsearch {

using nlohmann::json;

void save_bundle(const std::string& path, const IndexBundle& bundle) {
  json doc;
  doc["format"] = "semsearch-bundle";
  doc["version"] = IndexBundle::kFormatVersion;
  doc["dictionary"] = bundle.collection.dictionary.tokens();
  json sets = json::array();
  for (const auto& set : bundle.collection.sets) sets.push_back(set.elements);
  doc["sets"] = std::move(sets);
  doc["postings"] = bundle.index.raw();
  doc["provider"] = {{"name", bundle.provider.name},
                     {"embedding_path", bundle.provider.embedding_path},
                     {"qgram_q", bundle.provider.qgram_q},
                     {"table_path", bundle.provider.table_path}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write bundle: " + path);
  out << doc.dump();
  if (!out) throw IoError("failed writing bundle: " + path);
}

IndexBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bundle: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("bundle is not valid JSON: " + std::string(e.what()));
  }
  if (doc.value("format", "") != "semsearch-bundle")
    throw ParseError("not a semsearch bundle: " + path);
  const auto version = doc.value("version", 0u);
  if (version != IndexBundle::kFormatVersion)
    throw ParseError("unsupported bundle version " + std::to_string(version) + " (expected " +
                     std::to_string(IndexBundle::kFormatVersion) + ")");

  IndexBundle bundle;
  for (const auto& token : doc.at("dictionary")) {
    bundle.collection.dictionary.intern(token.get<std::string>());
  }
  for (const auto& elements : doc.at("sets")) {
    auto ids = elements.get<std::vector<ElementId>>();
    for (ElementId e : ids) {
      if (e >= bundle.collection.dictionary.size())
        throw ParseError("bundle set references element " + std::to_string(e) +
                         " outside the dictionary");
    }
    bundle.collection.add_set(std::move(ids));
  }
  bundle.index.assign(doc.at("postings").get<std::vector<std::vector<std::uint32_t>>>());
  const auto& provider = doc.at("provider");
  bundle.provider.name = provider.value("name", "exact");
  bundle.provider.embedding_path = provider.value("embedding_path", "");
  bundle.provider.qgram_q = provider.value("qgram_q", 3);
  bundle.provider.table_path = provider.value("table_path", "");
  return bundle;
}

std::unique_ptr<SimilarityProvider> make_provider(const ProviderConfig& config,
                                                  const Dictionary& dictionary) {
  if (config.name == "exact") return std::make_unique<ExactMatchProvider>();
  if (config.name == "cosine") {
    if (config.embedding_path.empty())
      throw UnknownProvider("cosine provider requires an embedding file");
    return std::make_unique<CosineEmbeddingProvider>(
        CosineEmbeddingProvider::load(config.embedding_path, dictionary));
  }
  if (config.name == "qgram-jaccard")
    return std::make_unique<QGramJaccardProvider>(dictionary, config.qgram_q);
  if (config.name == "table") {
    if (config.table_path.empty())
      throw UnknownProvider("table provider requires a similarity table file");
    return std::make_unique<TableProvider>(TableProvider::load(config.table_path, dictionary));
  }
  throw UnknownProvider("unknown similarity provider: " + config.name);
}

std::vector<std::string> split_tokens(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(delimiter, start);
    if (end == std::string::npos) end = line.size();
    if (end > start) out.push_back(line.substr(start, end - start));
    if (end == line.size()) break;
    start = end + 1;
  }
  return out;
}

bool is_numeric_token(const std::string& token) {
  if (token.empty()) return false;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

Collection read_set_file(const std::string& path, char delimiter, bool drop_numeric,
                         const std::function<void(const std::string&)>& warn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open set file: " + path);
  Collection collection;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = split_tokens(line, delimiter);
    if (drop_numeric) {
      std::erase_if(tokens, [](const std::string& t) { return is_numeric_token(t); });
    }
    if (tokens.empty()) {
      if (warn) warn("line " + std::to_string(lineno) + ": empty set skipped");
      continue;
    }
    std::vector<ElementId> elements;
    elements.reserve(tokens.size());
    for (const auto& token : tokens) elements.push_back(collection.dictionary.intern(token));
    collection.add_set(std::move(elements));
  }
  if (in.bad()) throw IoError("read error on set file: " + path);
  return collection;
}

std::vector<std::string> read_query_line(const std::string& line, char delimiter) {
  return split_tokens(line, delimiter);
}

}  // namespace semsearch
