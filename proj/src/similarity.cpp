#include "semsearch/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace semsearch {

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty())
    throw DimensionMismatch("cosine_sim: vectors must have equal, nonzero dimension");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine_sim: zero vector");
  double value = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(value, 0.0, 1.0);
}

namespace {

std::vector<std::string> distinct_grams(std::string_view s, int q) {
  std::vector<std::string> grams;
  if (s.empty()) return grams;
  if (static_cast<int>(s.size()) < q) {
    grams.emplace_back(s);
    return grams;
  }
  for (std::size_t i = 0; i + q <= s.size(); ++i) grams.emplace_back(s.substr(i, q));
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

double gram_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int cmp = a[i].compare(b[j]);
    if (cmp == 0) {
      ++inter;
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::uint64_t pair_key(ElementId a, ElementId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

double qgram_jaccard(std::string_view a, std::string_view b, int q) {
  if (q < 1) throw std::invalid_argument("qgram_jaccard: q must be >= 1");
  if (a == b) return 1.0;
  return gram_jaccard(distinct_grams(a, q), distinct_grams(b, q));
}

CosineEmbeddingProvider::CosineEmbeddingProvider(
    const Dictionary& dictionary,
    const std::vector<std::pair<std::string, std::vector<double>>>& entries) {
  for (const auto& [token, vec] : entries) {
    if (dim_ == 0) dim_ = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != dim_)
      throw DimensionMismatch("embedding entries have inconsistent dimensions");
  }
  if (dim_ == 0) dim_ = 1;
  vectors_.assign(dictionary.size() * static_cast<std::size_t>(dim_), 0.0);
  has_vector_.assign(dictionary.size(), 0);
  for (const auto& [token, vec] : entries) {
    auto id = dictionary.find(token);
    if (!id) continue;  // corpus entries outside the vocabulary are ignored
    double norm = 0.0;
    for (double x : vec) norm += x * x;
    if (norm == 0.0) continue;  // tokens with a zero vector stay uncovered
    norm = std::sqrt(norm);
    double* row = &vectors_[static_cast<std::size_t>(*id) * dim_];
    for (int d = 0; d < dim_; ++d) row[d] = vec[d] / norm;
    has_vector_[*id] = 1;
  }
}

CosineEmbeddingProvider CosineEmbeddingProvider::load(const std::string& path,
                                                      const Dictionary& dictionary) {
  return CosineEmbeddingProvider(dictionary, read_embedding_file(path));
}

double CosineEmbeddingProvider::similarity(ElementId a, ElementId b) const {
  if (a == b) return 1.0;
  if (!has_vector(a) || !has_vector(b)) return 0.0;
  const double* ra = &vectors_[static_cast<std::size_t>(a) * dim_];
  const double* rb = &vectors_[static_cast<std::size_t>(b) * dim_];
  double dot = 0.0;
  for (int d = 0; d < dim_; ++d) dot += ra[d] * rb[d];
  return std::clamp(dot, 0.0, 1.0);
}

QGramJaccardProvider::QGramJaccardProvider(const Dictionary& dictionary, int q) : q_(q) {
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  grams_.reserve(dictionary.size());
  for (const auto& token : dictionary.tokens()) grams_.push_back(distinct_grams(token, q));
}

double QGramJaccardProvider::similarity(ElementId a, ElementId b) const {
  if (a == b) return 1.0;
  if (a >= grams_.size() || b >= grams_.size()) return 0.0;
  return gram_jaccard(grams_[a], grams_[b]);
}

void TableProvider::set(ElementId a, ElementId b, double sim) {
  if (sim < 0.0 || sim > 1.0) throw std::invalid_argument("table similarity must be in [0, 1]");
  pairs_[pair_key(a, b)] = sim;
}

TableProvider TableProvider::load(const std::string& path, const Dictionary& dictionary) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open similarity table: " + path);
  TableProvider provider;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    double sim = 0.0;
    if (!(row >> a >> b >> sim))
      throw ParseError("similarity table line " + std::to_string(lineno) + ": expected 'a b sim'");
    auto ia = dictionary.find(a);
    auto ib = dictionary.find(b);
    if (!ia || !ib) continue;  // pairs outside the vocabulary never take part
    provider.set(*ia, *ib, sim);
  }
  return provider;
}

double TableProvider::similarity(ElementId a, ElementId b) const {
  if (a == b) return 1.0;
  auto it = pairs_.find(pair_key(a, b));
  return it == pairs_.end() ? 0.0 : it->second;
}

std::vector<std::pair<std::string, std::vector<double>>> read_embedding_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path);
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> vec;
    double x;
    while (row >> x) vec.push_back(x);
    if (first) {
      first = false;
      // "count dim" header: exactly one numeric column and a numeric token
      if (vec.size() == 1) {
        try {
          std::size_t pos = 0;
          (void)std::stoull(token, &pos);
          if (pos == token.size()) continue;
        } catch (const std::exception&) {
        }
      }
    }
    if (vec.empty())
      throw ParseError("embedding file line " + std::to_string(lineno) + ": no vector components");
    entries.emplace_back(std::move(token), std::move(vec));
  }
  return entries;
}

}  // namespace semsearch
