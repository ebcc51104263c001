#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semsearch/bundle.hpp"
#include "semsearch/engine.hpp"

namespace {

using namespace semsearch;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTimeout = 3;

char parse_delimiter(const std::string& text) {
  if (text == "\\t" || text == "tab" || text == "TAB") return '\t';
  if (text.size() != 1) throw CLI::ValidationError("--delimiter must be a single character");
  return text[0];
}

struct QueryFlags {
  std::string bundle_path;
  std::string query_inline;
  std::string query_file;
  std::string delimiter = "tab";
  std::string sim_override;
  std::string embeddings_override;
  std::string table_override;
  SearchParams params;
  double timeout = 2500.0;
  bool baseline = false;
  bool stats = false;
  bool per_partition = false;
};

void add_search_flags(CLI::App* cmd, QueryFlags& f) {
  cmd->add_option("--bundle", f.bundle_path, "index bundle produced by ingest")->required();
  cmd->add_option("--k", f.params.k, "number of results")->capture_default_str();
  cmd->add_option("--alpha", f.params.alpha, "element similarity threshold")
      ->capture_default_str();
  cmd->add_option("--partitions", f.params.partitions, "parallel repository partitions")
      ->capture_default_str();
  cmd->add_option("--workers", f.params.workers, "matching workers (0 = hardware)")
      ->capture_default_str();
  cmd->add_option("--seed", f.params.seed, "partitioning seed")->capture_default_str();
  cmd->add_option("--timeout", f.timeout, "timeout in seconds (0 = none)")
      ->capture_default_str();
  cmd->add_option("--delimiter", f.delimiter, "token delimiter (single char or 'tab')")
      ->capture_default_str();
  cmd->add_option("--sim", f.sim_override, "override the bundle's similarity provider");
  cmd->add_option("--embeddings", f.embeddings_override, "embedding file for --sim cosine");
  cmd->add_option("--sim-table", f.table_override, "similarity table for --sim table");
  cmd->add_flag("--baseline", f.baseline, "run the exhaustive matching baseline");
  cmd->add_flag("--stats", f.stats, "append a machine-readable counter block");
}

std::unique_ptr<SimilarityProvider> resolve_provider(const QueryFlags& f, IndexBundle& bundle) {
  ProviderConfig config = bundle.provider;
  if (!f.sim_override.empty()) config.name = f.sim_override;
  if (!f.embeddings_override.empty()) config.embedding_path = f.embeddings_override;
  if (!f.table_override.empty()) config.table_path = f.table_override;
  return make_provider(config, bundle.collection.dictionary);
}

SearchParams resolve_params(const QueryFlags& f) {
  SearchParams params = f.params;
  if (f.timeout <= 0.0)
    params.timeout_seconds.reset();
  else
    params.timeout_seconds = f.timeout;
  params.validate();
  return params;
}

void print_stats(const SearchStats& s) {
  std::printf("# stats\n");
  std::printf("tuples_consumed=%llu\n", (unsigned long long)s.tuples_consumed);
  std::printf("candidates=%llu\n", (unsigned long long)s.candidates);
  std::printf("iub_pruned=%llu\n", (unsigned long long)s.iub_pruned);
  std::printf("survivors=%llu\n", (unsigned long long)s.survivors);
  std::printf("no_em=%llu\n", (unsigned long long)s.no_em_accepted);
  std::printf("em_early_terminated=%llu\n", (unsigned long long)s.em_early_terminated);
  std::printf("em_calls=%llu\n", (unsigned long long)s.em_calls);
  std::printf("finalize_calls=%llu\n", (unsigned long long)s.finalize_calls);
  std::printf("resident=%llu\n", (unsigned long long)s.resident);
  std::printf("refine_ms=%.3f\n", s.refine_ms);
  std::printf("postproc_ms=%.3f\n", s.postproc_ms);
  std::printf("total_ms=%.3f\n", s.total_ms);
}

int run_ingest(const std::string& input, const std::string& output, const std::string& delimiter,
               bool drop_numeric, const ProviderConfig& provider) {
  char delim = parse_delimiter(delimiter);
  IndexBundle bundle;
  bundle.collection = read_set_file(input, delim, drop_numeric, [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  });
  bundle.index = InvertedIndex::build(bundle.collection);
  bundle.provider = provider;
  make_provider(provider, bundle.collection.dictionary);  // fail fast on a bad config
  save_bundle(output, bundle);
  std::cerr << "ingested " << bundle.collection.sets.size() << " sets, "
            << bundle.collection.dictionary.size() << " distinct tokens\n";
  return kExitOk;
}

int run_query(const QueryFlags& f) {
  char delim = parse_delimiter(f.delimiter);
  IndexBundle bundle = load_bundle(f.bundle_path);
  auto provider = resolve_provider(f, bundle);
  SearchParams params = resolve_params(f);

  std::string line = f.query_inline;
  if (!f.query_file.empty()) {
    std::ifstream in(f.query_file);
    if (!in) throw IoError("cannot open query file: " + f.query_file);
    std::getline(in, line);
  }
  QuerySet query = make_query(read_query_line(line, delim), bundle.collection.dictionary);
  if (query.elements.empty()) throw ParseError("query has no tokens");

  SearchResult result =
      f.baseline ? baseline_search(query, bundle.collection, bundle.index, *provider, params)
                 : search(query, bundle.collection, bundle.index, *provider, params);

  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    std::printf("%zu\t%u\t%.9f\n", i + 1, result.entries[i].first, result.entries[i].second);
  }
  if (f.per_partition) {
    for (std::size_t p = 0; p < result.per_partition.size(); ++p) {
      for (const auto& [sid, score] : result.per_partition[p])
        std::printf("# partition %zu\t%u\t%.9f\n", p, sid, score);
    }
  }
  if (f.stats) print_stats(result.stats);
  if (result.truncated)
    std::cerr << "warning: only " << result.entries.size() << " sets have nonzero overlap (k="
              << params.k << ")\n";
  return result.timed_out ? kExitTimeout : kExitOk;
}

int run_bench(const QueryFlags& f, const std::string& queries_path,
              const std::string& output_path) {
  char delim = parse_delimiter(f.delimiter);
  IndexBundle bundle = load_bundle(f.bundle_path);
  auto provider = resolve_provider(f, bundle);
  SearchParams params = resolve_params(f);

  std::ifstream in(queries_path);
  if (!in) throw IoError("cannot open queries file: " + queries_path);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!output_path.empty()) {
    file.open(output_path);
    if (!file) throw IoError("cannot write report: " + output_path);
    out = &file;
  }

  *out << "query_cardinality,candidates,iub_pruned,no_em,em_early_terminated,em_calls,"
          "refine_ms,postproc_ms,total_ms,top1_score";
  if (f.baseline) *out << ",baseline_em_calls,baseline_total_ms";
  *out << "\n";

  std::vector<std::vector<double>> rows;
  std::string line;
  bool any_timeout = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    QuerySet query = make_query(read_query_line(line, delim), bundle.collection.dictionary);
    if (query.elements.empty()) continue;
    SearchResult r = search(query, bundle.collection, bundle.index, *provider, params);
    any_timeout = any_timeout || r.timed_out;
    std::vector<double> row = {static_cast<double>(query.elements.size()),
                               static_cast<double>(r.stats.candidates),
                               static_cast<double>(r.stats.iub_pruned),
                               static_cast<double>(r.stats.no_em_accepted),
                               static_cast<double>(r.stats.em_early_terminated),
                               static_cast<double>(r.stats.em_calls),
                               r.stats.refine_ms,
                               r.stats.postproc_ms,
                               r.stats.total_ms,
                               r.top1()};
    if (f.baseline) {
      SearchResult b = baseline_search(query, bundle.collection, bundle.index, *provider, params);
      any_timeout = any_timeout || b.timed_out;
      row.push_back(static_cast<double>(b.stats.em_calls));
      row.push_back(b.stats.total_ms);
    }
    rows.push_back(std::move(row));
  }

  // columns 0-5 and 10 are counters, 9 is a score, the rest are timings
  auto emit = [&](const std::vector<double>& row, bool mean_row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) *out << ",";
      char buf[64];
      bool counter = c <= 5 || c == 10;
      if (c == 9)
        std::snprintf(buf, sizeof(buf), "%.9f", row[c]);
      else if (counter && !mean_row)
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(row[c]));
      else
        std::snprintf(buf, sizeof(buf), "%.3f", row[c]);
      *out << buf;
    }
    *out << "\n";
  };
  for (const auto& row : rows) emit(row, false);
  if (!rows.empty()) {
    std::vector<double> mean(rows.front().size(), 0.0);
    for (const auto& row : rows)
      for (std::size_t c = 0; c < row.size(); ++c) mean[c] += row[c];
    for (double& m : mean) m /= static_cast<double>(rows.size());
    emit(mean, true);
  }
  return any_timeout ? kExitTimeout : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"top-k set search under semantic overlap"};
  app.require_subcommand(1);

  // ingest
  std::string in_path, out_path, in_delim = "tab";
  bool drop_numeric = false;
  ProviderConfig provider;
  auto* ingest = app.add_subcommand("ingest", "build an index bundle from a set file");
  ingest->add_option("--input", in_path, "line-oriented set file")->required();
  ingest->add_option("--output", out_path, "bundle path to write")->required();
  ingest->add_option("--delimiter", in_delim, "token delimiter (single char or 'tab')")
      ->capture_default_str();
  ingest->add_flag("--drop-numeric", drop_numeric, "remove purely numeric tokens");
  ingest->add_option("--sim", provider.name, "similarity provider")->capture_default_str();
  ingest->add_option("--embeddings", provider.embedding_path, "embedding file (cosine)");
  ingest->add_option("--qgram", provider.qgram_q, "gram length (qgram-jaccard)")
      ->capture_default_str();
  ingest->add_option("--sim-table", provider.table_path, "similarity table file (table)");

  // query
  QueryFlags qf;
  auto* query = app.add_subcommand("query", "run a top-k search");
  add_search_flags(query, qf);
  query->add_option("--query", qf.query_inline, "inline delimiter-separated token list");
  query->add_option("--query-file", qf.query_file, "file whose first line is the query");
  query->add_flag("--per-partition", qf.per_partition, "also print each partition's local top-k");

  // bench
  QueryFlags bf;
  std::string queries_path, report_path;
  auto* bench = app.add_subcommand("bench", "run a query benchmark, print a CSV report");
  add_search_flags(bench, bf);
  bench->add_option("--queries", queries_path, "file with one query per line")->required();
  bench->add_option("--output", report_path, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return run_ingest(in_path, out_path, in_delim, drop_numeric, provider);
    if (*query) {
      if (qf.query_inline.empty() == qf.query_file.empty())
        throw CLI::ValidationError("provide exactly one of --query / --query-file");
      return run_query(qf);
    }
    if (*bench) return run_bench(bf, queries_path, report_path);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownProvider& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
