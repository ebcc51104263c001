#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "semsearch/bundle.hpp"
#include "semsearch/engine.hpp"
#include "support/workloads.hpp"

using namespace semsearch;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const char* cli_bin() {
  const char* bin = std::getenv("SEMSEARCH_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "SEMSEARCH_CLI must point at the CLI binary");
  return bin;
}

CliResult run_cli(const std::string& args) {
  std::string out_path = "cli_stdout.tmp", err_path = "cli_stderr.tmp";
  std::string cmd = std::string(cli_bin()) + " " + args + " >" + out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WEXITSTATUS(status);
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("bundle round-trip reproduces identical query results") {
  auto workload = testing::make_workload(801, /*n_sets=*/80, 3, 8, /*n_queries=*/1);
  IndexBundle bundle;
  bundle.collection = std::move(workload.collection);
  bundle.index = InvertedIndex::build(bundle.collection);
  bundle.provider.name = "qgram-jaccard";
  bundle.provider.qgram_q = 2;
  save_bundle("roundtrip.bundle", bundle);
  IndexBundle loaded = load_bundle("roundtrip.bundle");

  CHECK(loaded.collection.dictionary.size() == bundle.collection.dictionary.size());
  REQUIRE(loaded.collection.sets.size() == bundle.collection.sets.size());
  CHECK(loaded.index == bundle.index);
  CHECK(loaded.provider.name == "qgram-jaccard");
  CHECK(loaded.provider.qgram_q == 2);

  auto provider = make_provider(loaded.provider, loaded.collection.dictionary);
  QuerySet q = make_query(workload.queries[0], loaded.collection.dictionary);
  SearchParams params;
  params.k = 5;
  params.alpha = 0.6;
  params.partitions = 1;
  auto before = search(q, bundle.collection, bundle.index,
                       *make_provider(bundle.provider, bundle.collection.dictionary), params);
  auto after = search(q, loaded.collection, loaded.index, *provider, params);
  CHECK(before.entries == after.entries);
}

TEST_CASE("bundle version gate rejects mismatches loudly") {
  Collection coll = testing::make_collection({{"a"}});
  IndexBundle bundle;
  bundle.collection = std::move(coll);
  bundle.index = InvertedIndex::build(bundle.collection);
  save_bundle("versioned.bundle", bundle);
  std::ifstream in("versioned.bundle");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  auto pos = body.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  body.replace(pos, 11, "\"version\":9");
  write_file("versioned.bundle", body);
  CHECK_THROWS_AS(load_bundle("versioned.bundle"), ParseError);
  CHECK_THROWS_AS(load_bundle("missing.bundle"), IoError);
}

TEST_CASE("on-the-fly index equals the persisted one") {
  auto workload = testing::make_workload(802, /*n_sets=*/60, 3, 8, /*n_queries=*/0);
  IndexBundle bundle;
  bundle.collection = std::move(workload.collection);
  bundle.index = InvertedIndex::build(bundle.collection);
  save_bundle("fly.bundle", bundle);
  IndexBundle loaded = load_bundle("fly.bundle");
  CHECK(loaded.index == InvertedIndex::build(loaded.collection));
}

TEST_CASE("set file parsing") {
  write_file("sets.tsv", "LA\tSeattle\tLA\n\nx\t42\ty\n");
  std::vector<std::string> warnings;
  Collection coll = read_set_file("sets.tsv", '\t', /*drop_numeric=*/false,
                                  [&](const std::string& w) { warnings.push_back(w); });
  REQUIRE(coll.sets.size() == 2);
  CHECK(coll.sets[0].elements.size() == 2);  // LA dedup'd
  REQUIRE(warnings.size() == 1);             // the empty line
  CHECK(warnings[0].find("line 2") != std::string::npos);

  Collection dropped = read_set_file("sets.tsv", '\t', /*drop_numeric=*/true);
  CHECK(dropped.sets[1].elements.size() == 2);  // 42 removed

  CHECK(is_numeric_token("42"));
  CHECK(is_numeric_token("3.5"));
  CHECK(!is_numeric_token("4x"));
  CHECK(!is_numeric_token("x"));
}

TEST_CASE("cli ingest + query: self-query ranks itself first with score |Q|") {
  write_file("corpus.tsv", "apple\tbanana\tcherry\nbanana\tdate\napple\tfig\n");
  auto ingest = run_cli("ingest --input corpus.tsv --output corpus.bundle --sim exact");
  REQUIRE(ingest.exit_code == 0);
  // hand count: 3 sets over 5 distinct tokens
  CHECK(ingest.err.find("3 sets") != std::string::npos);
  CHECK(ingest.err.find("5 distinct tokens") != std::string::npos);

  auto q = run_cli(
      "query --bundle corpus.bundle --query apple,banana,cherry --delimiter , --k 1 "
      "--partitions 1 --workers 1");
  REQUIRE(q.exit_code == 0);
  CHECK(q.out == "1\t0\t3.000000000\n");

  SUBCASE("baseline agrees") {
    auto b = run_cli(
        "query --bundle corpus.bundle --query apple,banana,cherry --delimiter , --k 1 "
        "--baseline");
    CHECK(b.exit_code == 0);
    CHECK(b.out == q.out);
  }
  SUBCASE("fixed seed and single worker runs are byte-identical") {
    std::string flags =
        "query --bundle corpus.bundle --query apple,banana --delimiter , --k 3 --partitions 1 "
        "--workers 1 --seed 5";
    auto a = run_cli(flags);
    auto b = run_cli(flags);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
  }
  SUBCASE("stats block is appended on demand") {
    auto s = run_cli(
        "query --bundle corpus.bundle --query apple --delimiter , --k 1 --stats");
    CHECK(s.exit_code == 0);
    CHECK(s.out.find("# stats") != std::string::npos);
    CHECK(s.out.find("em_calls=") != std::string::npos);
  }
  SUBCASE("too few results warns on stderr but exits 0") {
    auto w = run_cli("query --bundle corpus.bundle --query apple --delimiter , --k 10");
    CHECK(w.exit_code == 0);
    CHECK(w.err.find("warning") != std::string::npos);
  }
  SUBCASE("--sim overrides the bundle's provider") {
    write_file("fruit.tsv", "apple\tpear\napples\tplum\n");
    REQUIRE(run_cli("ingest --input fruit.tsv --output fruit.bundle --sim exact").exit_code == 0);
    auto exact = run_cli(
        "query --bundle fruit.bundle --query apples --delimiter , --k 1 --alpha 0.5");
    REQUIRE(exact.exit_code == 0);
    CHECK(exact.out.substr(0, 4) == "1\t1\t");  // only the identity match
    // under q-gram similarity "apples" also reaches "apple" at 3/4
    auto qgram = run_cli(
        "query --bundle fruit.bundle --query apples,plum --delimiter , --k 1 --alpha 0.5 "
        "--sim qgram-jaccard");
    REQUIRE(qgram.exit_code == 0);
    CHECK(qgram.out.find("2.000000000") != std::string::npos);  // apples + plum, both exact
    auto exact2 = run_cli(
        "query --bundle fruit.bundle --query apples,pear --delimiter , --k 2 --alpha 0.5 "
        "--sim qgram-jaccard");
    REQUIRE(exact2.exit_code == 0);
    // set 0 now scores pear (1.0) + apples~apple (0.75)
    CHECK(exact2.out.find("1.750000000") != std::string::npos);
  }
}

TEST_CASE("cli error paths") {
  CHECK(run_cli("query --bundle no_such.bundle --query a").exit_code == 2);
  write_file("corpus2.tsv", "a\tb\n");
  REQUIRE(run_cli("ingest --input corpus2.tsv --output c2.bundle").exit_code == 0);
  CHECK(run_cli("query --bundle c2.bundle --query a --sim bogus").exit_code == 1);
  CHECK(run_cli("query --bundle c2.bundle").exit_code == 1);  // no query given
  CHECK(run_cli("ingest --input missing.tsv --output x.bundle").exit_code == 2);
  // an immediately-expiring deadline maps to the timeout exit code
  CHECK(run_cli("query --bundle c2.bundle --query a --timeout 0.000000001").exit_code == 3);
}

TEST_CASE("cli table provider reproduces the city ranking") {
  write_file("city_sets.tsv",
             "LA\tBlain\tAppleton\tTacoma\tBoise\tSavannah\n"
             "LA\tBlain\tNewYorkCity\tSC\tCarolina\n"
             "Blaine\nSeattle\nColumbia\nBigApple\nCharleston\n");
  write_file("city_sims.tsv",
             "Blaine\tBlain\t0.99\n"
             "BigApple\tNewYorkCity\t0.90\n"
             "Columbia\tSC\t0.85\n"
             "Charleston\tSC\t0.82\n"
             "Columbia\tCarolina\t0.80\n"
             "Seattle\tTacoma\t0.70\n"
             "Columbia\tBoise\t0.70\n"
             "Charleston\tSavannah\t0.70\n");
  auto ingest = run_cli(
      "ingest --input city_sets.tsv --output city.bundle --sim table --sim-table city_sims.tsv");
  REQUIRE(ingest.exit_code == 0);
  auto q = run_cli(
      "query --bundle city.bundle --query LA,Blaine,Seattle,Columbia,BigApple,Charleston "
      "--delimiter , --k 1 --alpha 0.7");
  REQUIRE(q.exit_code == 0);
  CHECK(q.out.substr(0, 4) == "1\t1\t");  // set 1 is the semantic twin
  CHECK(q.out.find("4.510000000") != std::string::npos);
}

TEST_CASE("cli cosine bundle persists the embedding file path") {
  write_file("vec.txt", "sun 1 0\nsol 0.95 0.2\nmoon 0 1\n");
  write_file("astro.tsv", "sun\tmoon\nsol\tmoon\n");
  REQUIRE(run_cli("ingest --input astro.tsv --output astro.bundle --sim cosine "
                  "--embeddings vec.txt")
              .exit_code == 0);
  auto q = run_cli("query --bundle astro.bundle --query sun,moon --delimiter , --k 2 "
                   "--alpha 0.8");
  REQUIRE(q.exit_code == 0);
  REQUIRE(count_lines(q.out) == 2);
  CHECK(q.out.find("1\t0\t2.000000000") == 0);  // exact self pair
  // sol~sun cosine is about 0.9785 -> second set scores just under 2
  CHECK(q.out.find("2\t1\t1.97") != std::string::npos);

  SUBCASE("a missing embedding file at ingest time is rejected") {
    CHECK(run_cli("ingest --input astro.tsv --output bad.bundle --sim cosine "
                  "--embeddings nope.txt")
              .exit_code == 2);
  }
}

TEST_CASE("cli bench emits the CSV report with per-query and mean rows") {
  write_file("bench_corpus.tsv", "a\tb\tc\nb\tc\td\na\td\ne\nf\tg\n");
  write_file("bench_queries.tsv", "a\tb\nc\td\te\n");
  REQUIRE(run_cli("ingest --input bench_corpus.tsv --output bench.bundle").exit_code == 0);
  auto r = run_cli(
      "bench --bundle bench.bundle --queries bench_queries.tsv --k 2 --partitions 1 "
      "--baseline");
  REQUIRE(r.exit_code == 0);
  REQUIRE(count_lines(r.out) == 4);  // header + 2 queries + mean row
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "query_cardinality,candidates,iub_pruned,no_em,em_early_terminated,em_calls,"
        "refine_ms,postproc_ms,total_ms,top1_score,baseline_em_calls,baseline_total_ms");
  std::string row;
  while (std::getline(lines, row)) {
    std::vector<std::string> cols;
    std::istringstream rs(row);
    std::string col;
    while (std::getline(rs, col, ',')) cols.push_back(col);
    REQUIRE(cols.size() == 12);
    // counter identity: em + early + no_em <= candidates - iub_pruned
    double candidates = std::stod(cols[1]), iub = std::stod(cols[2]), no_em = std::stod(cols[3]);
    double early = std::stod(cols[4]), em = std::stod(cols[5]), baseline_em = std::stod(cols[10]);
    CHECK(em + early + no_em <= candidates - iub + kScoreEps);
    CHECK(em <= baseline_em + kScoreEps);
  }
}
