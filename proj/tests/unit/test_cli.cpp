#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "mementomap/analytics.hpp"
#include "mementomap/compactor.hpp"
#include "mementomap/evaluator.hpp"
#include "mementomap/profile.hpp"
#include "synthetic.hpp"

namespace mm = mementomap;
namespace cli = mementomap::cli;

namespace {

const std::string kSamplePath = std::string(MEMENTOMAP_TEST_DATA) + "/sample.ukvs";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mementomap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string baseline_text(std::uint64_t seed, std::size_t keys) {
  mm::testing::Rng rng(seed);
  mm::testing::ArchiveShape shape;
  shape.keys = keys;
  return mm::testing::document_text(
      mm::testing::baseline_records(rng, mm::testing::zipf_archive_keys(rng, shape)));
}

}  // namespace

TEST(Cli, LookupPresentAndMiss) {
  auto r = run({"lookup", kSamplePath, "http://arxiv.org/"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, "org,arxiv)/ 100\n");

  r = run({"lookup", kSamplePath, "http://example.net/"});
  EXPECT_EQ(r.code, cli::kNegative);
  EXPECT_EQ(r.out, "");
  EXPECT_NE(r.err.find("no match"), std::string::npos);

  r = run({"lookup", kSamplePath, "http://arxiv.org/pdf/1"});
  EXPECT_EQ(r.code, cli::kNegative);
  EXPECT_EQ(r.out, "org,arxiv)/pdf/* 0\n");
}

TEST(Cli, LookupSeveralUrisPrintsTsv) {
  const auto r = run({"lookup", kSamplePath, "http://arxiv.org/", "http://example.net/"});
  EXPECT_EQ(r.code, cli::kNegative);
  EXPECT_EQ(r.out,
            "http://arxiv.org/\tpresent\torg,arxiv)/\t100\n"
            "http://example.net/\tabsent-nomatch\t-\t-\n");
}

TEST(Cli, LookupJsonReport) {
  const auto r = run({"--report", "json", "lookup", kSamplePath, "http://bbc.co.uk/images/a.png"});
  EXPECT_EQ(r.code, cli::kOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["disposition"], "present");
  EXPECT_EQ(j["matched_key"], "uk,co,bbc)/images/*");
  EXPECT_EQ(j["frequency"], "300+/20-");
  EXPECT_GT(j["probes"].get<int>(), 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"nonsense"}).code, cli::kUsage);
  EXPECT_EQ(run({"lookup", "/no/such/map", "http://a.com/"}).code, cli::kUsage);
  EXPECT_EQ(run({"--report", "yaml", "lookup", kSamplePath, "http://a.com/"}).code, cli::kUsage);
  EXPECT_EQ(run({"compact", kSamplePath, "out.ukvs"}).code, cli::kUsage);
  EXPECT_EQ(run({"compact", kSamplePath, "out.ukvs", "--wh", "1"}).code, cli::kUsage);
  EXPECT_EQ(run({"compact", kSamplePath, "out.ukvs", "--wh", "-1", "--wp", "1"}).code, cli::kUsage);

  const auto r = run({"compact", kSamplePath, "-", "--wh", "1", "--wp", "1"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_EQ(r.out, "");
  EXPECT_NE(r.err.find("SinkNotSeekable"), std::string::npos);
  EXPECT_EQ(run({"--version"}).code, cli::kOk);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, DataErrors) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("bad.ukvs"), "b)/ 1\na)/ 1\n");
  mm::testing::write_text(dir.file("c.json"), R"({"host": [], "path": [null, 1]})");
  EXPECT_EQ(run({"compact", dir.file("bad.ukvs"), dir.file("out.ukvs"), "--cutoffs",
                 dir.file("c.json")})
                .code,
            cli::kDataError);
  mm::testing::write_text(dir.file("bad.cdxj"), "com,a)/ 2020 {}\nnot a line\n");
  EXPECT_EQ(run({"generate", dir.file("bad.cdxj"), "--strict", "-o", dir.file("m.ukvs")}).code,
            cli::kDataError);
}

TEST(Cli, CompactMatchesLibrary) {
  mm::testing::TempDir dir;
  const auto input = dir.file("base.ukvs");
  mm::testing::write_text(input, baseline_text(3, 5000));

  const auto r = run({"--report", "json", "compact", input, dir.file("out.ukvs"), "--wh", "1",
                      "--wp", "0.5", "--keep-timestamp"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;

  mm::FileLineSource stats_in(input);
  const auto model = mm::CutoffModel::from_stats(mm::depth_stats(stats_in));
  const auto params = mm::derive_cutoffs(model, 1, 0.5);
  mm::FileLineSource in(input);
  mm::StringSink sink;
  const auto report = mm::compact(in, sink, params);
  EXPECT_EQ(mm::read_file(dir.file("out.ukvs")), sink.take());

  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["lines_out"].get<std::uint64_t>(), report.lines_out);
  EXPECT_EQ(j["rollups"].get<std::uint64_t>(), report.rollups);
  EXPECT_EQ(j["wh"].get<double>(), 1.0);
  EXPECT_TRUE(j.contains("model"));
}

TEST(Cli, CompactWithCutoffTable) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("in.ukvs"), "com,a)/ 1\ncom,a)/x 2\ncom,a)/y 3\ncom,b)/z 4\n");
  mm::testing::write_text(dir.file("c.json"), R"({"path": [null, 2]})");
  const auto r = run({"compact", dir.file("in.ukvs"), dir.file("out.ukvs"), "--cutoffs",
                      dir.file("c.json"), "--keep-timestamp"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(mm::read_file(dir.file("out.ukvs")), "com,a)/ 1\ncom,a)/* 5\ncom,b)/z 4\n");
  EXPECT_NE(r.out.find("rollups: 1"), std::string::npos);
}

TEST(Cli, GenerateMatchesLibrary) {
  const std::string cdxj =
      "com,example)/b 20200101000000 {\"url\": \"http://example.com/b\", \"status\": \"200\", "
      "\"mime\": \"text/html\"}\n"
      "com,example)/a 20200101000000 {\"url\": \"http://example.com/a\", \"status\": \"200\", "
      "\"mime\": \"text/html\"}\n"
      "com,example)/a 20210101000000 {\"url\": \"http://example.com/a\", \"status\": \"200\", "
      "\"mime\": \"text/html\"}\n"
      "com,example)/c 20210101000000 {\"url\": \"http://example.com/c\", \"status\": \"404\", "
      "\"mime\": \"text/html\"}\n";
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("in.cdxj"), cdxj);
  const auto r = run({"generate", dir.file("in.cdxj"), "-o", "-"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(mm::testing::data_lines(r.out),
            (std::vector<std::string>{"com,example)/a 2", "com,example)/b 1"}));
  EXPECT_NE(r.err.find("filtered"), std::string::npos);

  const auto f = run({"--report", "json", "generate", dir.file("in.cdxj"), "-o",
                      dir.file("out.ukvs.gz"), "--no-filter"});
  ASSERT_EQ(f.code, cli::kOk) << f.err;
  EXPECT_EQ(nlohmann::json::parse(f.out)["unique_hxpx"].get<int>(), 3);
  mm::FileLineSource gz(dir.file("out.ukvs.gz"));
  std::string_view line;
  std::string text;
  while (gz.next(line)) text.append(line).push_back('\n');
  EXPECT_EQ(mm::testing::data_lines(text).size(), 3u);
}

TEST(Cli, StatsMatchesLibrary) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("m.ukvs"), baseline_text(9, 3000));
  const auto r = run({"stats", dir.file("m.ukvs")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  mm::FileLineSource in(dir.file("m.ukvs"));
  EXPECT_EQ(r.out, mm::depth_stats_tsv(mm::depth_stats(in)));

  const auto fit = run({"--report", "json", "stats", "--fit", dir.file("m.ukvs")});
  ASSERT_EQ(fit.code, cli::kOk) << fit.err;
  const auto j = nlohmann::json::parse(fit.out);
  EXPECT_TRUE(j["rows"].is_array());
  EXPECT_TRUE(j.contains("model"));

  const auto arch = run({"--report", "json", "stats", "--archive", kSamplePath});
  ASSERT_EQ(arch.code, cli::kOk) << arch.err;
  EXPECT_TRUE(nlohmann::json::parse(arch.out).is_object());
}

TEST(Cli, BatchLookupAndEval) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("uris.txt"), "http://arxiv.org/\nhttp://example.net/\n");
  const auto b = run({"batch-lookup", kSamplePath, dir.file("uris.txt")});
  ASSERT_EQ(b.code, cli::kOk) << b.err;
  EXPECT_EQ(b.out.substr(0, b.out.find("present:")),
            "http://arxiv.org/\tpresent\torg,arxiv)/\t100\n"
            "http://example.net/\tabsent-nomatch\t-\t-\n");

  mm::testing::write_text(dir.file("map.ukvs"), "!meta {}\ncom,a)/* 5\ncom,c)/ 0\norg,b)/ 1\n");
  mm::testing::write_text(dir.file("truth.txt"),
                          "http://a.com/x\nhttp://a.com/y\nhttp://b.org/\nhttp://c.com/\n");
  mm::testing::write_text(dir.file("log.txt"),
                          "http://a.com/x\nhttp://a.com/z\nhttp://c.com/\nhttp://b.org/\n"
                          "http://d.org/\n");
  const auto e = run({"--report", "json", "eval", dir.file("map.ukvs"), "--log",
                      dir.file("log.txt"), "--truth", dir.file("truth.txt")});
  ASSERT_EQ(e.code, cli::kOk) << e.err;
  const auto j = nlohmann::json::parse(e.out);
  mm::StringLineSource truth_src(mm::read_file(dir.file("truth.txt")));
  const auto truth = mm::GroundTruth::from_uri_list(truth_src);
  mm::FileLineSource log(dir.file("log.txt"));
  const auto want = mm::evaluate(mm::MapIndex::open(dir.file("map.ukvs")), 3, log, truth);
  EXPECT_EQ(j, nlohmann::json::parse(want.to_json()));
}

TEST(Cli, SweepWritesSummary) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("base.ukvs"), baseline_text(21, 4000));
  const auto r = run({"sweep", dir.file("base.ukvs"), dir.file("out"), "--weights", "1,0"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out, mm::read_file(dir.file("out") + "/summary.tsv"));
  // Five rows: the baseline and four chained maps, the last read from H0.00P1.00.
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
  EXPECT_NE(r.out.find("\nH0.00P1.00\t0.00\t0.00\t"), std::string::npos) << r.out;
}

TEST(Cli, OverlapMatrix) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("a.txt"), "http://a.com/ 3\nhttp://b.com/ 1\n");
  mm::testing::write_text(dir.file("b.txt"), "http://a.com/ 5\nhttp://c.com/ 1\n");
  const auto r = run({"overlap", "--archive", dir.file("a.txt"), "--access", dir.file("b.txt")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out,
            "archived\\accessed\tZero\tOnes\n"
            "Zero\tNA\t1\n"
            "Ones\t1\t1\n");
}
