#include <gtest/gtest.h>

#include <filesystem>
#include <zlib.h>

#include "mementomap/error.hpp"
#include "mementomap/evaluator.hpp"
#include "synthetic.hpp"

namespace mm = mementomap;

namespace {

const char* const kMap = "!meta {}\ncom,a)/* 5\ncom,c)/ 0\norg,b)/ 1\n";
const char* const kTruthUris = "http://a.com/x\nhttp://a.com/y\nhttp://b.org/\nhttp://c.com/\n";
const char* const kLog =
    "http://a.com/x\nhttp://a.com/x\nhttp://a.com/z\nhttp://c.com/\nhttp://b.org/\n"
    "http://d.org/\nftp://not.scored/\n";

mm::GroundTruth truth_from(const std::string& uris) {
  mm::StringLineSource src(uris);
  return mm::GroundTruth::from_uri_list(src);
}

}  // namespace

TEST(Evaluate, ConfusionCounts) {
  const auto truth = truth_from(kTruthUris);
  EXPECT_EQ(truth.urir_count, 4u);
  const auto map = mm::MapIndex::from_string(kMap);
  mm::StringLineSource log(kLog);
  const auto r = mm::evaluate(map, 3, log, truth);
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_EQ(r.tn, 1u);
  EXPECT_EQ(r.lookups, 5u);
  EXPECT_EQ(r.malformed, 1u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.relative_cost, 0.75);
}

TEST(Evaluate, RawModeScoresRepeatsAndOverrideUrirCount) {
  const auto truth = truth_from(kTruthUris);
  const auto map = mm::MapIndex::from_string(kMap);
  mm::StringLineSource log(kLog);
  mm::EvalOptions opts;
  opts.raw = true;
  opts.urir_count = 30;
  const auto r = mm::evaluate(map, 3, log, truth, opts);
  EXPECT_EQ(r.tp, 3u);
  EXPECT_EQ(r.lookups, 6u);
  EXPECT_DOUBLE_EQ(r.relative_cost, 0.1);
}

TEST(Evaluate, EmptyLogThrows) {
  const auto truth = truth_from(kTruthUris);
  const auto map = mm::MapIndex::from_string(kMap);
  mm::StringLineSource log("\nftp://x/\n");
  try {
    mm::evaluate(map, 3, log, truth);
    FAIL();
  } catch (const mm::Error& e) {
    EXPECT_EQ(e.kind(), mm::ErrorKind::EmptyLog);
  }
}

TEST(Evaluate, BaselineIsPerfect) {
  mm::testing::Rng rng(4);
  mm::testing::ArchiveShape shape;
  shape.keys = 3000;
  const auto keys = mm::testing::zipf_archive_keys(rng, shape);
  const auto text = mm::testing::document_text(mm::testing::baseline_records(rng, keys));
  mm::StringLineSource truth_src(text);
  const auto truth = mm::GroundTruth::from_map(truth_src);
  std::string log;
  for (int i = 0; i < 500; ++i) {
    const std::string key = i % 2 ? keys[rng() % keys.size()] : mm::testing::absent_key(rng, keys);
    log += mm::surt_to_uri(key) + "\n";
  }
  mm::StringLineSource log_src(log);
  const auto r = mm::evaluate(mm::MapIndex::from_string(text), keys.size(), log_src, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.relative_cost, 1.0);
}

TEST(GroundTruth, FromMapUsesUrirCountsWhenComplete) {
  mm::StringLineSource with("com,* 5/4\ncom,a)/ 3/2\ncom,a)/x 1/1\n");
  const auto a = mm::GroundTruth::from_map(with);
  EXPECT_EQ(a.present_keys.size(), 2u);
  EXPECT_TRUE(a.contains("com,a)/x"));
  EXPECT_FALSE(a.contains("com,*"));
  EXPECT_EQ(a.urir_count, 3u);

  mm::StringLineSource without("com,a)/ 3/2\ncom,a)/x 1\n");
  EXPECT_EQ(mm::GroundTruth::from_map(without).urir_count, 2u);
}

TEST(GroundTruth, LoadSniffsFormat) {
  mm::testing::TempDir dir;
  mm::testing::write_text(dir.file("uris.txt"), "http://a.com/x?q=1\nhttp://a.com/x?q=2\n");
  mm::testing::write_text(dir.file("bare.ukvs"), "com,a)/x 2\n");
  mm::testing::write_text(dir.file("doc.ukvs"), "!meta {}\ncom,a)/x 2\n");
  const auto u = mm::GroundTruth::load(dir.file("uris.txt"));
  EXPECT_EQ(u.urir_count, 2u);
  EXPECT_TRUE(u.contains("com,a)/x"));
  for (const char* name : {"bare.ukvs", "doc.ukvs"}) {
    const auto m = mm::GroundTruth::load(dir.file(name));
    EXPECT_EQ(m.urir_count, 1u) << name;
    EXPECT_TRUE(m.contains("com,a)/x")) << name;
  }
}

TEST(OverlapMatrix, Buckets) {
  EXPECT_EQ(mm::OverlapMatrix::bucket(0), 0u);
  EXPECT_EQ(mm::OverlapMatrix::bucket(9), 1u);
  EXPECT_EQ(mm::OverlapMatrix::bucket(10), 2u);
  EXPECT_EQ(mm::OverlapMatrix::bucket(999), 3u);
  EXPECT_EQ(mm::OverlapMatrix::bucket(10000), 5u);
  EXPECT_EQ(mm::OverlapMatrix::bucket_label(0), "Zero");
  EXPECT_EQ(mm::OverlapMatrix::bucket_label(4), "Thousands");
  EXPECT_EQ(mm::OverlapMatrix::bucket_label(5), "1E4");
}

TEST(OverlapMatrix, JoinsByCanonicalUri) {
  mm::StringLineSource archive("http://a.com/ 3\nhttp://www.a.com/ 9\nhttp://b.com/ 1\nbad uri x\n");
  mm::StringLineSource access("http://A.com 5\nhttp://c.com/\n");
  std::uint64_t malformed = 0;
  const auto arch = mm::load_uri_counts(archive, &malformed);
  EXPECT_EQ(malformed, 1u);
  const auto m = mm::overlap_matrix(arch, mm::load_uri_counts(access));
  // a: 12 archived, 5 accessed; b: 1, 0; c: 0, 1.
  ASSERT_EQ(m.cells.size(), 3u);
  EXPECT_EQ(m.cells[2][1], 1u);
  EXPECT_EQ(m.cells[1][0], 1u);
  EXPECT_EQ(m.cells[0][1], 1u);
  EXPECT_EQ(m.to_tsv(),
            "archived\\accessed\tZero\tOnes\tTens\n"
            "Zero\tNA\t1\t0\n"
            "Ones\t1\t0\t0\n"
            "Tens\t0\t1\t0\n");
}

TEST(PlanSweep, ChainsAlongPathThenHostWeights) {
  const auto plan = mm::plan_sweep({1, 0, 2, 1});
  ASSERT_EQ(plan.size(), 9u);
  const std::vector<std::tuple<double, double, std::ptrdiff_t>> want{
      {2, 2, -1}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 3},
      {1, 0, 4},  {0, 2, 3}, {0, 1, 6}, {0, 0, 7}};
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(std::make_tuple(plan[i].wh, plan[i].wp, plan[i].input), want[i]) << i;
  }
  EXPECT_THROW(mm::plan_sweep({1, -1}), mm::Error);
  EXPECT_EQ(mm::plan_sweep({4, 2, 1, 0.5, 0.25, 0}).size(), 36u);
}

TEST(SweepMapName, Format) {
  EXPECT_EQ(mm::sweep_map_name(2, 0.5), "H2.00P0.50");
  EXPECT_EQ(mm::sweep_map_name(0.25, 0), "H0.25P0.00");
}

TEST(GzipSize, MatchesZlibFileWriter) {
  mm::testing::Rng rng(1);
  mm::testing::ArchiveShape shape;
  shape.keys = 5000;
  const auto text = mm::testing::document_text(
      mm::testing::baseline_records(rng, mm::testing::zipf_archive_keys(rng, shape)));
  mm::testing::TempDir dir;
  gzFile gz = gzopen(dir.file("x.gz").c_str(), "wb");
  gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
  gzclose(gz);
  EXPECT_EQ(mm::gzip_size(text), std::filesystem::file_size(dir.file("x.gz")));
  EXPECT_EQ(mm::gzip_size(""), 20u);
}

TEST(RunSweep, WritesChainedMapsAndSummary) {
  mm::testing::Rng rng(12);
  mm::testing::ArchiveShape shape;
  shape.keys = 8000;
  const auto keys = mm::testing::zipf_archive_keys(rng, shape);
  mm::testing::TempDir dir;
  const auto baseline = dir.file("baseline.ukvs");
  mm::testing::write_text(baseline,
                          mm::testing::document_text(mm::testing::baseline_records(rng, keys)));
  mm::StringLineSource truth_src(mm::read_file(baseline));
  const auto truth = mm::GroundTruth::from_map(truth_src);
  std::string log;
  for (int i = 0; i < 400; ++i) {
    const std::string key = i % 2 ? keys[rng() % keys.size()] : mm::testing::absent_key(rng, keys);
    log += mm::surt_to_uri(key) + "\n";
  }
  mm::SweepOptions opts;
  opts.weights = {1, 0};
  opts.truth = &truth;
  opts.log_text = &log;
  const auto out = dir.file("sweep");
  const auto result = mm::run_sweep(baseline, out, opts);

  ASSERT_EQ(result.rows.size(), 5u);
  EXPECT_EQ(result.rows[0].input, "baseline");
  EXPECT_DOUBLE_EQ(result.rows[0].eval->accuracy, 1.0);
  EXPECT_EQ(result.rows[1].input, "baseline");
  EXPECT_EQ(result.rows[2].input, "H1.00P1.00");
  EXPECT_EQ(result.rows[3].input, "H1.00P1.00");
  EXPECT_EQ(result.rows[4].input, "H0.00P1.00");
  for (const auto& row : result.rows) {
    ASSERT_TRUE(row.eval);
    EXPECT_DOUBLE_EQ(row.eval->recall, 1.0) << row.map;
    EXPECT_TRUE(std::filesystem::exists(row.map));
  }
  // Each map is no larger than the map it was compacted from.
  EXPECT_LE(result.rows[1].lines, result.rows[0].lines);
  EXPECT_LE(result.rows[2].lines, result.rows[1].lines);
  EXPECT_LE(result.rows[3].lines, result.rows[1].lines);
  EXPECT_LE(result.rows[4].lines, result.rows[3].lines);
  EXPECT_LT(result.rows[4].lines, result.rows[0].lines);
  const auto summary = mm::read_file(out + "/summary.tsv");
  EXPECT_EQ(summary, result.summary_tsv());
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "Input\tWh\tWp\tLines\tSize (bytes)\tGzipped (bytes)\tRollups\tTime (sec)\tRelCost\t"
            "Accuracy\tRecall");
}
