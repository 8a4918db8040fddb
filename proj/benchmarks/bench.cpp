#include <benchmark/benchmark.h>

#include <map>

#include "mementomap/analytics.hpp"
#include "mementomap/compactor.hpp"
#include "mementomap/frequency.hpp"
#include "mementomap/lookup.hpp"
#include "mementomap/surt.hpp"
#include "synthetic.hpp"

namespace mm = mementomap;
namespace mt = mementomap::testing;

namespace {

struct Fixture {
  std::vector<std::string> keys;
  std::vector<std::string> uris;
  std::string text;
};

// Shared across runs; building a 1e5-key archive takes longer than most cases.
const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Fixture f;
  mt::Rng rng(n);
  mt::ArchiveShape shape;
  shape.keys = n;
  f.keys = mt::zipf_archive_keys(rng, shape);
  f.text = mt::document_text(mt::baseline_records(rng, f.keys));
  for (std::size_t i = 0; i < 4096; ++i) {
    const auto& key = i % 2 ? f.keys[rng() % f.keys.size()] : mt::absent_key(rng, f.keys);
    f.uris.push_back(mm::surt_to_uri(key));
  }
  return cache.emplace(n, std::move(f)).first->second;
}

void BM_Surtify(benchmark::State& state) {
  const auto& f = fixture(10'000);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mm::surtify(f.uris[i++ % f.uris.size()]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Surtify);

void BM_ParseFrequency(benchmark::State& state) {
  const char* const forms[] = {"54321/20000", "10000+", "2500~/900", "300+/20-", "0", "17"};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mm::parse_frequency(forms[i++ % 6]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseFrequency);

void BM_Lookup(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto map = mm::MapIndex::from_string(f.text);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(map.lookup(f.uris[i++ % f.uris.size()]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Lookup)->Arg(1'000)->Arg(10'000)->Arg(100'000);

void BM_LookupFile(benchmark::State& state) {
  const auto& f = fixture(100'000);
  mt::TempDir dir;
  mt::write_text(dir.file("m.ukvs"), f.text);
  const auto map = mm::MapIndex::open(dir.file("m.ukvs"));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(map.lookup(f.uris[i++ % f.uris.size()]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LookupFile);

void BM_Compact(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  mm::StringLineSource stats_in(f.text);
  const auto params = mm::derive_cutoffs(mm::depth_stats(stats_in), 1, 1);
  for (auto _ : state) {
    mm::StringLineSource src(f.text);
    mm::NullSink sink;
    benchmark::DoNotOptimize(mm::compact(src, sink, params));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.keys.size()));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(f.text.size()));
}
BENCHMARK(BM_Compact)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_DepthStats(benchmark::State& state) {
  const auto& f = fixture(100'000);
  for (auto _ : state) {
    mm::StringLineSource src(f.text);
    benchmark::DoNotOptimize(mm::depth_stats(src));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.keys.size()));
}
BENCHMARK(BM_DepthStats)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
