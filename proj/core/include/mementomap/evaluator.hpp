#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mementomap/compactor.hpp"
#include "mementomap/io.hpp"
#include "mementomap/lookup.hpp"

namespace mementomap {

/// What the archive really holds, at HxPx-key granularity.
struct GroundTruth {
  std::unordered_set<std::string> present_keys;
  std::uint64_t urir_count = 0;  // denominator of relative cost

  /// One URI per line; URI-Rs are counted as unique full SURTs.
  static GroundTruth from_uri_list(LineSource& uris);
  /// A baseline map; URI-Rs are the summed `/urir` counts when every record
  /// has one, otherwise the number of keys.
  static GroundTruth from_map(LineSource& map);
  /// Picks from_map when the first data line has a frequency column.
  static GroundTruth load(const std::string& path);

  bool contains(std::string_view hxpx) const {
    return present_keys.find(std::string(hxpx)) != present_keys.end();
  }
};

struct EvalOptions {
  bool raw = false;  // score every log line instead of unique URIs
  std::optional<std::uint64_t> urir_count;  // overrides GroundTruth::urir_count
};

struct EvalReport {
  double relative_cost = 0;
  double accuracy = 0;
  double recall = 0;
  double precision = 0;
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t lookups = 0;
  std::uint64_t map_keys = 0;
  std::uint64_t urir_count = 0;
  std::uint64_t malformed = 0;

  std::string to_json() const;
  std::string to_table() const;
};

/// Number of data records in a map.
std::uint64_t count_map_keys(LineSource& map);

/// A URI counts as predicted present when its lookup yields a match that is
/// not an explicit absence. Throws EmptyLog when nothing could be scored.
EvalReport evaluate(const MapIndex& map, std::uint64_t map_keys, LineSource& log,
                    const GroundTruth& truth, const EvalOptions& options = {});

/// Order-of-magnitude buckets: 0 = zero, 1 = ones (1-9), 2 = tens, ...
struct OverlapMatrix {
  std::vector<std::vector<std::uint64_t>> cells;  // [archive bucket][access bucket]

  static std::size_t bucket(std::uint64_t value) noexcept;
  static std::string bucket_label(std::size_t bucket);
  /// Cell (0,0) is printed as NA.
  std::string to_tsv() const;
};

using UriCounts = std::vector<std::pair<std::string, std::uint64_t>>;

/// Both inputs are keyed by canonical URI-R; repeated keys add up.
OverlapMatrix overlap_matrix(const UriCounts& archive, const UriCounts& access);

/// `uri count` lines; URIs are canonicalized to full SURTs.
UriCounts load_uri_counts(LineSource& lines, std::uint64_t* malformed = nullptr);

/// One compaction in a chained sweep. `input` indexes an earlier step;
/// -1 is the baseline.
struct SweepStep {
  double wh = 0;
  double wp = 0;
  std::ptrdiff_t input = -1;
};

/// Weights are sorted descending. The first pair reads the baseline, the
/// first pair of every later host weight reads the previous host weight's
/// first pair, and every other pair reads its predecessor in path weight.
std::vector<SweepStep> plan_sweep(std::vector<double> weights);

std::string sweep_map_name(double wh, double wp);

struct SweepOptions {
  std::vector<double> weights{4, 2, 1, 0.5, 0.25, 0};
  DepthCaps caps;
  /// Fitted from the baseline's depth statistics when absent.
  std::optional<CutoffModel> model;
  /// Evaluation is skipped unless both are set.
  const GroundTruth* truth = nullptr;
  const std::string* log_text = nullptr;
  EvalOptions eval;
};

struct SweepRow {
  std::string input;
  double wh = kNeverRollUp;
  double wp = kNeverRollUp;
  std::uint64_t lines = 0;
  std::uint64_t size_bytes = 0;
  std::uint64_t gzipped_bytes = 0;
  std::uint64_t rollups = 0;
  double seconds = 0;
  std::optional<EvalReport> eval;
  std::filesystem::path map;
};

struct SweepResult {
  CutoffModel model;
  std::vector<SweepRow> rows;  // baseline first, then plan order

  std::string summary_tsv() const;
};

/// Writes one map per weight pair plus summary.tsv into `out_dir`.
SweepResult run_sweep(const std::filesystem::path& baseline, const std::filesystem::path& out_dir,
                      const SweepOptions& options);

/// Size of the gzip encoding of `data`.
std::uint64_t gzip_size(std::string_view data);

}  // namespace mementomap
