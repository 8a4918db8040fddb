#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mementomap/io.hpp"
#include "mementomap/surt.hpp"

namespace mementomap {

enum class Segment { Host, Path };

/// Statistics of key prefixes at one depth. Keys at least `depth` deep are
/// chopped at that depth; each unique prefix is one node whose value is the
/// number of keys it covers.
struct DepthStatsRow {
  Segment segment = Segment::Host;
  std::size_t depth = 0;
  bool overflow = false;  // last row of its segment ("H10+", "P11+")
  std::uint64_t count = 0;
  std::uint64_t sum = 0;
  std::uint64_t max = 0;
  double mean = 0;
  double median = 0;  // mean of the two middle values for even counts
  double stddev = 0;  // population
  double redq = 0;
  std::uint64_t parents = 0;   // nodes one level up with at least one child here
  std::uint64_t children = 0;  // == count
  double mean_child = 0;

  std::string label() const;
};

/// (sum_d - count_d) / total. Throws DomainError unless total >= sum >= count
/// and total > 0.
double redq(std::uint64_t count, std::uint64_t sum, std::uint64_t total);

/// Streaming depth statistics over byte-sorted unique keys.
class DepthStatsBuilder {
 public:
  explicit DepthStatsBuilder(DepthCaps caps = {});
  ~DepthStatsBuilder();
  DepthStatsBuilder(DepthStatsBuilder&&) noexcept;
  DepthStatsBuilder& operator=(DepthStatsBuilder&&) noexcept;

  /// Throws UnsortedInput unless `key` sorts after the previous key.
  void add(std::string_view key);
  /// Host rows H1..Hmax, then path rows P0..P(max_path_depth - 1).
  std::vector<DepthStatsRow> finish();

  std::uint64_t total_keys() const noexcept;
  /// Largest number of simultaneously open prefix nodes.
  std::size_t peak_open_nodes() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Reads the first column of every data line (UKVS maps or bare key lists).
std::vector<DepthStatsRow> depth_stats(LineSource& keys, DepthCaps caps = {});

/// Column order: Depth Count Sum Max Mean Med. StdDev RedQ Parents Children MeanChld.
std::string depth_stats_tsv(const std::vector<DepthStatsRow>& rows);
std::string depth_stats_json(const std::vector<DepthStatsRow>& rows);

struct PowerLawFit {
  double a = 0;
  double k = 0;
  double rms_residual = 0;  // in log space
  std::size_t points = 0;

  double at(double depth) const;
};

/// Least squares on ln y = ln a - k ln d. Throws InsufficientStats with fewer
/// than two points, DomainError for non-positive values, DegenerateFit when
/// every depth is equal.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

/// (depth, mean_child) pairs usable for fitting: host depths >= 3, path
/// depths >= 1, positive mean child only.
std::vector<std::pair<double, double>> mean_child_points(const std::vector<DepthStatsRow>& rows,
                                                         Segment segment);

/// Point where the top `top_fraction` of URI-Rs hold `memento_fraction` of
/// mementos and the two add up to one.
struct ParetoBreak {
  double top_fraction = 0;
  double memento_fraction = 0;
};

/// Value -> multiplicity.
using CountHistogram = std::map<std::uint64_t, std::uint64_t>;

/// Exact for integer counts; equal counts give exactly 0. Throws EmptyInput.
double gini(const CountHistogram& histogram);
ParetoBreak pareto_break(const CountHistogram& histogram);

struct ArchiveSummary {
  std::uint64_t unique_urirs = 0;
  std::uint64_t total_urims = 0;
  double gamma = 0;
  std::uint64_t max_urims_per_urir = 0;
  double median = 0;
  double stddev = 0;
  double gini = 0;
  ParetoBreak pareto;

  std::string to_json() const;
};

class ArchiveSummaryBuilder {
 public:
  void add(std::uint64_t urim_count) { ++histogram_[urim_count]; }
  const CountHistogram& histogram() const noexcept { return histogram_; }
  /// Throws EmptyInput.
  ArchiveSummary finish() const;

 private:
  CountHistogram histogram_;
};

ArchiveSummary archive_summary(std::span<const std::uint64_t> urim_counts);

}  // namespace mementomap
