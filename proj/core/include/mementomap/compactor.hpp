#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mementomap/analytics.hpp"
#include "mementomap/io.hpp"
#include "mementomap/surt.hpp"
#include "mementomap/ukvs.hpp"

namespace mementomap {

inline constexpr double kNeverRollUp = std::numeric_limits<double>::infinity();

/// Rollup thresholds, indexed by the depth of the children being counted.
/// A host node at depth d-1 is replaced by `<host>,*` when it has at least
/// host_cutoffs[d] subdomain children; a path node at depth d-1 (P0 = host
/// root) is replaced by `<prefix>/*` when it has at least path_cutoffs[d]
/// children. Only strict descendants are replaced; a node's own key stays.
struct CompactionParams {
  double wh = 0;
  double wp = 0;
  DepthCaps caps;
  std::vector<double> host_cutoffs;  // size caps.max_host_depth + 1
  std::vector<double> path_cutoffs;  // size caps.max_path_depth
  /// Rewrites the `!meta {updated_at}` header when non-empty.
  std::string updated_at;

  double host_cutoff(std::size_t child_depth) const;
  double path_cutoff(std::size_t child_depth) const;
};

struct CutoffModel {
  PowerLawFit host;
  PowerLawFit path;

  /// Fits mean child counts (host depths >= 3, path depths >= 1).
  /// Throws InsufficientStats when a segment has fewer than two usable depths.
  static CutoffModel from_stats(const std::vector<DepthStatsRow>& rows);
  std::string to_json() const;
};

/// cutoff[d] = weight * a * d^-k, with H1, H2 and P0 never rolling up.
CompactionParams derive_cutoffs(const CutoffModel& model, double wh, double wp,
                                DepthCaps caps = {});
CompactionParams derive_cutoffs(const std::vector<DepthStatsRow>& rows, double wh, double wp,
                                DepthCaps caps = {});

/// Explicit tables; missing trailing depths never roll up.
CompactionParams fixed_cutoffs(std::vector<double> host, std::vector<double> path,
                               DepthCaps caps = {});

struct CompactionReport {
  std::uint64_t lines_in = 0;
  std::uint64_t lines_out = 0;
  std::uint64_t rollups = 0;
  double wall_seconds = 0;
  std::size_t peak_trail_entries = 0;
  std::uint64_t bytes_out = 0;

  std::string to_json() const;
};

/// Single pass over a sorted document. Headers are copied (with updated_at
/// rewritten if requested). Throws UnsortedInput on unsorted or duplicate keys.
CompactionReport compact(DocumentReader& input, SeekableSink& output,
                         const CompactionParams& params);
CompactionReport compact(LineSource& input, SeekableSink& output, const CompactionParams& params,
                         ParseMode mode = ParseMode::Strict);

/// In-memory tree pruner defining the rollup semantics; records must have
/// unique keys. Returns sorted records.
std::vector<UkvsRecord> reference_prune(const std::vector<UkvsRecord>& records,
                                        const CompactionParams& params,
                                        std::uint64_t* rollups = nullptr);

}  // namespace mementomap
