#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mementomap/io.hpp"
#include "mementomap/ukvs.hpp"

namespace mementomap {

/// One CDXJ index line: `surt datetime {json}`. Meta fields this tool reads
/// (url, status, mime) are extracted; the JSON text is kept verbatim.
struct CdxjLine {
  std::string surt;
  std::string datetime;
  std::string meta;
  std::string url;     // empty if absent
  std::string status;  // numeric statuses are converted to text
  std::string mime;
};

/// Throws MalformedCdxj.
CdxjLine parse_cdxj(std::string_view line, std::size_t line_no = 0);

struct FilterPolicy {
  std::set<std::string> statuses{"200"};           // empty = any status
  std::vector<std::string> mime_prefixes{"text/html"};  // case-insensitive; empty = any
  std::vector<std::string> exclude_path_suffixes{"robots.txt", "sitemap.xml"};
  bool include_revisits = false;

  /// Keeps everything, revisits included.
  static FilterPolicy none();

  bool accepts(const CdxjLine& line, std::string_view hxpx_key) const;
};

struct GenerationOptions {
  FilterPolicy policy;
  /// Stream input keys directly; a key sorting before its predecessor throws
  /// UnsortedInput. Otherwise keys go through an external sort.
  bool presorted = false;
  /// Malformed lines throw instead of being counted and skipped.
  bool strict = false;
  std::size_t memory_limit_bytes = std::size_t{1} << 30;
  std::filesystem::path temp_dir;
  /// Empty = standard_headers().
  std::vector<UkvsHeader> headers;
};

struct GenerationReport {
  std::uint64_t lines_in = 0;
  std::uint64_t lines_kept = 0;
  std::uint64_t lines_filtered = 0;
  std::uint64_t lines_malformed = 0;
  std::uint64_t unique_hxpx = 0;
  std::uint64_t urim_total = 0;
  std::uint64_t bytes_written = 0;
  std::size_t spilled_runs = 0;

  std::string to_json() const;
};

/// Baseline MementoMap from a CDXJ stream: one record per HxPx key whose
/// frequency is the number of kept lines for that key.
GenerationReport generate(LineSource& cdxj, const GenerationOptions& options, ByteSink& sink);

/// Same, from one URI per line, without metadata filtering.
GenerationReport generate_from_urilist(LineSource& uris, const GenerationOptions& options,
                                       ByteSink& sink);

}  // namespace mementomap
