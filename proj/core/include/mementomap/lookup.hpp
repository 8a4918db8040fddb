#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mementomap/frequency.hpp"
#include "mementomap/io.hpp"
#include "mementomap/surt.hpp"
#include "mementomap/ukvs.hpp"

namespace mementomap {

enum class Disposition { Present, AbsentExplicit, AbsentNoMatch };

std::string_view to_string(Disposition d) noexcept;

struct Match {
  SurtKey key;
  FrequencyValue frequency;
};

struct LookupResult {
  SurtKey matched_key;
  FrequencyValue frequency;
  std::size_t probes = 0;

  /// Present unless the frequency asserts explicit absence.
  Disposition disposition() const noexcept;
};

/// A sorted MementoMap searched in place. Header lines ('!') sort below every
/// key, so they need no special casing.
class MapIndex {
 public:
  explicit MapIndex(std::unique_ptr<ByteSource> source, ParseMode mode = ParseMode::Strict);

  /// pread-backed; throws GzipNotSeekable for compressed maps.
  static MapIndex open(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);
  static MapIndex from_string(std::string content, ParseMode mode = ParseMode::Strict);

  /// Exact-key search. `probes` (if given) is incremented once per line read.
  std::optional<Match> bin_search(std::string_view key, std::size_t* probes = nullptr) const;

  /// Probes lookup_keys(uri) in order; the first hit wins.
  std::optional<LookupResult> lookup(std::string_view uri) const;
  std::optional<LookupResult> lookup(const CanonicalUri& uri) const;

  std::uint64_t size_bytes() const { return source_->size(); }
  /// Malformed lines met while probing in lenient mode.
  std::uint64_t malformed_probes() const noexcept { return malformed_; }

 private:
  // Offset and content of the first complete line starting at or after `pos`.
  bool line_at_or_after(std::uint64_t pos, std::uint64_t& start, std::string& line) const;

  std::unique_ptr<ByteSource> source_;
  ParseMode mode_;
  mutable std::uint64_t malformed_ = 0;
};

struct BatchEntry {
  std::string uri;
  Disposition disposition = Disposition::AbsentNoMatch;
  std::optional<SurtKey> matched_key;
  std::optional<FrequencyValue> frequency;
  std::string error;  // non-empty when the URI could not be looked up
};

/// `uri \t disposition \t matched_key \t frequency` ("-" for missing columns,
/// "error" disposition for failed lines).
std::string format_batch_tsv(const BatchEntry& e);

/// One entry per non-blank input line, in input order. Per-line failures are
/// reported in the entry and do not stop the stream.
void batch_lookup(const MapIndex& map, LineSource& uris,
                  const std::function<void(const BatchEntry&)>& sink);

}  // namespace mementomap
