#pragma once

// SURT canonicalization and key derivation.
//
// Key grammar (normative for every file format in this project):
//
//   key       = "*" / host [ "," "*" ] / host ")" path
//   host      = label *( "," label )        ; reversed DNS order, lowercase
//   label     = 1*( ALPHA / DIGIT / "-" / "_" ) [ ":" port ]   ; port only on the last label
//   path      = "/" [ segment *( "/" segment ) ] [ "?" query ] [ "/*" ]
//
// Host labels are reversed ("www.foo.example.com" -> "com,example,foo"), a
// leading "www" label is removed, non-default ports are attached to the most
// specific label ("com,example:8080"), userinfo and fragments are dropped.
// Path segments keep their case; percent-escapes are normalized to uppercase
// hex, escapes of unreserved characters are decoded, "*", ")" and bytes
// outside printable ASCII are escaped. Empty segments and dot segments are removed, so
// trailing slashes never appear except in the root path "h)/".

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mementomap {

struct DepthCaps {
  std::size_t max_host_depth = 10;
  std::size_t max_path_depth = 12;
};

struct CanonicalUri {
  std::string scheme;
  std::vector<std::string> host_parts;  // reversed, e.g. {"com", "example"}
  std::optional<std::uint16_t> port;    // absent when default for scheme
  std::vector<std::string> path_segments;
  std::vector<std::string> query_params;  // sorted byte-wise

  bool operator==(const CanonicalUri&) const = default;
};

/// A canonical, sort-friendly key. Ordering is plain byte-wise comparison.
class SurtKey {
 public:
  SurtKey() = default;
  explicit SurtKey(std::string text) : text_(std::move(text)) {}

  /// Validates the general key shape (non-empty, no whitespace, at most one
  /// ')', wildcard only as trailing `*`). Throws MalformedLine.
  static SurtKey parse(std::string_view text);
  /// The checks of parse() without allocating.
  static void validate(std::string_view text);

  const std::string& text() const noexcept { return text_; }
  bool wildcard() const noexcept { return is_wildcard(text_); }

  static bool is_wildcard(std::string_view text) noexcept;

  friend bool operator==(const SurtKey&, const SurtKey&) = default;
  friend std::strong_ordering operator<=>(const SurtKey& a, const SurtKey& b) {
    return a.text_.compare(b.text_) <=> 0;
  }

 private:
  std::string text_;
};

struct HxPxKey {
  SurtKey key;
  std::size_t host_depth = 0;
  std::size_t path_depth = 0;
};

CanonicalUri canonicalize(std::string_view uri);

/// SURT text of a canonical URI, scheme omitted.
std::string serialize_surt(const CanonicalUri& uri, bool include_query = true);

/// Rebuilds an http(s) URI that canonicalizes back to `uri`.
std::string to_uri(const CanonicalUri& uri);

SurtKey surtify(std::string_view uri);
HxPxKey hxpx_key(std::string_view uri);
HxPxKey hxpx_key(const CanonicalUri& uri);

/// Converts SURT text produced elsewhere (optionally "http://(" prefixed, with
/// or without query) to this project's HxPx key.
HxPxKey hxpx_from_surt(std::string_view surt);

/// Inverse of surtify for non-wildcard keys: an http URI for the key.
std::string surt_to_uri(std::string_view surt);

std::vector<SurtKey> host_keys(const SurtKey& surt,
                               std::size_t max_host_depth = DepthCaps{}.max_host_depth);
std::vector<SurtKey> path_keys(const SurtKey& surt,
                               std::size_t max_path_depth = DepthCaps{}.max_path_depth);

/// Probe keys in decreasing specificity: the exact HxPx key, then path
/// wildcards from the deepest ("<key>/*") up to "<host>)/*" (omitted for the
/// root path), then host wildcards from the parent host up to the TLD.
std::vector<SurtKey> lookup_keys(std::string_view uri);
std::vector<SurtKey> lookup_keys(const CanonicalUri& uri);

/// Tree coordinates of a key under depth caps. Host tokens beyond the cap are
/// kept joined (with ',') in the last token; path tokens likewise with '/'.
/// Views point into the key text.
struct KeyTokens {
  std::vector<std::string_view> host;
  bool has_path = false;
  std::vector<std::string_view> path;  // excludes the root (P0) level
};

void split_key(std::string_view key, const DepthCaps& caps, KeyTokens& out);
KeyTokens split_key(std::string_view key, const DepthCaps& caps = {});

}  // namespace mementomap
