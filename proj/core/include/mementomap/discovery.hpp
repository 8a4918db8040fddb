#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mementomap/io.hpp"
#include "mementomap/ukvs.hpp"

namespace mementomap {

enum class DiscoveryMethod { WellKnown, LinkHeader, HtmlLink };

std::string_view to_string(DiscoveryMethod m) noexcept;

struct DiscoverySource {
  std::string archive_base;
  std::string resolved_map_uri;  // always absolute
  DiscoveryMethod method = DiscoveryMethod::WellKnown;
  std::optional<std::string> anchor;  // set when the link describes another archive

  friend bool operator==(const DiscoverySource&, const DiscoverySource&) = default;
};

/// `scheme://authority/.well-known/mementomap`; the base path, query and
/// fragment are ignored. Throws MalformedUri unless the base is absolute http(s).
std::string well_known_uri(std::string_view archive_base);

/// RFC 3986 reference resolution. An empty base returns `ref` unchanged.
std::string resolve_uri(std::string_view base, std::string_view ref);

/// Every `mementomap` link in a Link header value.
std::vector<DiscoverySource> parse_link_header(std::string_view value, std::string_view base = {},
                                               std::vector<std::string>* diagnostics = nullptr);
/// Every `<link rel="mementomap">` element in an HTML document.
std::vector<DiscoverySource> parse_html_links(std::string_view html, std::string_view base = {},
                                              std::vector<std::string>* diagnostics = nullptr);
/// Dispatches on the input: text whose first token is `<uri>` followed by `;`,
/// `,` or the end is a Link header, anything else is HTML. Relative targets
/// are resolved against `base`; links that stay relative are skipped.
std::vector<DiscoverySource> extract_link_relation(std::string_view text, std::string_view base = {},
                                                   std::vector<std::string>* diagnostics = nullptr);

/// Targets of `rel="next"` in a Link header value.
std::vector<std::string> next_links(std::string_view link_header, std::string_view base = {});

/// The `next` URI of a `!meta` header, if the header carries one.
std::optional<std::string> meta_next(const UkvsHeader& header);

struct FetchOptions {
  std::size_t page_cap = 1024;
  std::chrono::seconds timeout{30};
};

struct FetchReport {
  std::uint64_t bytes = 0;  // decoded document bytes written
  std::uint64_t pages = 0;
  std::uint64_t records = 0;
  std::vector<std::string> page_uris;
};

/// Retrieves a map and all its pages into `sink` as one document. Headers come
/// from the first page with pagination links removed. Throws HttpFailure with
/// the status, TooManyPages past the cap, and InvalidDocument when the pages
/// do not form one sorted document with unique keys.
FetchReport fetch_mementomap(const DiscoverySource& source, ByteSink& sink,
                             const FetchOptions& options = {});

/// Tries the well-known URI first; on 404 looks for link relations on the
/// archive base (Link header, then HTML body).
DiscoverySource discover(std::string_view archive_base, const FetchOptions& options = {});

/// Splits a document into pages of at most `records_per_page` records. Every
/// page repeats the headers; all but the last add `!meta {"next": ...}` with
/// the URI `page_uri(i + 1)`.
std::vector<std::string> paginate_document(const MementoMapDocument& doc,
                                           std::size_t records_per_page,
                                           const std::function<std::string(std::size_t)>& page_uri);

/// Inflates gzip or zlib data.
std::string gunzip(std::string_view data);

}  // namespace mementomap
