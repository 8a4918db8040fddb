#include "mementomap/discovery.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <regex>

#include <httplib.h>

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

constexpr std::string_view kWellKnownPath = "/.well-known/mementomap";
constexpr std::string_view kRel = "mementomap";

struct UriParts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

UriParts split_uri(std::string_view uri) {
  static const std::regex re(R"(^(([^:/?#]+):)?(//([^/?#]*))?([^?#]*)(\?([^#]*))?(#(.*))?)");
  std::match_results<std::string_view::const_iterator> m;
  UriParts p;
  if (!std::regex_match(uri.begin(), uri.end(), m, re)) return p;
  if (m[2].matched) p.scheme = m[2].str();
  if (m[4].matched) p.authority = m[4].str();
  p.path = m[5].str();
  if (m[7].matched) p.query = m[7].str();
  if (m[9].matched) p.fragment = m[9].str();
  return p;
}

std::string join_uri(const UriParts& p) {
  std::string out;
  if (p.scheme) out += *p.scheme + ":";
  if (p.authority) out += "//" + *p.authority;
  out += p.path;
  if (p.query) out += "?" + *p.query;
  if (p.fragment) out += "#" + *p.fragment;
  return out;
}

std::string remove_dot_segments(std::string_view in) {
  std::string input(in);
  std::string out;
  while (!input.empty()) {
    if (input.rfind("../", 0) == 0) {
      input.erase(0, 3);
    } else if (input.rfind("./", 0) == 0) {
      input.erase(0, 2);
    } else if (input.rfind("/./", 0) == 0) {
      input.erase(0, 2);
    } else if (input == "/.") {
      input = "/";
    } else if (input.rfind("/../", 0) == 0 || input == "/..") {
      input = input.size() == 3 ? std::string("/") : input.substr(3);
      const auto slash = out.rfind('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (input == "." || input == "..") {
      input.clear();
    } else {
      const auto next = input.find('/', input.front() == '/' ? 1 : 0);
      out += input.substr(0, next);
      input.erase(0, next == std::string::npos ? input.size() : next);
    }
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

bool rel_contains(std::string_view rel, std::string_view wanted) {
  std::size_t pos = 0;
  while (pos < rel.size()) {
    while (pos < rel.size() && std::isspace(static_cast<unsigned char>(rel[pos]))) ++pos;
    std::size_t end = pos;
    while (end < rel.size() && !std::isspace(static_cast<unsigned char>(rel[end]))) ++end;
    if (end > pos && iequals(rel.substr(pos, end - pos), wanted)) return true;
    pos = end;
  }
  return false;
}

bool is_absolute(std::string_view uri) {
  const auto p = split_uri(uri);
  return p.scheme.has_value() && !p.scheme->empty();
}

struct ParsedLink {
  std::string target;
  std::vector<std::pair<std::string, std::string>> params;

  std::optional<std::string> param(std::string_view name) const {
    for (const auto& [k, v] : params) {
      if (iequals(k, name)) return v;
    }
    return std::nullopt;
  }
};

// Link header grammar: link *( "," link ), link = "<" uri ">" *( ";" param ).
std::vector<ParsedLink> parse_links(std::string_view s, std::vector<std::string>* diagnostics) {
  std::vector<ParsedLink> links;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  // Advances past the next top-level comma.
  auto skip_link = [&] {
    bool quoted = false;
    for (; i < s.size(); ++i) {
      if (quoted && s[i] == '\\') {
        ++i;
      } else if (s[i] == '"') {
        quoted = !quoted;
      } else if (!quoted && s[i] == ',') {
        ++i;
        return;
      }
    }
  };
  while (true) {
    skip_ws();
    while (i < s.size() && s[i] == ',') {
      ++i;
      skip_ws();
    }
    if (i >= s.size()) break;
    if (s[i] != '<') {
      if (diagnostics) diagnostics->push_back("link without <uri> at offset " + std::to_string(i));
      skip_link();
      continue;
    }
    const auto close = s.find('>', i);
    if (close == std::string_view::npos) {
      if (diagnostics) diagnostics->push_back("unterminated <uri> at offset " + std::to_string(i));
      break;
    }
    ParsedLink link;
    link.target = std::string(s.substr(i + 1, close - i - 1));
    i = close + 1;
    bool bad = false;
    while (true) {
      skip_ws();
      if (i >= s.size() || s[i] == ',') break;
      if (s[i] != ';') {
        bad = true;
        break;
      }
      ++i;
      skip_ws();
      std::size_t name_end = i;
      while (name_end < s.size() && s[name_end] != '=' && s[name_end] != ';' && s[name_end] != ',' &&
             !std::isspace(static_cast<unsigned char>(s[name_end]))) {
        ++name_end;
      }
      std::string name(s.substr(i, name_end - i));
      i = name_end;
      skip_ws();
      std::string value;
      if (i < s.size() && s[i] == '=') {
        ++i;
        skip_ws();
        if (i < s.size() && s[i] == '"') {
          ++i;
          bool closed = false;
          for (; i < s.size(); ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) {
              value.push_back(s[++i]);
            } else if (s[i] == '"') {
              ++i;
              closed = true;
              break;
            } else {
              value.push_back(s[i]);
            }
          }
          if (!closed) {
            bad = true;
            break;
          }
        } else {
          std::size_t end = i;
          while (end < s.size() && s[end] != ';' && s[end] != ',' &&
                 !std::isspace(static_cast<unsigned char>(s[end]))) {
            ++end;
          }
          value = std::string(s.substr(i, end - i));
          i = end;
        }
      }
      if (name.empty()) {
        bad = true;
        break;
      }
      link.params.emplace_back(std::move(name), std::move(value));
    }
    if (bad) {
      if (diagnostics) diagnostics->push_back("malformed parameters for <" + link.target + ">");
      skip_link();
      continue;
    }
    links.push_back(std::move(link));
  }
  return links;
}

std::optional<DiscoverySource> make_source(std::string_view target, std::string_view base,
                                           DiscoveryMethod method,
                                           const std::optional<std::string>& anchor,
                                           std::vector<std::string>* diagnostics) {
  std::string resolved = resolve_uri(base, target);
  if (!is_absolute(resolved)) {
    if (diagnostics) diagnostics->push_back("relative link without base: " + std::string(target));
    return std::nullopt;
  }
  DiscoverySource src;
  src.archive_base = std::string(base);
  src.resolved_map_uri = std::move(resolved);
  src.method = method;
  if (anchor) src.anchor = resolve_uri(base, *anchor);
  return src;
}

bool looks_like_link_header(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  if (i >= s.size() || s[i] != '<') return false;
  const auto close = s.find('>', i);
  if (close == std::string_view::npos) return false;
  std::size_t j = close + 1;
  while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
  return j >= s.size() || s[j] == ';' || s[j] == ',';
}

std::string origin_of(const UriParts& p) {
  return lower(*p.scheme) + "://" + *p.authority;
}

std::string request_target(const UriParts& p) {
  std::string t = p.path.empty() ? "/" : p.path;
  if (p.query) t += "?" + *p.query;
  return t;
}

struct HttpResult {
  int status = 0;
  std::string body;
  std::string link_header;
  std::string final_uri;
};

HttpResult http_get(const std::string& uri, const FetchOptions& options) {
  const auto parts = split_uri(uri);
  if (!parts.scheme || !parts.authority || parts.authority->empty()) {
    throw Error(ErrorKind::MalformedUri, "not an absolute URI: " + uri);
  }
  const auto scheme = lower(*parts.scheme);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::MalformedUri, "unsupported scheme: " + uri);
  }
  httplib::Client client(origin_of(parts));
  client.set_follow_location(true);
  client.set_decompress(true);
  const auto secs = static_cast<time_t>(options.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  const httplib::Headers headers{{"Accept-Encoding", "gzip"}};
  auto res = client.Get(request_target(parts), headers);
  if (!res) {
    throw Error(ErrorKind::HttpFailure, "GET " + uri + " failed: " + httplib::to_string(res.error()));
  }
  HttpResult out;
  out.status = res->status;
  out.body = std::move(res->body);
  // Multiple Link fields are equivalent to one comma-joined field.
  const auto count = res->get_header_value_count("Link");
  for (std::size_t i = 0; i < count; ++i) {
    if (!out.link_header.empty()) out.link_header += ", ";
    out.link_header += res->get_header_value("Link", i);
  }
  out.final_uri = res->location.empty() ? uri : resolve_uri(uri, res->location);
  return out;
}

HttpResult get_ok(const std::string& uri, const FetchOptions& options) {
  auto r = http_get(uri, options);
  if (r.status < 200 || r.status >= 300) {
    throw Error(ErrorKind::HttpFailure, "GET " + uri + " returned " + std::to_string(r.status), 0,
                r.status);
  }
  return r;
}

bool has_next_meta(const UkvsHeader& h) { return meta_next(h).has_value(); }

}  // namespace

std::string_view to_string(DiscoveryMethod m) noexcept {
  switch (m) {
    case DiscoveryMethod::WellKnown: return "well-known";
    case DiscoveryMethod::LinkHeader: return "link-header";
    case DiscoveryMethod::HtmlLink: return "html-link";
  }
  return "?";
}

std::string well_known_uri(std::string_view archive_base) {
  const auto p = split_uri(archive_base);
  if (!p.scheme || !p.authority || p.authority->empty()) {
    throw Error(ErrorKind::MalformedUri, "archive base must be an absolute URI: " +
                                             std::string(archive_base));
  }
  const auto scheme = lower(*p.scheme);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::MalformedUri, "archive base must be http(s): " + std::string(archive_base));
  }
  return scheme + "://" + lower(*p.authority) + std::string(kWellKnownPath);
}

std::string resolve_uri(std::string_view base, std::string_view ref) {
  if (base.empty()) return std::string(ref);
  const auto r = split_uri(ref);
  const auto b = split_uri(base);
  UriParts t;
  if (r.scheme) {
    t = r;
    t.path = remove_dot_segments(r.path);
  } else {
    if (r.authority) {
      t.authority = r.authority;
      t.path = remove_dot_segments(r.path);
      t.query = r.query;
    } else {
      if (r.path.empty()) {
        t.path = b.path;
        t.query = r.query ? r.query : b.query;
      } else {
        if (r.path.front() == '/') {
          t.path = remove_dot_segments(r.path);
        } else {
          std::string merged;
          if (b.authority && b.path.empty()) {
            merged = "/" + r.path;
          } else {
            const auto slash = b.path.rfind('/');
            merged = (slash == std::string::npos ? std::string() : b.path.substr(0, slash + 1)) +
                     r.path;
          }
          t.path = remove_dot_segments(merged);
        }
        t.query = r.query;
      }
      t.authority = b.authority;
    }
    t.scheme = b.scheme;
  }
  t.fragment = r.fragment;
  return join_uri(t);
}

std::vector<DiscoverySource> parse_link_header(std::string_view value, std::string_view base,
                                               std::vector<std::string>* diagnostics) {
  std::vector<DiscoverySource> out;
  for (const auto& link : parse_links(value, diagnostics)) {
    const auto rel = link.param("rel");
    if (!rel || !rel_contains(*rel, kRel)) continue;
    if (auto src = make_source(link.target, base, DiscoveryMethod::LinkHeader, link.param("anchor"),
                               diagnostics)) {
      out.push_back(std::move(*src));
    }
  }
  return out;
}

std::vector<DiscoverySource> parse_html_links(std::string_view html, std::string_view base,
                                              std::vector<std::string>* diagnostics) {
  std::vector<DiscoverySource> out;
  const std::string lowered = lower(html);
  std::size_t pos = 0;
  while ((pos = lowered.find("<link", pos)) != std::string::npos) {
    std::size_t i = pos + 5;
    pos = i;
    if (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '/' &&
        html[i] != '>') {
      continue;
    }
    std::optional<std::string> rel, href, anchor;
    while (i < html.size() && html[i] != '>') {
      while (i < html.size() && (std::isspace(static_cast<unsigned char>(html[i])) || html[i] == '/')) {
        ++i;
      }
      if (i >= html.size() || html[i] == '>') break;
      std::size_t name_end = i;
      while (name_end < html.size() && html[name_end] != '=' && html[name_end] != '>' &&
             !std::isspace(static_cast<unsigned char>(html[name_end]))) {
        ++name_end;
      }
      const std::string name = lower(html.substr(i, name_end - i));
      i = name_end;
      while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
      std::string value;
      if (i < html.size() && html[i] == '=') {
        ++i;
        while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
        if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
          const char q = html[i];
          const auto end = html.find(q, i + 1);
          if (end == std::string_view::npos) {
            i = html.size();
            break;
          }
          value = std::string(html.substr(i + 1, end - i - 1));
          i = end + 1;
        } else {
          std::size_t end = i;
          while (end < html.size() && html[end] != '>' &&
                 !std::isspace(static_cast<unsigned char>(html[end]))) {
            ++end;
          }
          value = std::string(html.substr(i, end - i));
          i = end;
        }
      }
      if (name == "rel") rel = value;
      else if (name == "href") href = value;
      else if (name == "anchor") anchor = value;
    }
    pos = i;
    if (!rel || !rel_contains(*rel, kRel)) continue;
    if (!href) {
      if (diagnostics) diagnostics->push_back("mementomap <link> without href");
      continue;
    }
    if (auto src = make_source(*href, base, DiscoveryMethod::HtmlLink, anchor, diagnostics)) {
      out.push_back(std::move(*src));
    }
  }
  return out;
}

std::vector<DiscoverySource> extract_link_relation(std::string_view text, std::string_view base,
                                                   std::vector<std::string>* diagnostics) {
  return looks_like_link_header(text) ? parse_link_header(text, base, diagnostics)
                                      : parse_html_links(text, base, diagnostics);
}

std::vector<std::string> next_links(std::string_view link_header, std::string_view base) {
  std::vector<std::string> out;
  for (const auto& link : parse_links(link_header, nullptr)) {
    const auto rel = link.param("rel");
    if (rel && rel_contains(*rel, "next")) out.push_back(resolve_uri(base, link.target));
  }
  return out;
}

std::optional<std::string> meta_next(const UkvsHeader& header) {
  if (header.name != "meta") return std::nullopt;
  static const std::regex re(R"re(^\s*\{\s*"?next"?\s*:\s*"([^"]*)"\s*\}\s*$)re");
  std::smatch m;
  if (!std::regex_match(header.body, m, re)) return std::nullopt;
  return m[1].str();
}

std::string gunzip(std::string_view data) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw Error(ErrorKind::IoFailure, "inflateInit2 failed");
  std::string out;
  char buf[1 << 15];
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error(ErrorKind::InvalidDocument, "corrupt gzip body");
    }
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw Error(ErrorKind::InvalidDocument, "truncated gzip body");
    }
  }
  inflateEnd(&zs);
  return out;
}

FetchReport fetch_mementomap(const DiscoverySource& source, ByteSink& sink,
                             const FetchOptions& options) {
  FetchReport report;
  DocumentWriter writer(sink);
  std::optional<std::string> uri = source.resolved_map_uri;
  std::vector<std::string> seen;
  while (uri) {
    if (report.pages >= options.page_cap) {
      throw Error(ErrorKind::TooManyPages,
                  "more than " + std::to_string(options.page_cap) + " pages");
    }
    if (std::find(seen.begin(), seen.end(), *uri) != seen.end()) {
      throw Error(ErrorKind::InvalidDocument, "pagination loop at " + *uri);
    }
    seen.push_back(*uri);
    auto res = get_ok(*uri, options);
    std::string body = std::move(res.body);
    if (body.size() >= 2 && static_cast<unsigned char>(body[0]) == 0x1f &&
        static_cast<unsigned char>(body[1]) == 0x8b) {
      body = gunzip(body);
    }
    const std::string page_uri = res.final_uri;
    report.page_uris.push_back(page_uri);

    std::optional<std::string> next;
    StringLineSource lines(std::move(body));
    try {
      DocumentReader reader(lines, ParseMode::Strict);
      for (const auto& h : reader.headers()) {
        if (auto n = meta_next(h)) {
          if (!next) next = resolve_uri(page_uri, *n);
        } else if (report.pages == 0) {
          writer.header(h);
        }
      }
      RecordView rec;
      while (reader.next(rec)) writer.record(rec.key, rec.frequency, rec.extra);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidDocument, "page " + std::to_string(report.pages + 1) + " (" +
                                                  page_uri + "): " + e.what(),
                  e.line());
    }
    if (!next && !res.link_header.empty()) {
      const auto links = next_links(res.link_header, page_uri);
      if (!links.empty()) next = links.front();
    }
    ++report.pages;
    uri = std::move(next);
  }
  report.bytes = writer.bytes_written();
  report.records = writer.records_written();
  sink.flush();
  return report;
}

DiscoverySource discover(std::string_view archive_base, const FetchOptions& options) {
  const std::string wk = well_known_uri(archive_base);
  // The well-known probe downloads the map; callers fetch it again. A HEAD
  // would be cheaper but is not universally supported by static hosts.
  const auto probe = http_get(wk, options);
  if (probe.status >= 200 && probe.status < 300) {
    return DiscoverySource{std::string(archive_base), wk, DiscoveryMethod::WellKnown, std::nullopt};
  }
  if (probe.status != 404) {
    throw Error(ErrorKind::HttpFailure, "GET " + wk + " returned " + std::to_string(probe.status),
                0, probe.status);
  }
  const auto page = get_ok(std::string(archive_base), options);
  auto found = parse_link_header(page.link_header, page.final_uri);
  if (found.empty()) found = parse_html_links(page.body, page.final_uri);
  if (found.empty()) {
    throw Error(ErrorKind::HttpFailure, "no MementoMap advertised at " + std::string(archive_base),
                0, 404);
  }
  for (auto& f : found) f.archive_base = std::string(archive_base);
  return found.front();
}

std::vector<std::string> paginate_document(const MementoMapDocument& doc,
                                           std::size_t records_per_page,
                                           const std::function<std::string(std::size_t)>& page_uri) {
  if (records_per_page == 0) {
    throw Error(ErrorKind::InvalidArgument, "records_per_page must be positive");
  }
  std::vector<UkvsHeader> headers;
  for (const auto& h : doc.headers) {
    if (!has_next_meta(h)) headers.push_back(h);
  }
  const std::size_t n = doc.records.size();
  const std::size_t pages = n == 0 ? 1 : (n + records_per_page - 1) / records_per_page;
  std::vector<std::string> out;
  out.reserve(pages);
  for (std::size_t p = 0; p < pages; ++p) {
    StringSink sink;
    DocumentWriter w(sink);
    w.headers(headers);
    if (p + 1 < pages) w.header({"meta", "{next: \"" + page_uri(p + 1) + "\"}"});
    const std::size_t end = std::min(n, (p + 1) * records_per_page);
    for (std::size_t i = p * records_per_page; i < end; ++i) w.record(doc.records[i]);
    out.push_back(sink.take());
  }
  return out;
}

}  // namespace mementomap
