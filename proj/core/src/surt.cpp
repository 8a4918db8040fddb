#include "mementomap/surt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

constexpr char kHex[] = "0123456789ABCDEF";

bool is_unreserved(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' ||
         c == '~';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

void append_escaped(std::string& out, unsigned char c) {
  out.push_back('%');
  out.push_back(kHex[c >> 4]);
  out.push_back(kHex[c & 0x0F]);
}

// Percent-escape normalization shared by path segments and query params.
std::string normalize_escapes(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto c = static_cast<unsigned char>(in[i]);
    if (c == '%') {
      if (i + 2 < in.size() && hex_value(in[i + 1]) >= 0 &&
          hex_value(in[i + 2]) >= 0) {
        const auto v = static_cast<unsigned char>(hex_value(in[i + 1]) * 16 +
                                                  hex_value(in[i + 2]));
        if (is_unreserved(v)) {
          out.push_back(static_cast<char>(v));
        } else {
          append_escaped(out, v);
        }
        i += 2;
      } else {
        append_escaped(out, '%');
      }
    } else if (c <= 0x20 || c >= 0x7F || c == '*' || c == '#' || c == ')') {
      append_escaped(out, c);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

bool valid_label(std::string_view label) {
  if (label.empty()) return false;
  if (label.front() == '[') {
    // Bracketed IPv6 literal, kept as a single label.
    if (label.size() < 3 || label.back() != ']') return false;
    return std::all_of(label.begin() + 1, label.end() - 1, [](char c) {
      return hex_value(c) >= 0 || c == ':' || c == '.';
    });
  }
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_';
  });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

[[noreturn]] void malformed(std::string_view uri, std::string_view why) {
  std::string msg(why);
  msg += ": ";
  msg += uri.substr(0, 200);
  throw Error(ErrorKind::MalformedUri, msg);
}

std::vector<std::string> split_host(std::string_view uri, std::string_view host) {
  std::string h = lower(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  if (h.empty()) malformed(uri, "empty host");

  std::vector<std::string> labels;
  if (h.front() == '[') {
    if (!valid_label(h)) malformed(uri, "bad IPv6 literal");
    labels.push_back(h);
    return labels;
  }
  std::size_t start = 0;
  while (true) {
    const auto dot = h.find('.', start);
    std::string_view label(h.data() + start,
                           (dot == std::string::npos ? h.size() : dot) - start);
    if (!valid_label(label)) malformed(uri, "bad host label");
    labels.emplace_back(label);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // Leftmost "www" labels go, provided a registrable name remains.
  std::size_t skip = 0;
  while (labels.size() - skip > 2 && labels[skip] == "www") ++skip;
  labels.erase(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(skip));
  std::reverse(labels.begin(), labels.end());
  return labels;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string_view::npos) slash = path.size();
    std::string seg = normalize_escapes(path.substr(start, slash - start));
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
    } else if (!seg.empty() && seg != ".") {
      segments.push_back(std::move(seg));
    }
    start = slash + 1;
  }
  return segments;
}

std::vector<std::string> split_query(std::string_view query) {
  std::vector<std::string> params;
  std::size_t start = 0;
  while (start <= query.size()) {
    auto amp = query.find('&', start);
    if (amp == std::string_view::npos) amp = query.size();
    if (amp > start) params.push_back(normalize_escapes(query.substr(start, amp - start)));
    start = amp + 1;
  }
  std::sort(params.begin(), params.end());
  return params;
}

void append_host(std::string& out, const CanonicalUri& uri) {
  for (std::size_t i = 0; i < uri.host_parts.size(); ++i) {
    if (i) out.push_back(',');
    out += uri.host_parts[i];
  }
  if (uri.port) {
    out.push_back(':');
    out += std::to_string(*uri.port);
  }
}

// Splits `text` on `sep` into at most `cap` pieces; the last piece keeps the rest.
template <typename Out>
void split_capped(std::string_view text, char sep, std::size_t cap, Out& out) {
  std::size_t start = 0;
  while (true) {
    if (out.size() + 1 >= cap) {
      out.push_back(text.substr(start));
      return;
    }
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

bool SurtKey::is_wildcard(std::string_view text) noexcept {
  if (text == "*") return true;
  return text.size() >= 2 && text.back() == '*' &&
         (text[text.size() - 2] == ',' || text[text.size() - 2] == '/');
}

SurtKey SurtKey::parse(std::string_view text) {
  validate(text);
  return SurtKey(std::string(text));
}

void SurtKey::validate(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::MalformedLine, "empty key");
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c <= 0x20 || c == 0x7F) {
      throw Error(ErrorKind::MalformedLine, "whitespace in key");
    }
    if (c == ')' && text.find(')', i + 1) != std::string_view::npos) {
      throw Error(ErrorKind::MalformedLine, "more than one ')' in key: " + std::string(text));
    }
    if (c == '*' && i + 1 != text.size()) {
      throw Error(ErrorKind::MalformedLine,
                  "'*' allowed only as trailing wildcard: " + std::string(text));
    }
  }
  if (text.back() == '*' && !is_wildcard(text)) {
    throw Error(ErrorKind::MalformedLine, "bad wildcard: " + std::string(text));
  }
}

CanonicalUri canonicalize(std::string_view uri) {
  std::string_view rest = uri;
  while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
  while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t' ||
                           rest.back() == '\r' || rest.back() == '\n')) {
    rest.remove_suffix(1);
  }
  if (rest.empty()) malformed(uri, "empty URI");

  CanonicalUri out;
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    rest = rest.substr(0, hash);
  }
  if (const auto sep = rest.find("://"); sep != std::string_view::npos &&
                                          rest.find_first_of("/?") > sep) {
    out.scheme = lower(rest.substr(0, sep));
    if (out.scheme != "http" && out.scheme != "https") {
      malformed(uri, "unsupported scheme");
    }
    rest.remove_prefix(sep + 3);
  } else {
    out.scheme = "http";
    if (rest.starts_with("//")) rest.remove_prefix(2);
  }

  const auto authority_end = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, authority_end);
  std::string_view tail = authority_end == std::string_view::npos
                              ? std::string_view{}
                              : rest.substr(authority_end);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }

  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) malformed(uri, "unterminated IPv6 literal");
    host = authority.substr(0, close + 1);
    const auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') malformed(uri, "junk after IPv6 literal");
      port = after.substr(1);
    }
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  out.host_parts = split_host(uri, host);

  if (!port.empty()) {
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535) {
      malformed(uri, "bad port");
    }
    const unsigned dflt = out.scheme == "https" ? 443 : 80;
    if (value != dflt) out.port = static_cast<std::uint16_t>(value);
  }

  std::string_view path = tail;
  std::string_view query;
  if (const auto q = tail.find('?'); q != std::string_view::npos) {
    path = tail.substr(0, q);
    query = tail.substr(q + 1);
  }
  out.path_segments = split_path(path);
  out.query_params = split_query(query);
  return out;
}

std::string serialize_surt(const CanonicalUri& uri, bool include_query) {
  std::string out;
  append_host(out, uri);
  out += ")/";
  for (std::size_t i = 0; i < uri.path_segments.size(); ++i) {
    if (i) out.push_back('/');
    out += uri.path_segments[i];
  }
  if (include_query && !uri.query_params.empty()) {
    out.push_back('?');
    for (std::size_t i = 0; i < uri.query_params.size(); ++i) {
      if (i) out.push_back('&');
      out += uri.query_params[i];
    }
  }
  return out;
}

std::string to_uri(const CanonicalUri& uri) {
  std::string out = uri.scheme.empty() ? "http" : uri.scheme;
  out += "://";
  for (std::size_t i = uri.host_parts.size(); i-- > 0;) {
    out += uri.host_parts[i];
    if (i) out.push_back('.');
  }
  if (uri.port) {
    out.push_back(':');
    out += std::to_string(*uri.port);
  }
  out.push_back('/');
  for (std::size_t i = 0; i < uri.path_segments.size(); ++i) {
    if (i) out.push_back('/');
    out += uri.path_segments[i];
  }
  if (!uri.query_params.empty()) {
    out.push_back('?');
    for (std::size_t i = 0; i < uri.query_params.size(); ++i) {
      if (i) out.push_back('&');
      out += uri.query_params[i];
    }
  }
  return out;
}

SurtKey surtify(std::string_view uri) { return SurtKey(serialize_surt(canonicalize(uri))); }

HxPxKey hxpx_key(const CanonicalUri& uri) {
  return HxPxKey{SurtKey(serialize_surt(uri, false)), uri.host_parts.size(),
                 uri.path_segments.size()};
}

HxPxKey hxpx_key(std::string_view uri) { return hxpx_key(canonicalize(uri)); }

std::string surt_to_uri(std::string_view surt) {
  std::string_view s = surt;
  for (std::string_view prefix : {"http://(", "https://(", "("}) {
    if (s.starts_with(prefix)) {
      s.remove_prefix(prefix.size());
      break;
    }
  }
  const auto close = s.find(')');
  if (close == std::string_view::npos || close == 0) {
    throw Error(ErrorKind::MalformedUri, "SURT without host section: " + std::string(surt));
  }
  std::string_view host = s.substr(0, close);
  std::string_view rest = s.substr(close + 1);
  // Classic SURTs close the host with ",)".
  if (host.size() > 1 && host.back() == ',') host.remove_suffix(1);

  std::string port;
  if (const auto colon = host.rfind(':'); colon != std::string_view::npos &&
                                         host.find(']') == std::string_view::npos) {
    port = std::string(host.substr(colon));
    host = host.substr(0, colon);
  }
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (true) {
    const auto comma = host.find(',', start);
    labels.push_back(host.substr(start, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::string out = "http://";
  for (std::size_t i = labels.size(); i-- > 0;) {
    out += labels[i];
    if (i) out.push_back('.');
  }
  out += port;
  if (rest.empty() || (rest.front() != '/' && rest.front() != '?')) out.push_back('/');
  out += rest;
  return out;
}

HxPxKey hxpx_from_surt(std::string_view surt) { return hxpx_key(surt_to_uri(surt)); }

std::vector<SurtKey> host_keys(const SurtKey& surt, std::size_t max_host_depth) {
  std::string_view text = surt.text();
  std::string_view host = text.substr(0, text.find(')'));
  std::vector<std::string_view> parts;
  split_capped(host, ',', std::max<std::size_t>(max_host_depth, 1), parts);
  std::vector<SurtKey> out;
  out.reserve(parts.size());
  for (const auto& p : parts) {
    const auto len = static_cast<std::size_t>(p.data() + p.size() - host.data());
    out.emplace_back(std::string(host.substr(0, len)));
  }
  return out;
}

std::vector<SurtKey> path_keys(const SurtKey& surt, std::size_t max_path_depth) {
  std::string_view text = surt.text();
  text = text.substr(0, text.find('?'));
  while (!text.empty() && text.back() == '/') text.remove_suffix(1);
  std::vector<std::string_view> parts;
  split_capped(text, '/', std::max<std::size_t>(max_path_depth, 1), parts);
  std::vector<SurtKey> out;
  out.reserve(parts.size());
  for (const auto& p : parts) {
    const auto len = static_cast<std::size_t>(p.data() + p.size() - text.data());
    out.emplace_back(std::string(text.substr(0, len)));
  }
  return out;
}

std::vector<SurtKey> lookup_keys(const CanonicalUri& uri) {
  std::vector<SurtKey> keys;
  keys.reserve(uri.path_segments.size() + uri.host_parts.size() + 2);

  std::string host;
  append_host(host, uri);
  keys.emplace_back(serialize_surt(uri, false));

  if (!uri.path_segments.empty()) {
    std::string prefix = host + ")/";
    std::vector<std::size_t> ends;  // prefix length after each segment
    ends.push_back(prefix.size());
    for (std::size_t i = 0; i < uri.path_segments.size(); ++i) {
      prefix += uri.path_segments[i];
      prefix.push_back('/');
      ends.push_back(prefix.size());
    }
    for (std::size_t j = ends.size(); j-- > 0;) {
      keys.emplace_back(prefix.substr(0, ends[j]) + "*");
    }
  }

  // Host wildcards from the parent host up to the TLD; never the bare "*".
  for (std::size_t i = uri.host_parts.size(); i-- > 1;) {
    std::string key;
    for (std::size_t j = 0; j < i; ++j) {
      key += uri.host_parts[j];
      key.push_back(',');
    }
    key.push_back('*');
    keys.emplace_back(std::move(key));
  }
  return keys;
}

std::vector<SurtKey> lookup_keys(std::string_view uri) {
  return lookup_keys(canonicalize(uri));
}

void split_key(std::string_view key, const DepthCaps& caps, KeyTokens& out) {
  out.host.clear();
  out.path.clear();
  const auto close = key.find(')');
  std::string_view host = key.substr(0, close);
  split_capped(host, ',', std::max<std::size_t>(caps.max_host_depth, 1), out.host);
  out.has_path = close != std::string_view::npos;
  if (!out.has_path) return;
  std::string_view path = key.substr(close + 1);
  if (!path.empty() && path.front() == '/') path.remove_prefix(1);
  if (path.empty()) return;
  split_capped(path, '/', std::max<std::size_t>(caps.max_path_depth, 2) - 1, out.path);
}

KeyTokens split_key(std::string_view key, const DepthCaps& caps) {
  KeyTokens t;
  split_key(key, caps, t);
  return t;
}

}  // namespace mementomap
