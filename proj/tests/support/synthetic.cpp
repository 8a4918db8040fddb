#include "synthetic.hpp"

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "mementomap/frequency.hpp"
#include "mementomap/surt.hpp"

namespace mementomap::testing {

Zipf::Zipf(std::size_t n, double s) {
  cdf_.reserve(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), s);
    cdf_.push_back(total);
  }
  for (auto& c : cdf_) c /= total;
}

std::size_t Zipf::operator()(Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0, 1)(rng);
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
}

namespace {

const char* const kTlds[] = {"com", "org", "pt", "net", "uk", "de"};
const char* const kSubLabels[] = {"a", "b", "blog", "cdn", "m", "mail", "news", "x"};

std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::string w(len(rng), 'a');
  for (auto& c : w) c = static_cast<char>(ch(rng));
  return w;
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

FrequencyValue random_frequency(Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> n(1, 5000);
  const Modifier mods[] = {Modifier::Exact, Modifier::AtLeast, Modifier::AtMost, Modifier::Approx};
  std::uniform_int_distribution<int> m(0, 3);
  FrequencyValue f;
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0:
      return FrequencyValue{Count{0, Modifier::Exact}, std::nullopt};
    case 1:
      f.urir = Count{n(rng), mods[m(rng)]};
      return f;
    case 2:
      f.urim = Count{n(rng), mods[m(rng)]};
      f.urir = Count{n(rng), mods[m(rng)]};
      return f;
    case 3:
      f.urim = Count{n(rng), mods[m(rng)]};
      return f;
    default:
      return FrequencyValue::exact(n(rng));
  }
}

}  // namespace

std::vector<std::string> zipf_archive_keys(Rng& rng, const ArchiveShape& shape) {
  const std::size_t domain_count = std::max<std::size_t>(4, shape.keys / 40);
  std::vector<std::string> domains;
  {
    std::set<std::string> seen;
    std::uniform_int_distribution<std::size_t> tld(0, std::size(kTlds) - 1);
    while (domains.size() < domain_count) {
      std::string d = std::string(kTlds[tld(rng)]) + "," + random_word(rng, 3, 8);
      if (chance(rng, 0.02)) d += chance(rng, 0.5) ? "-x" : "_y";
      if (seen.insert(d).second) domains.push_back(std::move(d));
    }
  }
  Zipf pick_domain(domains.size(), shape.zipf_s);
  Zipf pick_label(std::size(kSubLabels), 1.0);
  Zipf pick_segment(shape.segment_fanout, shape.zipf_s);

  std::set<std::string> keys;
  const std::size_t attempts = shape.keys * 50 + 100;
  for (std::size_t a = 0; a < attempts && keys.size() < shape.keys; ++a) {
    std::string key = domains[pick_domain(rng)];
    std::size_t subs = 0;
    while (subs < shape.max_subdomains && chance(rng, subs == 0 ? 0.4 : 0.35)) ++subs;
    for (std::size_t i = 0; i < subs; ++i) {
      key.push_back(',');
      key += kSubLabels[pick_label(rng)];
    }
    if (chance(rng, 0.01)) key += ":8080";
    key += ")/";
    std::size_t depth = 0;
    while (depth < shape.max_path_depth && chance(rng, depth == 0 ? 0.85 : 0.6)) ++depth;
    for (std::size_t i = 0; i < depth; ++i) {
      if (i > 0) key.push_back('/');
      key += "s" + std::to_string(pick_segment(rng));
      if (shape.interleaved_tokens && chance(rng, 0.08)) {
        key += chance(rng, 0.5) ? ".html" : "-b";
      }
    }
    keys.insert(std::move(key));
  }
  return {keys.begin(), keys.end()};
}

std::vector<UkvsRecord> baseline_records(Rng& rng, const std::vector<std::string>& keys,
                                         std::uint64_t max_urims) {
  std::uniform_int_distribution<std::uint64_t> n(1, max_urims);
  std::vector<UkvsRecord> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back({SurtKey(k), FrequencyValue::exact(n(rng)), {}});
  return out;
}

std::vector<UkvsRecord> random_tree_records(Rng& rng, std::size_t max_keys) {
  static const char* const hosts[] = {"com,a", "com,b", "org,c", "org,c,x", "org,c,y",
                                      "org,c,y,z", "org,c,y,w", "pt,d"};
  static const char* const labels[] = {"x", "y", "z", "w", "v", "x-1", "x_1"};
  static const char* const segments[] = {"p", "q", "r", "s", "t", "p.x", "p-1", "u", "v"};
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_keys)(rng);
  Zipf pick_host(std::size(hosts), 0.8);
  Zipf pick_label(std::size(labels), 0.7);
  Zipf pick_segment(std::size(segments), 0.7);
  std::map<std::string, FrequencyValue> recs;
  for (std::size_t a = 0; a < n * 20 && recs.size() < n; ++a) {
    std::string key = hosts[pick_host(rng)];
    std::size_t subs = 0;
    while (subs < 3 && chance(rng, 0.3)) ++subs;
    for (std::size_t i = 0; i < subs; ++i) {
      key.push_back(',');
      key += labels[pick_label(rng)];
    }
    FrequencyValue f = chance(rng, 0.85) ? FrequencyValue::exact(std::uniform_int_distribution<
                                                                 std::uint64_t>(1, 9)(rng))
                                         : random_frequency(rng);
    if (chance(rng, 0.04)) {
      recs.emplace(key + ",*", f);
      continue;
    }
    key += ")/";
    std::size_t depth = 0;
    while (depth < 5 && chance(rng, depth == 0 ? 0.8 : 0.55)) ++depth;
    for (std::size_t i = 0; i < depth; ++i) {
      if (i > 0) key.push_back('/');
      key += segments[pick_segment(rng)];
    }
    if (chance(rng, 0.04)) key += depth == 0 ? "*" : "/*";
    recs.emplace(std::move(key), f);
  }
  std::vector<UkvsRecord> out;
  for (auto& [k, f] : recs) out.push_back({SurtKey(k), f, {}});
  return out;
}

std::vector<UkvsRecord> random_map_records(Rng& rng, std::size_t count) {
  ArchiveShape shape;
  shape.keys = count;
  shape.segment_fanout = 20;
  const auto keys = zipf_archive_keys(rng, shape);
  std::map<std::string, FrequencyValue> recs;
  for (const auto& k : keys) {
    if (recs.size() >= count) break;
    if (chance(rng, 0.1)) {
      const auto paren = k.find(')');
      const auto slash = k.rfind('/');
      if (chance(rng, 0.5) && slash > paren + 1) {
        recs.emplace(k.substr(0, slash) + "/*", random_frequency(rng));
      } else {
        recs.emplace(k.substr(0, paren) + ",*", random_frequency(rng));
      }
    } else {
      recs.emplace(k, random_frequency(rng));
    }
  }
  std::vector<UkvsRecord> out;
  for (auto& [k, f] : recs) out.push_back({SurtKey(k), f, {}});
  return out;
}

std::string document_text(const std::vector<UkvsRecord>& records) {
  StringSink sink;
  write_document(standard_headers("2020-01-01T00:00:00Z"), records, sink);
  return sink.take();
}

std::string absent_key(Rng& rng, const std::vector<std::string>& sorted_keys) {
  std::uniform_int_distribution<std::size_t> pick(0, sorted_keys.size() - 1);
  for (;;) {
    std::string k = sorted_keys[pick(rng)];
    // Wildcard keys have no HxPx form to perturb.
    const auto close = k.find(')');
    if (close == std::string::npos || k.back() == '*') continue;
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
      case 0:
        k += k.back() == '/' ? "q" : "/q";
        break;
      case 1:
        if (k.back() >= 'a' && k.back() < 'z') {
          k.back() = static_cast<char>(k.back() + 1);
        } else {
          k += "q";
        }
        break;
      default:
        k.insert(k.find_first_of(":)"), ",zz");
        break;
    }
    if (!std::binary_search(sorted_keys.begin(), sorted_keys.end(), k)) return k;
  }
}

std::optional<FrequencyValue> linear_find(const std::vector<UkvsRecord>& records,
                                          std::string_view key) {
  for (const auto& r : records) {
    if (r.key.text() == key) return r.frequency;
  }
  return std::nullopt;
}

std::optional<UkvsRecord> linear_lookup(const std::vector<UkvsRecord>& records,
                                        const CanonicalUri& uri) {
  for (const auto& k : lookup_keys(uri)) {
    for (const auto& r : records) {
      if (r.key == k) return r;
    }
  }
  return std::nullopt;
}

std::vector<std::string> data_lines(std::string_view document) {
  std::vector<std::string> out;
  StringLineSource src{std::string(document)};
  std::string_view line;
  while (src.next(line)) {
    if (!is_blank_line(line) && !is_header_line(line)) out.emplace_back(line);
  }
  return out;
}

std::uint64_t total_urims(std::string_view document) {
  std::uint64_t total = 0;
  for (const auto& line : data_lines(document)) {
    total += primary_count(parse_record_view(line).frequency);
  }
  return total;
}

SyntheticMapSource::SyntheticMapSource(std::uint64_t lines, std::uint64_t paths_per_host)
    : lines_(lines), per_host_(std::max<std::uint64_t>(paths_per_host, 1)) {}

bool SyntheticMapSource::next(std::string_view& line) {
  if (!header_done_) {
    header_done_ = true;
    line_ = "!meta {type: \"MementoMap\"}";
    line = line_;
    ++line_no_;
    return true;
  }
  if (emitted_ >= lines_) return false;
  const std::uint64_t host = emitted_ / per_host_;
  const std::uint64_t path = emitted_ % per_host_;
  char buf[96];
  const int n = std::snprintf(buf, sizeof buf, "com,h%09llu)/d%03llu/f%05llu 1",
                              static_cast<unsigned long long>(host),
                              static_cast<unsigned long long>(path / 10),
                              static_cast<unsigned long long>(path));
  line_.assign(buf, static_cast<std::size_t>(n));
  line = line_;
  ++emitted_;
  ++line_no_;
  return true;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "mementomap-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::file(std::string_view name) const {
  return (std::filesystem::path(path_) / name).string();
}

void write_text(const std::string& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("cannot write " + path);
}

}  // namespace mementomap::testing
