#include "mementomap/lookup.hpp"

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

constexpr std::size_t kChunk = 4096;

std::string_view first_column(std::string_view line) {
  std::size_t b = 0;
  while (b < line.size() && (line[b] == ' ' || line[b] == '\t')) ++b;
  std::size_t e = b;
  while (e < line.size() && line[e] != ' ' && line[e] != '\t' && line[e] != '\r') ++e;
  return line.substr(b, e - b);
}

}  // namespace

std::string_view to_string(Disposition d) noexcept {
  switch (d) {
    case Disposition::Present: return "present";
    case Disposition::AbsentExplicit: return "absent-explicit";
    case Disposition::AbsentNoMatch: return "absent-nomatch";
  }
  return "?";
}

Disposition LookupResult::disposition() const noexcept {
  return is_blacklist(frequency) ? Disposition::AbsentExplicit : Disposition::Present;
}

MapIndex::MapIndex(std::unique_ptr<ByteSource> source, ParseMode mode)
    : source_(std::move(source)), mode_(mode) {}

MapIndex MapIndex::open(const std::filesystem::path& path, ParseMode mode) {
  return MapIndex(std::make_unique<FileSource>(path), mode);
}

MapIndex MapIndex::from_string(std::string content, ParseMode mode) {
  return MapIndex(std::make_unique<MemorySource>(std::move(content)), mode);
}

bool MapIndex::line_at_or_after(std::uint64_t pos, std::uint64_t& start,
                                std::string& line) const {
  const std::uint64_t size = source_->size();
  if (const auto v = source_->view()) {
    if (pos > 0) {
      const auto nl = v->find('\n', pos - 1);
      if (nl == std::string_view::npos) return false;
      pos = nl + 1;
    }
    if (pos >= size) return false;
    start = pos;
    const auto end = v->find('\n', pos);
    line.assign(v->substr(pos, end == std::string_view::npos ? v->npos : end - pos));
    return true;
  }
  char buf[kChunk];
  // Skip the partial line unless `pos` is already a line start.
  start = pos;
  if (pos > 0) {
    std::uint64_t scan = pos - 1;
    bool found = false;
    while (!found && scan < size) {
      const std::size_t n = source_->read_at(scan, std::span<char>(buf, kChunk));
      if (n == 0) break;
      for (std::size_t i = 0; i < n; ++i) {
        if (buf[i] == '\n') {
          start = scan + i + 1;
          found = true;
          break;
        }
      }
      scan += n;
    }
    if (!found) return false;
  }
  if (start >= size) return false;

  line.clear();
  std::uint64_t at = start;
  while (at < size) {
    const std::size_t n = source_->read_at(at, std::span<char>(buf, kChunk));
    if (n == 0) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (buf[i] == '\n') {
        line.append(buf, i);
        return true;
      }
    }
    line.append(buf, n);
    at += n;
  }
  return true;
}

std::optional<Match> MapIndex::bin_search(std::string_view key, std::size_t* probes) const {
  std::uint64_t lo = 0;
  std::uint64_t hi = source_->size();
  std::string line;
  std::uint64_t start = 0;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (!line_at_or_after(mid, start, line)) {
      hi = mid;
      continue;
    }
    if (probes) ++*probes;
    const std::string_view col = first_column(line);
    // Header and blank lines sort below every key.
    const int cmp = (col.empty() || col.front() == '!') ? -1 : col.compare(key);
    if (cmp == 0) {
      RecordView rec;
      try {
        rec = parse_record_view(line);
      } catch (const Error& e) {
        if (mode_ == ParseMode::Strict) {
          throw Error(ErrorKind::MalformedLine,
                      e.message() + " (at byte offset " + std::to_string(start) + ")");
        }
        ++malformed_;
        return std::nullopt;
      }
      return Match{SurtKey(std::string(rec.key)), rec.frequency};
    }
    if (cmp < 0) {
      lo = start + line.size() + 1;
    } else {
      hi = mid;
    }
  }
  return std::nullopt;
}

std::optional<LookupResult> MapIndex::lookup(const CanonicalUri& uri) const {
  std::size_t probes = 0;
  for (const auto& key : lookup_keys(uri)) {
    if (auto m = bin_search(key.text(), &probes)) {
      return LookupResult{std::move(m->key), m->frequency, probes};
    }
  }
  return std::nullopt;
}

std::optional<LookupResult> MapIndex::lookup(std::string_view uri) const {
  return lookup(canonicalize(uri));
}

std::string format_batch_tsv(const BatchEntry& e) {
  std::string out = e.uri;
  out.push_back('\t');
  if (!e.error.empty()) {
    out += "error\t-\t-";
    return out;
  }
  out += to_string(e.disposition);
  out.push_back('\t');
  out += e.matched_key ? e.matched_key->text() : "-";
  out.push_back('\t');
  out += e.frequency ? serialize_frequency(*e.frequency) : "-";
  return out;
}

void batch_lookup(const MapIndex& map, LineSource& uris,
                  const std::function<void(const BatchEntry&)>& sink) {
  std::string_view line;
  while (uris.next(line)) {
    if (is_blank_line(line)) continue;
    BatchEntry e;
    e.uri = std::string(first_column(line));
    try {
      if (auto r = map.lookup(e.uri)) {
        e.disposition = r->disposition();
        e.matched_key = std::move(r->matched_key);
        e.frequency = r->frequency;
      }
    } catch (const Error& err) {
      e.error = err.what();
    }
    sink(e);
  }
}

}  // namespace mementomap
