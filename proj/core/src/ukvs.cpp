#include "mementomap/ukvs.hpp"

#include <algorithm>
#include <ctime>
#include <map>

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

constexpr std::size_t kMaxDiagnostics = 1000;

bool is_sep(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_sep(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_sep(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits off the first column; `rest` starts at the next non-separator.
std::string_view take_column(std::string_view& rest) {
  std::size_t end = 0;
  while (end < rest.size() && !is_sep(rest[end])) ++end;
  std::string_view col = rest.substr(0, end);
  while (end < rest.size() && is_sep(rest[end])) ++end;
  rest.remove_prefix(end);
  return col;
}

}  // namespace

UkvsRecord RecordView::to_record() const {
  return UkvsRecord{SurtKey(std::string(key)), frequency, std::string(extra)};
}

bool is_blank_line(std::string_view line) noexcept {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

UkvsHeader parse_header(std::string_view line, std::size_t line_no) {
  std::string_view rest = trim(line);
  if (rest.empty() || rest.front() != '!') {
    throw Error(ErrorKind::MalformedLine, "header must start with '!'", line_no);
  }
  rest.remove_prefix(1);
  const std::string_view name = take_column(rest);
  if (name.empty()) throw Error(ErrorKind::MalformedLine, "empty header name", line_no);
  return UkvsHeader{std::string(name), std::string(rest)};
}

RecordView parse_record_view(std::string_view line, std::size_t line_no) {
  std::string_view rest = trim(line);
  RecordView out;
  out.key = take_column(rest);
  const std::string_view freq = take_column(rest);
  if (out.key.empty() || freq.empty()) {
    throw Error(ErrorKind::MalformedLine, "expected key and frequency columns", line_no);
  }
  try {
    SurtKey::validate(out.key);
    out.frequency = parse_frequency(freq);
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedLine, e.what(), line_no);
  }
  out.extra = rest;
  return out;
}

UkvsLine parse_record(std::string_view line, std::size_t line_no) {
  if (is_header_line(trim(line))) return parse_header(line, line_no);
  return parse_record_view(line, line_no).to_record();
}

std::string serialize(const UkvsHeader& h) {
  std::string out = "!" + h.name;
  if (!h.body.empty()) {
    out.push_back(' ');
    out += h.body;
  }
  return out;
}

void append_record(std::string& out, std::string_view key, const FrequencyValue& f,
                   std::string_view extra) {
  out.append(key);
  out.push_back(' ');
  append_frequency(out, f);
  if (!extra.empty()) {
    out.push_back(' ');
    out.append(extra);
  }
}

std::string serialize(const UkvsRecord& r) {
  std::string out;
  append_record(out, r.key.text(), r.frequency, r.extra);
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<UkvsHeader> standard_headers(const std::string& updated_at,
                                         const std::string& archive_id) {
  std::vector<UkvsHeader> h;
  h.push_back({"context", R"(["https://git.io/mementomap"])"});
  if (!archive_id.empty()) h.push_back({"id", "{uri: \"" + archive_id + "\"}"});
  h.push_back({"fields", R"({keys: ["surt"], values: ["frequency"]})"});
  h.push_back({"meta", R"({type: "MementoMap"})"});
  h.push_back({"meta", "{updated_at: \"" + updated_at + "\"}"});
  return h;
}

void set_updated_at(std::vector<UkvsHeader>& headers, const std::string& updated_at) {
  const std::string body = "{updated_at: \"" + updated_at + "\"}";
  for (auto& h : headers) {
    if (h.name == "meta" && h.body.find("updated_at") != std::string::npos) {
      h.body = body;
      return;
    }
  }
  headers.push_back({"meta", body});
}

void DocumentWriter::header(const UkvsHeader& h) {
  if (records_ > 0) {
    throw Error(ErrorKind::InvalidArgument, "headers must precede data records");
  }
  line_ = serialize(h);
  line_.push_back('\n');
  sink_.write(line_);
  bytes_ += line_.size();
}

void DocumentWriter::headers(const std::vector<UkvsHeader>& hs) {
  for (const auto& h : hs) header(h);
}

void DocumentWriter::record(std::string_view key, const FrequencyValue& f,
                            std::string_view extra) {
  if (records_ > 0 && key <= std::string_view(previous_)) {
    throw Error(ErrorKind::UnsortedInput,
                "key '" + std::string(key) + "' does not sort after '" + previous_ + "'");
  }
  previous_.assign(key);
  line_.clear();
  append_record(line_, key, f, extra);
  line_.push_back('\n');
  sink_.write(line_);
  bytes_ += line_.size();
  ++records_;
}

std::uint64_t write_document(const std::vector<UkvsHeader>& headers,
                             const std::vector<UkvsRecord>& records, ByteSink& sink) {
  DocumentWriter w(sink);
  w.headers(headers);
  for (const auto& r : records) w.record(r);
  sink.flush();
  return w.bytes_written();
}

DocumentReader::DocumentReader(LineSource& source, ParseMode mode, bool check_order)
    : source_(source), mode_(mode), check_order_(check_order) {
  RecordView first;
  if (pull(0, first)) {
    lookahead_ = first;
    lookahead_index_ = 0;
  }
}

void DocumentReader::fail(std::size_t line, const std::string& message) {
  if (mode_ == ParseMode::Strict) throw Error(ErrorKind::MalformedLine, message, line);
  ++malformed_;
  if (diags_.size() < kMaxDiagnostics) diags_.push_back({line, message});
}

bool DocumentReader::pull(int index, RecordView& out) {
  std::string_view line;
  while (source_.next(line)) {
    ++lines_;
    const std::size_t line_no = source_.line_number();
    if (is_blank_line(line)) continue;
    if (is_header_line(line)) {
      if (!in_headers_) {
        fail(line_no, "header line after data lines");
        continue;
      }
      try {
        headers_.push_back(parse_header(line, line_no));
      } catch (const Error& e) {
        fail(line_no, e.message());
      }
      continue;
    }
    in_headers_ = false;
    std::string& buf = buffers_[index];
    buf.assign(line);
    try {
      out = parse_record_view(buf, line_no);
    } catch (const Error& e) {
      fail(line_no, e.message());
      continue;
    }
    if (check_order_ && have_previous_) {
      const int cmp = out.key.compare(previous_key_);
      if (cmp < 0) {
        throw Error(ErrorKind::UnsortedInput,
                    "key '" + std::string(out.key) + "' sorts before '" + previous_key_ + "'",
                    line_no);
      }
      if (cmp == 0 && mode_ == ParseMode::Strict) {
        throw Error(ErrorKind::UnsortedInput, "duplicate key '" + previous_key_ + "'", line_no);
      }
    }
    previous_key_.assign(out.key);
    have_previous_ = true;
    return true;
  }
  return false;
}

bool DocumentReader::next(RecordView& out) {
  if (!lookahead_) return false;
  RecordView current = *lookahead_;
  const int index = lookahead_index_;
  lookahead_.reset();

  RecordView following;
  const int other = 1 - index;
  while (pull(other, following)) {
    if (following.key != current.key) {
      lookahead_ = following;
      lookahead_index_ = other;
      break;
    }
    // Only reachable in lenient mode; strict mode throws on duplicates.
    current.frequency = merge_duplicate(current.frequency, following.frequency);
  }
  out = current;
  return true;
}

MementoMapDocument read_document(LineSource& source, ParseMode mode) {
  DocumentReader reader(source, mode);
  MementoMapDocument doc;
  RecordView r;
  while (reader.next(r)) doc.records.push_back(r.to_record());
  doc.headers = reader.headers();
  return doc;
}

MementoMapDocument read_document(const std::string& path, ParseMode mode) {
  FileLineSource source(path);
  return read_document(source, mode);
}

MementoMapDocument merge_documents(const std::vector<MementoMapDocument>& docs) {
  MementoMapDocument out;
  if (!docs.empty()) out.headers = docs.front().headers;
  std::map<std::string, UkvsRecord, std::less<>> merged;
  for (const auto& d : docs) {
    for (const auto& r : d.records) {
      auto [it, inserted] = merged.try_emplace(r.key.text(), r);
      if (!inserted) it->second.frequency = merge_duplicate(it->second.frequency, r.frequency);
    }
  }
  out.records.reserve(merged.size());
  for (auto& [k, r] : merged) out.records.push_back(std::move(r));
  return out;
}

}  // namespace mementomap
