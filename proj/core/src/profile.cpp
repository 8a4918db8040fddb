#include "mementomap/profile.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <json.hpp>

#include "mementomap/error.hpp"
#include "mementomap/external_sort.hpp"
#include "mementomap/surt.hpp"

namespace mementomap {

namespace {

using nlohmann::json;

bool is_sep(char c) { return c == ' ' || c == '\t'; }

std::string_view take_column(std::string_view& rest) {
  std::size_t end = 0;
  while (end < rest.size() && !is_sep(rest[end])) ++end;
  std::string_view col = rest.substr(0, end);
  while (end < rest.size() && is_sep(rest[end])) ++end;
  rest.remove_prefix(end);
  return col;
}

std::string field_text(const json& meta, const char* name) {
  const auto it = meta.find(name);
  if (it == meta.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return it->dump();
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

// Streams sorted (key, count) pairs into a document, aggregating repeats.
class BaselineEmitter {
 public:
  BaselineEmitter(const GenerationOptions& options, ByteSink& sink, GenerationReport& report)
      : writer_(sink), report_(report), presorted_(options.presorted) {
    writer_.headers(options.headers.empty() ? standard_headers() : options.headers);
    if (!presorted_) {
      counter_.emplace(ExternalCounter::Options{options.memory_limit_bytes, options.temp_dir});
    }
  }

  void add(std::string_view key, std::size_t line_no) {
    ++report_.lines_kept;
    ++report_.urim_total;
    if (counter_) {
      counter_->add(key);
      return;
    }
    if (have_ && key == current_) {
      ++count_;
      return;
    }
    if (have_ && key < std::string_view(current_)) {
      throw Error(ErrorKind::UnsortedInput,
                  "derived key '" + std::string(key) + "' sorts before '" + current_ +
                      "'; drop --presorted to sort externally",
                  line_no);
    }
    flush_current();
    current_.assign(key);
    count_ = 1;
    have_ = true;
  }

  void finish(ByteSink& sink) {
    if (counter_) {
      report_.spilled_runs = counter_->spilled_runs();
      counter_->finish([&](std::string_view key, std::uint64_t count) { emit(key, count); });
    } else {
      flush_current();
    }
    sink.flush();
    report_.bytes_written = writer_.bytes_written();
  }

 private:
  void flush_current() {
    if (have_) emit(current_, count_);
    have_ = false;
  }

  void emit(std::string_view key, std::uint64_t count) {
    writer_.record(key, FrequencyValue::exact(count));
    ++report_.unique_hxpx;
  }

  DocumentWriter writer_;
  GenerationReport& report_;
  bool presorted_;
  std::optional<ExternalCounter> counter_;
  std::string current_;
  std::uint64_t count_ = 0;
  bool have_ = false;
};

void count_malformed(const GenerationOptions& options, GenerationReport& report,
                     const Error& e, std::size_t line_no) {
  if (options.strict) {
    throw Error(e.kind() == ErrorKind::MalformedUri ? ErrorKind::MalformedUri
                                                    : ErrorKind::MalformedCdxj,
                e.message(), line_no);
  }
  ++report.lines_malformed;
}

}  // namespace

CdxjLine parse_cdxj(std::string_view line, std::size_t line_no) {
  std::string_view rest = line;
  while (!rest.empty() && (is_sep(rest.back()) || rest.back() == '\r')) rest.remove_suffix(1);
  while (!rest.empty() && is_sep(rest.front())) rest.remove_prefix(1);
  CdxjLine out;
  out.surt = std::string(take_column(rest));
  out.datetime = std::string(take_column(rest));
  if (out.surt.empty() || out.datetime.empty()) {
    throw Error(ErrorKind::MalformedCdxj, "expected SURT, datetime and JSON columns", line_no);
  }
  if (out.datetime.size() > 14 ||
      !std::all_of(out.datetime.begin(), out.datetime.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::MalformedCdxj, "bad datetime '" + out.datetime + "'", line_no);
  }
  out.meta = std::string(rest);
  if (out.meta.empty()) {
    throw Error(ErrorKind::MalformedCdxj, "missing JSON block", line_no);
  }
  json meta = json::parse(out.meta, nullptr, /*allow_exceptions=*/false);
  if (meta.is_discarded() || !meta.is_object()) {
    throw Error(ErrorKind::MalformedCdxj, "JSON block is not an object", line_no);
  }
  out.url = field_text(meta, "url");
  out.status = field_text(meta, "status");
  out.mime = field_text(meta, "mime");
  return out;
}

FilterPolicy FilterPolicy::none() {
  FilterPolicy p;
  p.statuses.clear();
  p.mime_prefixes.clear();
  p.exclude_path_suffixes.clear();
  p.include_revisits = true;
  return p;
}

bool FilterPolicy::accepts(const CdxjLine& line, std::string_view hxpx_key) const {
  for (const auto& suffix : exclude_path_suffixes) {
    if (hxpx_key.size() > suffix.size() && hxpx_key.ends_with(suffix) &&
        hxpx_key[hxpx_key.size() - suffix.size() - 1] == '/') {
      return false;
    }
  }
  if (line.mime == "warc/revisit") return include_revisits;
  if (!statuses.empty() && !statuses.contains(line.status)) return false;
  if (!mime_prefixes.empty() &&
      std::none_of(mime_prefixes.begin(), mime_prefixes.end(),
                   [&](const std::string& p) { return istarts_with(line.mime, p); })) {
    return false;
  }
  return true;
}

std::string GenerationReport::to_json() const {
  json j = {{"lines_in", lines_in},           {"lines_kept", lines_kept},
            {"lines_filtered", lines_filtered}, {"lines_malformed", lines_malformed},
            {"unique_hxpx", unique_hxpx},       {"urim_total", urim_total},
            {"bytes_written", bytes_written},   {"spilled_runs", spilled_runs}};
  return j.dump();
}

GenerationReport generate(LineSource& cdxj, const GenerationOptions& options, ByteSink& sink) {
  GenerationReport report;
  BaselineEmitter emitter(options, sink, report);
  std::string_view line;
  while (cdxj.next(line)) {
    if (is_blank_line(line) || line.front() == '!') continue;
    ++report.lines_in;
    const std::size_t line_no = cdxj.line_number();
    HxPxKey key;
    CdxjLine rec;
    try {
      rec = parse_cdxj(line, line_no);
      key = rec.url.empty() ? hxpx_from_surt(rec.surt) : hxpx_key(rec.url);
    } catch (const Error& e) {
      count_malformed(options, report, e, line_no);
      continue;
    }
    if (!options.policy.accepts(rec, key.key.text())) {
      ++report.lines_filtered;
      continue;
    }
    emitter.add(key.key.text(), line_no);
  }
  emitter.finish(sink);
  return report;
}

GenerationReport generate_from_urilist(LineSource& uris, const GenerationOptions& options,
                                       ByteSink& sink) {
  GenerationReport report;
  BaselineEmitter emitter(options, sink, report);
  std::string_view line;
  while (uris.next(line)) {
    if (is_blank_line(line)) continue;
    ++report.lines_in;
    std::string_view rest = line;
    while (!rest.empty() && is_sep(rest.front())) rest.remove_prefix(1);
    HxPxKey key;
    try {
      key = hxpx_key(take_column(rest));
    } catch (const Error& e) {
      count_malformed(options, report, e, uris.line_number());
      continue;
    }
    emitter.add(key.key.text(), uris.line_number());
  }
  emitter.finish(sink);
  return report;
}

}  // namespace mementomap
