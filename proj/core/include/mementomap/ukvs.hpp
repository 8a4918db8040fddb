#pragma once

// UKVS line format used by MementoMap files.
//
//   header  = "!" name [ SP body ]          ; body kept verbatim
//   record  = key SP frequency [ SP extra ] ; extra is an opaque single-line JSON block
//
// Input columns may be separated by any run of spaces and tabs; output always
// uses a single space. Data records are sorted byte-wise with unique keys.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mementomap/frequency.hpp"
#include "mementomap/io.hpp"
#include "mementomap/surt.hpp"

namespace mementomap {

struct UkvsHeader {
  std::string name;
  std::string body;

  friend bool operator==(const UkvsHeader&, const UkvsHeader&) = default;
};

struct UkvsRecord {
  SurtKey key;
  FrequencyValue frequency;
  std::string extra;  // empty when absent

  friend bool operator==(const UkvsRecord&, const UkvsRecord&) = default;
};

/// Non-owning parse result for hot loops; views point into the input line.
struct RecordView {
  std::string_view key;
  FrequencyValue frequency;
  std::string_view extra;

  UkvsRecord to_record() const;
};

enum class ParseMode { Strict, Lenient };

using UkvsLine = std::variant<UkvsHeader, UkvsRecord>;

/// Throws MalformedLine (or MalformedFrequency wrapped as MalformedLine) with
/// `line_no` attached.
UkvsLine parse_record(std::string_view line, std::size_t line_no = 0);
UkvsHeader parse_header(std::string_view line, std::size_t line_no = 0);
RecordView parse_record_view(std::string_view line, std::size_t line_no = 0);

inline bool is_header_line(std::string_view line) noexcept {
  return !line.empty() && line.front() == '!';
}
bool is_blank_line(std::string_view line) noexcept;

std::string serialize(const UkvsHeader& h);
std::string serialize(const UkvsRecord& r);
void append_record(std::string& out, std::string_view key, const FrequencyValue& f,
                   std::string_view extra = {});

/// Current UTC time as ISO-8601 ("2018-09-03T13:27:52Z").
std::string utc_timestamp();

/// The header set this tool writes on every MementoMap it produces.
std::vector<UkvsHeader> standard_headers(const std::string& updated_at = utc_timestamp(),
                                         const std::string& archive_id = {});

/// Replaces (or appends) the `!meta {updated_at: ...}` header.
void set_updated_at(std::vector<UkvsHeader>& headers, const std::string& updated_at);

/// Serializes headers then records, enforcing strictly increasing keys.
class DocumentWriter {
 public:
  explicit DocumentWriter(ByteSink& sink) : sink_(sink) {}

  /// Headers must precede every record.
  void header(const UkvsHeader& h);
  void headers(const std::vector<UkvsHeader>& hs);
  /// Throws UnsortedInput if key <= previous key.
  void record(std::string_view key, const FrequencyValue& f, std::string_view extra = {});
  void record(const UkvsRecord& r) { record(r.key.text(), r.frequency, r.extra); }

  std::uint64_t bytes_written() const noexcept { return bytes_; }
  std::uint64_t records_written() const noexcept { return records_; }

 private:
  ByteSink& sink_;
  std::string line_;
  std::string previous_;
  std::uint64_t bytes_ = 0;
  std::uint64_t records_ = 0;
};

/// Returns bytes written.
std::uint64_t write_document(const std::vector<UkvsHeader>& headers,
                             const std::vector<UkvsRecord>& records, ByteSink& sink);

struct ParseDiagnostic {
  std::size_t line = 0;
  std::string message;
};

/// Pull reader over a MementoMap. Headers are read eagerly on construction.
/// Strict mode throws on malformed lines, misplaced headers, unsorted or
/// duplicate keys. Lenient mode skips malformed lines and merges duplicate
/// adjacent keys with merge_duplicate(); unsorted keys still throw.
class DocumentReader {
 public:
  DocumentReader(LineSource& source, ParseMode mode = ParseMode::Strict,
                 bool check_order = true);

  const std::vector<UkvsHeader>& headers() const noexcept { return headers_; }
  /// The view is valid until the next call.
  bool next(RecordView& out);

  std::size_t line_number() const noexcept { return source_.line_number(); }
  std::uint64_t lines_read() const noexcept { return lines_; }
  std::uint64_t malformed() const noexcept { return malformed_; }
  const std::vector<ParseDiagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  bool pull(int index, RecordView& out);
  void fail(std::size_t line, const std::string& message);

  LineSource& source_;
  ParseMode mode_;
  bool check_order_;
  bool in_headers_ = true;
  std::vector<UkvsHeader> headers_;
  // Two line buffers used alternately so the returned view survives one pull.
  std::string buffers_[2];
  std::optional<RecordView> lookahead_;
  int lookahead_index_ = 0;
  std::string previous_key_;
  bool have_previous_ = false;
  std::uint64_t lines_ = 0;
  std::uint64_t malformed_ = 0;
  std::vector<ParseDiagnostic> diags_;
};

struct MementoMapDocument {
  std::vector<UkvsHeader> headers;
  std::vector<UkvsRecord> records;
};

MementoMapDocument read_document(LineSource& source, ParseMode mode = ParseMode::Strict);
MementoMapDocument read_document(const std::string& path, ParseMode mode = ParseMode::Strict);

/// Union of sorted documents; equal keys combine with merge_duplicate().
/// Headers are taken from the first document.
MementoMapDocument merge_documents(const std::vector<MementoMapDocument>& docs);

}  // namespace mementomap
