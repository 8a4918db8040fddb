#include "mementomap/evaluator.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "mementomap/error.hpp"
#include "mementomap/ukvs.hpp"

namespace mementomap {

namespace {

std::string_view column(std::string_view line, std::size_t index) {
  std::size_t pos = 0;
  for (std::size_t c = 0;; ++c) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (c == index) return line.substr(pos, end - pos);
    if (end == pos) return {};
    pos = end;
  }
}

double ratio(std::uint64_t num, std::uint64_t den, double if_zero) {
  return den == 0 ? if_zero : static_cast<double>(num) / static_cast<double>(den);
}

std::string weight_text(double w) {
  if (std::isinf(w)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", w);
  return buf;
}

}  // namespace

GroundTruth GroundTruth::from_uri_list(LineSource& uris) {
  GroundTruth t;
  std::unordered_set<std::string> urirs;
  std::string_view line;
  while (uris.next(line)) {
    if (is_blank_line(line)) continue;
    CanonicalUri c;
    try {
      c = canonicalize(column(line, 0));
    } catch (const Error&) {
      continue;
    }
    t.present_keys.insert(hxpx_key(c).key.text());
    urirs.insert(serialize_surt(c));
  }
  t.urir_count = urirs.size();
  return t;
}

GroundTruth GroundTruth::from_map(LineSource& map) {
  GroundTruth t;
  DocumentReader reader(map, ParseMode::Lenient);
  RecordView rec;
  std::uint64_t urir_sum = 0;
  bool all_have_urir = true;
  while (reader.next(rec)) {
    if (SurtKey::is_wildcard(rec.key)) continue;
    t.present_keys.emplace(rec.key);
    if (rec.frequency.urir) {
      urir_sum += rec.frequency.urir->value;
    } else {
      all_have_urir = false;
    }
  }
  t.urir_count = (all_have_urir && !t.present_keys.empty()) ? urir_sum : t.present_keys.size();
  return t;
}

GroundTruth GroundTruth::load(const std::string& path) {
  bool is_map = false;
  {
    FileLineSource probe(path);
    std::string_view line;
    while (probe.next(line)) {
      if (is_blank_line(line)) continue;
      if (is_header_line(line)) {
        is_map = true;
      } else {
        const auto key = column(line, 0);
        const auto freq = column(line, 1);
        if (!freq.empty() && key.find(')') != std::string_view::npos &&
            key.find("://") == std::string_view::npos) {
          try {
            parse_frequency(freq);
            is_map = true;
          } catch (const Error&) {
          }
        }
      }
      break;
    }
  }
  FileLineSource source(path);
  return is_map ? from_map(source) : from_uri_list(source);
}

std::string EvalReport::to_json() const {
  nlohmann::json j = {{"relative_cost", relative_cost}, {"accuracy", accuracy},
                      {"recall", recall},               {"precision", precision},
                      {"tp", tp},                       {"tn", tn},
                      {"fp", fp},                       {"fn", fn},
                      {"lookups", lookups},             {"map_keys", map_keys},
                      {"urir_count", urir_count},       {"malformed", malformed}};
  return j.dump();
}

std::string EvalReport::to_table() const {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << "relative_cost " << relative_cost << '\n'
    << "accuracy      " << accuracy << '\n'
    << "recall        " << recall << '\n'
    << "precision     " << precision << '\n'
    << "                predicted+  predicted-\n"
    << "actual+         " << tp << "  " << fn << '\n'
    << "actual-         " << fp << "  " << tn << '\n'
    << "lookups " << lookups << ", map keys " << map_keys << ", URI-Rs " << urir_count
    << ", malformed " << malformed << '\n';
  return s.str();
}

std::uint64_t count_map_keys(LineSource& map) {
  std::uint64_t n = 0;
  std::string_view line;
  while (map.next(line)) {
    if (!is_blank_line(line) && !is_header_line(line)) ++n;
  }
  return n;
}

EvalReport evaluate(const MapIndex& map, std::uint64_t map_keys, LineSource& log,
                    const GroundTruth& truth, const EvalOptions& options) {
  EvalReport r;
  r.map_keys = map_keys;
  r.urir_count = options.urir_count.value_or(truth.urir_count);
  std::unordered_set<std::string> seen;
  std::string_view line;
  while (log.next(line)) {
    if (is_blank_line(line)) continue;
    CanonicalUri c;
    try {
      c = canonicalize(column(line, 0));
    } catch (const Error&) {
      ++r.malformed;
      continue;
    }
    if (!options.raw && !seen.insert(serialize_surt(c)).second) continue;
    const bool actual = truth.contains(hxpx_key(c).key.text());
    const auto hit = map.lookup(c);
    const bool predicted = hit && hit->disposition() == Disposition::Present;
    if (actual && predicted) ++r.tp;
    else if (actual) ++r.fn;
    else if (predicted) ++r.fp;
    else ++r.tn;
  }
  r.lookups = r.tp + r.tn + r.fp + r.fn;
  if (r.lookups == 0) throw Error(ErrorKind::EmptyLog, "lookup log has no usable URIs");
  r.accuracy = ratio(r.tp + r.tn, r.lookups, 0);
  r.recall = ratio(r.tp, r.tp + r.fn, 1.0);
  r.precision = ratio(r.tp, r.tp + r.fp, 1.0);
  r.relative_cost = ratio(r.map_keys, r.urir_count, 0);
  return r;
}

std::size_t OverlapMatrix::bucket(std::uint64_t value) noexcept {
  std::size_t b = 0;
  while (value > 0) {
    ++b;
    value /= 10;
  }
  return b;
}

std::string OverlapMatrix::bucket_label(std::size_t bucket) {
  static const char* names[] = {"Zero", "Ones", "Tens", "Hundreds", "Thousands"};
  if (bucket < 5) return names[bucket];
  return "1E" + std::to_string(bucket - 1);
}

std::string OverlapMatrix::to_tsv() const {
  std::string out = "archived\\accessed";
  const std::size_t n = cells.size();
  for (std::size_t j = 0; j < n; ++j) out += '\t' + bucket_label(j);
  out.push_back('\n');
  for (std::size_t i = 0; i < n; ++i) {
    out += bucket_label(i);
    for (std::size_t j = 0; j < n; ++j) {
      out.push_back('\t');
      out += (i == 0 && j == 0) ? "NA" : std::to_string(cells[i][j]);
    }
    out.push_back('\n');
  }
  return out;
}

OverlapMatrix overlap_matrix(const UriCounts& archive, const UriCounts& access) {
  std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>> joined;
  for (const auto& [uri, c] : archive) joined[uri].first += c;
  for (const auto& [uri, c] : access) joined[uri].second += c;
  std::size_t size = 1;
  for (const auto& [uri, p] : joined) {
    size = std::max({size, OverlapMatrix::bucket(p.first) + 1, OverlapMatrix::bucket(p.second) + 1});
  }
  OverlapMatrix m;
  m.cells.assign(size, std::vector<std::uint64_t>(size, 0));
  for (const auto& [uri, p] : joined) {
    const auto i = OverlapMatrix::bucket(p.first);
    const auto j = OverlapMatrix::bucket(p.second);
    if (i == 0 && j == 0) continue;
    ++m.cells[i][j];
  }
  return m;
}

UriCounts load_uri_counts(LineSource& lines, std::uint64_t* malformed) {
  UriCounts out;
  std::string_view line;
  while (lines.next(line)) {
    if (is_blank_line(line)) continue;
    const auto uri = column(line, 0);
    const auto count_text = column(line, 1);
    std::uint64_t count = 1;
    try {
      if (!count_text.empty()) {
        std::size_t used = 0;
        count = std::stoull(std::string(count_text), &used);
        if (used != count_text.size()) throw Error(ErrorKind::MalformedLine, "bad count");
      }
      out.emplace_back(surtify(uri).text(), count);
    } catch (const std::exception&) {
      if (malformed) ++*malformed;
    }
  }
  return out;
}

std::vector<SweepStep> plan_sweep(std::vector<double> weights) {
  for (double w : weights) {
    if (!(w >= 0) || std::isinf(w)) {
      throw Error(ErrorKind::InvalidArgument, "sweep weights must be finite and non-negative");
    }
  }
  std::sort(weights.begin(), weights.end(), std::greater<>());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  std::vector<SweepStep> plan;
  const std::size_t n = weights.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      SweepStep s{weights[i], weights[j], -1};
      if (j > 0) {
        s.input = static_cast<std::ptrdiff_t>(i * n + j - 1);
      } else if (i > 0) {
        s.input = static_cast<std::ptrdiff_t>((i - 1) * n);
      }
      plan.push_back(s);
    }
  }
  return plan;
}

std::string sweep_map_name(double wh, double wp) {
  return "H" + weight_text(wh) + "P" + weight_text(wp);
}

std::string SweepResult::summary_tsv() const {
  std::string out =
      "Input\tWh\tWp\tLines\tSize (bytes)\tGzipped (bytes)\tRollups\tTime (sec)\tRelCost\t"
      "Accuracy\tRecall\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.input + '\t' + weight_text(r.wh) + '\t' + weight_text(r.wp) + '\t' +
           std::to_string(r.lines) + '\t' + std::to_string(r.size_bytes) + '\t' +
           std::to_string(r.gzipped_bytes) + '\t' + std::to_string(r.rollups) + '\t';
    std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
    out += buf;
    if (r.eval) {
      std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f\t%.4f", r.eval->relative_cost,
                    r.eval->accuracy, r.eval->recall);
      out += buf;
    } else {
      out += "\t-\t-\t-";
    }
    out.push_back('\n');
  }
  return out;
}

std::uint64_t gzip_size(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorKind::IoFailure, "deflateInit2 failed");
  }
  std::uint64_t total = 0;
  char out[1 << 15];
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(out);
    zs.avail_out = sizeof out;
    rc = deflate(&zs, Z_FINISH);
    total += sizeof out - zs.avail_out;
  } while (rc == Z_OK || (rc == Z_BUF_ERROR && zs.avail_out == 0));
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorKind::IoFailure, "deflate failed");
  return total;
}

SweepResult run_sweep(const std::filesystem::path& baseline, const std::filesystem::path& out_dir,
                      const SweepOptions& options) {
  std::filesystem::create_directories(out_dir);
  SweepResult result;
  if (options.model) {
    result.model = *options.model;
  } else {
    FileLineSource src(baseline.string());
    result.model = CutoffModel::from_stats(depth_stats(src, options.caps));
  }

  auto evaluate_map = [&](const std::filesystem::path& path,
                          std::uint64_t keys) -> std::optional<EvalReport> {
    if (!options.truth || !options.log_text) return std::nullopt;
    const MapIndex index = MapIndex::open(path);
    StringLineSource log(*options.log_text);
    return evaluate(index, keys, log, *options.truth, options.eval);
  };

  {
    SweepRow base;
    base.input = "baseline";
    base.map = baseline;
    const std::string content = read_file(baseline);
    StringLineSource src(content);
    base.lines = count_map_keys(src);
    base.size_bytes = content.size();
    base.gzipped_bytes = gzip_size(content);
    base.eval = evaluate_map(baseline, base.lines);
    result.rows.push_back(std::move(base));
  }

  const auto plan = plan_sweep(options.weights);
  std::vector<std::filesystem::path> outputs;
  for (const auto& step : plan) {
    const std::filesystem::path input = step.input < 0 ? baseline : outputs[step.input];
    const std::filesystem::path output = out_dir / (sweep_map_name(step.wh, step.wp) + ".ukvs");
    auto params = derive_cutoffs(result.model, step.wh, step.wp, options.caps);
    params.updated_at = utc_timestamp();

    CompactionReport rep;
    {
      FileLineSource in(input.string());
      FileSink sink(output);
      rep = compact(in, sink, params);
    }
    SweepRow row;
    row.input = step.input < 0 ? "baseline"
                               : sweep_map_name(plan[step.input].wh, plan[step.input].wp);
    row.wh = step.wh;
    row.wp = step.wp;
    row.lines = rep.lines_out;
    row.size_bytes = rep.bytes_out;
    row.gzipped_bytes = gzip_size(read_file(output));
    row.rollups = rep.rollups;
    row.seconds = rep.wall_seconds;
    row.eval = evaluate_map(output, rep.lines_out);
    row.map = output;
    result.rows.push_back(std::move(row));
    outputs.push_back(output);
  }

  FileSink summary(out_dir / "summary.tsv");
  summary.write(result.summary_tsv());
  summary.flush();
  return result;
}

}  // namespace mementomap
