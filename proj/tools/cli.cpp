#include "cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mementomap/analytics.hpp"
#include "mementomap/compactor.hpp"
#include "mementomap/discovery.hpp"
#include "mementomap/error.hpp"
#include "mementomap/evaluator.hpp"
#include "mementomap/io.hpp"
#include "mementomap/lookup.hpp"
#include "mementomap/profile.hpp"
#include "mementomap/ukvs.hpp"

namespace mementomap::cli {

namespace {

using nlohmann::json;

class OStreamSink final : public ByteSink {
 public:
  explicit OStreamSink(std::ostream& os) : os_(os) {}
  void write(std::string_view bytes) override {
    os_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os_) throw Error(ErrorKind::SinkFailure, "write to output stream failed");
  }
  void flush() override { os_.flush(); }

 private:
  std::ostream& os_;
};

struct Config {
  DepthCaps caps;
  std::optional<std::vector<double>> host_cutoffs;
  std::optional<std::vector<double>> path_cutoffs;
  std::optional<std::vector<double>> weights;
};

// null stands for "never roll up".
std::vector<double> cutoff_array(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (v.is_null()) {
      out.push_back(kNeverRollUp);
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw Error(ErrorKind::InvalidArgument, std::string(what) + " entries must be numbers or null");
    }
  }
  return out;
}

json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
}

void read_cutoff_tables(const json& j, Config& c) {
  if (j.contains("host")) c.host_cutoffs = cutoff_array(j["host"], "host cutoffs");
  if (j.contains("path")) c.path_cutoffs = cutoff_array(j["path"], "path cutoffs");
}

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  const json j = load_json(path);
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, path + ": config must be an object");
  if (j.contains("caps")) {
    const auto& caps = j["caps"];
    c.caps.max_host_depth = caps.value("max_host_depth", c.caps.max_host_depth);
    c.caps.max_path_depth = caps.value("max_path_depth", c.caps.max_path_depth);
  }
  if (j.contains("cutoffs")) read_cutoff_tables(j["cutoffs"], c);
  if (j.contains("weights")) c.weights = cutoff_array(j["weights"], "weights");
  if (c.caps.max_host_depth < 1 || c.caps.max_path_depth < 1) {
    throw Error(ErrorKind::InvalidArgument, "depth caps must be at least 1");
  }
  return c;
}

void print_report(std::ostream& os, const std::string& report_json, bool as_json) {
  if (as_json) {
    os << report_json << '\n';
    return;
  }
  const json j = json::parse(report_json);
  for (const auto& [k, v] : j.items()) {
    os << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
}

bool use_color(const std::ostream& err) {
  return &err == &std::cerr && std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO);
}

void print_error(std::ostream& err, const std::string& message) {
  if (use_color(err)) {
    err << "mementomap: \x1b[31merror\x1b[0m: " << message << '\n';
  } else {
    err << "mementomap: error: " << message << '\n';
  }
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::SinkNotSeekable:
    case ErrorKind::GzipNotSeekable:
      return kUsage;
    default:
      return kDataError;
  }
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::unique_ptr<ByteSink> output_for(const std::string& path, std::ostream& out) {
  if (path == "-") return std::make_unique<OStreamSink>(out);
  return open_output(path);
}

// Reports share `out` unless the data stream already does.
std::ostream& report_stream(const std::string& data_path, std::ostream& out, std::ostream& err) {
  return data_path == "-" ? err : out;
}

std::string weight_json(double w) { return std::isinf(w) ? "null" : json(w).dump(); }

struct Globals {
  std::string config_path;
  std::string report = "text";
  Config config;

  bool json_report() const { return report == "json"; }
};

// --- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string input = "-";
  std::string output = "-";
  bool uri_list = false;
  bool presorted = false;
  bool strict = false;
  bool no_filter = false;
  bool include_revisits = false;
  std::vector<std::string> statuses;
  std::vector<std::string> mimes;
  std::vector<std::string> exclude_suffixes;
  std::size_t memory_mb = 1024;
  std::string temp_dir;
  std::string archive_id;
};

int cmd_generate(const GenerateArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  GenerationOptions o;
  if (a.no_filter) o.policy = FilterPolicy::none();
  if (!a.statuses.empty()) o.policy.statuses = {a.statuses.begin(), a.statuses.end()};
  if (!a.mimes.empty()) o.policy.mime_prefixes = a.mimes;
  if (!a.exclude_suffixes.empty()) o.policy.exclude_path_suffixes = a.exclude_suffixes;
  if (a.include_revisits) o.policy.include_revisits = true;
  o.presorted = a.presorted;
  o.strict = a.strict;
  o.memory_limit_bytes = a.memory_mb << 20;
  o.temp_dir = a.temp_dir;
  o.headers = standard_headers(utc_timestamp(), a.archive_id);

  FileLineSource in(a.input);
  auto sink = output_for(a.output, out);
  const GenerationReport r =
      a.uri_list ? generate_from_urilist(in, o, *sink) : generate(in, o, *sink);
  sink->flush();
  print_report(report_stream(a.output, out, err), r.to_json(), g.json_report());
  return kOk;
}

// --- compact --------------------------------------------------------------

struct CompactArgs {
  std::string input;
  std::string output;
  std::optional<double> wh;
  std::optional<double> wp;
  std::string cutoffs_path;
  std::string stats_from;
  bool lenient = false;
  bool keep_timestamp = false;
};

int cmd_compact(const CompactArgs& a, const Globals& g, std::ostream& out, std::ostream&) {
  Config c = g.config;
  if (!a.cutoffs_path.empty()) {
    Config tables;
    read_cutoff_tables(load_json(a.cutoffs_path), tables);
    c.host_cutoffs = tables.host_cutoffs;
    c.path_cutoffs = tables.path_cutoffs;
  }
  const bool have_tables = c.host_cutoffs || c.path_cutoffs;
  const bool have_weights = a.wh || a.wp;
  if (have_weights && (!a.wh || !a.wp)) throw UsageError("--wh and --wp must be given together");
  if (have_weights && !a.cutoffs_path.empty()) {
    throw UsageError("--wh/--wp and --cutoffs are mutually exclusive");
  }
  if (!have_weights && !have_tables) {
    throw UsageError("either --wh/--wp or a cutoff table is required");
  }
  if (a.output == "-" || a.output.ends_with(".gz")) {
    throw Error(ErrorKind::SinkNotSeekable,
                "compact needs a seekable, uncompressed output file, got '" + a.output + "'");
  }
  if (a.input != "-" && std::filesystem::exists(a.output) &&
      std::filesystem::equivalent(a.input, a.output)) {
    throw UsageError("input and output must be different files");
  }

  CompactionParams params;
  json extra = json::object();
  if (have_weights) {
    const std::string stats_path = a.stats_from.empty() ? a.input : a.stats_from;
    if (stats_path == "-") throw UsageError("fitting cutoffs from stdin needs --stats-from");
    FileLineSource stats_in(stats_path);
    const CutoffModel model = CutoffModel::from_stats(depth_stats(stats_in, c.caps));
    params = derive_cutoffs(model, *a.wh, *a.wp, c.caps);
    extra["model"] = json::parse(model.to_json());
  } else {
    params = fixed_cutoffs(c.host_cutoffs.value_or(std::vector<double>{}),
                           c.path_cutoffs.value_or(std::vector<double>{}), c.caps);
  }
  if (!a.keep_timestamp) params.updated_at = utc_timestamp();

  FileSink sink(a.output);
  FileLineSource in(a.input);
  const CompactionReport r =
      compact(in, sink, params, a.lenient ? ParseMode::Lenient : ParseMode::Strict);

  json report = json::parse(r.to_json());
  if (have_weights) {
    report["wh"] = json::parse(weight_json(*a.wh));
    report["wp"] = json::parse(weight_json(*a.wp));
  }
  report.update(extra);
  print_report(out, report.dump(), g.json_report());
  return kOk;
}

// --- lookup / batch-lookup -----------------------------------------------

struct LookupArgs {
  std::string map;
  std::vector<std::string> uris;
  bool lenient = false;
};

json entry_json(const BatchEntry& e) {
  json j = {{"uri", e.uri}};
  if (!e.error.empty()) {
    j["disposition"] = "error";
    j["error"] = e.error;
    return j;
  }
  j["disposition"] = std::string(to_string(e.disposition));
  j["matched_key"] = e.matched_key ? json(e.matched_key->text()) : json(nullptr);
  j["frequency"] = e.frequency ? json(serialize_frequency(*e.frequency)) : json(nullptr);
  return j;
}

int cmd_lookup(const LookupArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const MapIndex index = MapIndex::open(a.map, a.lenient ? ParseMode::Lenient : ParseMode::Strict);
  bool all_present = true;
  for (const auto& uri : a.uris) {
    BatchEntry e;
    e.uri = uri;
    std::size_t probes = 0;
    if (auto r = index.lookup(uri)) {
      e.disposition = r->disposition();
      e.matched_key = std::move(r->matched_key);
      e.frequency = r->frequency;
      probes = r->probes;
    }
    if (e.disposition != Disposition::Present) all_present = false;
    if (g.json_report()) {
      json j = entry_json(e);
      j["probes"] = probes;
      out << j.dump() << '\n';
    } else if (a.uris.size() > 1) {
      out << format_batch_tsv(e) << '\n';
    } else if (e.matched_key) {
      out << e.matched_key->text() << ' ' << serialize_frequency(*e.frequency) << '\n';
    } else {
      err << "mementomap: no match for " << uri << '\n';
    }
  }
  return all_present ? kOk : kNegative;
}

struct BatchArgs {
  std::string map;
  std::string uris = "-";
  std::string output = "-";
  bool lenient = false;
};

int cmd_batch(const BatchArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const MapIndex index = MapIndex::open(a.map, a.lenient ? ParseMode::Lenient : ParseMode::Strict);
  FileLineSource in(a.uris);
  auto sink = output_for(a.output, out);
  std::uint64_t counts[3] = {0, 0, 0};
  std::uint64_t errors = 0;
  std::string line;
  batch_lookup(index, in, [&](const BatchEntry& e) {
    line = g.json_report() ? entry_json(e).dump() : format_batch_tsv(e);
    line.push_back('\n');
    sink->write(line);
    if (!e.error.empty()) {
      ++errors;
    } else {
      ++counts[static_cast<int>(e.disposition)];
    }
  });
  sink->flush();
  const json summary = {{"present", counts[0]},
                        {"absent_explicit", counts[1]},
                        {"absent_nomatch", counts[2]},
                        {"errors", errors}};
  print_report(report_stream(a.output, out, err), summary.dump(), g.json_report());
  return kOk;
}

// --- stats ----------------------------------------------------------------

struct StatsArgs {
  std::string input = "-";
  bool archive = false;
  bool fit = false;
};

int cmd_stats(const StatsArgs& a, const Globals& g, std::ostream& out, std::ostream&) {
  FileLineSource in(a.input);
  if (a.archive) {
    DocumentReader reader(in, ParseMode::Lenient);
    ArchiveSummaryBuilder b;
    RecordView rec;
    while (reader.next(rec)) b.add(primary_count(rec.frequency));
    print_report(out, b.finish().to_json(), g.json_report());
    return kOk;
  }
  const auto rows = depth_stats(in, g.config.caps);
  std::optional<CutoffModel> model;
  if (a.fit) model = CutoffModel::from_stats(rows);
  if (g.json_report()) {
    json j = {{"rows", json::parse(depth_stats_json(rows))}};
    if (model) j["model"] = json::parse(model->to_json());
    out << j.dump() << '\n';
    return kOk;
  }
  out << depth_stats_tsv(rows);
  if (model) {
    out << "# host fit: a=" << model->host.a << " k=" << model->host.k
        << " rms=" << model->host.rms_residual << '\n';
    out << "# path fit: a=" << model->path.a << " k=" << model->path.k
        << " rms=" << model->path.rms_residual << '\n';
  }
  return kOk;
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string map;
  std::string log;
  std::string truth;
  bool raw = false;
  std::optional<std::uint64_t> urir_count;
};

int cmd_eval(const EvalArgs& a, const Globals& g, std::ostream& out, std::ostream&) {
  const GroundTruth truth = GroundTruth::load(a.truth);
  const MapIndex index = MapIndex::open(a.map);
  FileLineSource map_lines(a.map);
  const std::uint64_t keys = count_map_keys(map_lines);
  FileLineSource log(a.log);
  EvalOptions o;
  o.raw = a.raw;
  o.urir_count = a.urir_count;
  const EvalReport r = evaluate(index, keys, log, truth, o);
  out << (g.json_report() ? r.to_json() + "\n" : r.to_table());
  return kOk;
}

// --- fetch ----------------------------------------------------------------

struct FetchArgs {
  std::string uri;
  std::string output = "-";
  bool direct = false;
  std::size_t page_cap = 1024;
  int timeout = 30;
};

int cmd_fetch(const FetchArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  FetchOptions o;
  o.page_cap = a.page_cap;
  o.timeout = std::chrono::seconds(a.timeout);
  DiscoverySource src;
  if (a.direct) {
    src.archive_base = a.uri;
    src.resolved_map_uri = a.uri;
  } else {
    src = discover(a.uri, o);
  }
  auto sink = output_for(a.output, out);
  const FetchReport r = fetch_mementomap(src, *sink, o);
  json j = {{"map_uri", src.resolved_map_uri},
            {"method", std::string(to_string(src.method))},
            {"pages", r.pages},
            {"records", r.records},
            {"bytes", r.bytes}};
  if (src.anchor) j["anchor"] = *src.anchor;
  print_report(report_stream(a.output, out, err), j.dump(), g.json_report());
  return kOk;
}

// --- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string baseline;
  std::string out_dir;
  std::vector<double> weights;
  std::string log;
  std::string truth;
  bool raw = false;
};

int cmd_sweep(const SweepArgs& a, const Globals& g, std::ostream& out, std::ostream&) {
  SweepOptions o;
  o.caps = g.config.caps;
  if (!a.weights.empty()) {
    o.weights = a.weights;
  } else if (g.config.weights) {
    o.weights = *g.config.weights;
  }
  if (a.log.empty() != a.truth.empty()) throw UsageError("--log and --truth must be given together");
  std::optional<GroundTruth> truth;
  std::string log_text;
  if (!a.truth.empty()) {
    truth = GroundTruth::load(a.truth);
    log_text = read_file(a.log);
    o.truth = &*truth;
    o.log_text = &log_text;
    o.eval.raw = a.raw;
  }
  const SweepResult r = run_sweep(a.baseline, a.out_dir, o);
  if (!g.json_report()) {
    out << r.summary_tsv();
    return kOk;
  }
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = {{"input", row.input},
              {"wh", json::parse(weight_json(row.wh))},
              {"wp", json::parse(weight_json(row.wp))},
              {"lines", row.lines},
              {"size_bytes", row.size_bytes},
              {"gzipped_bytes", row.gzipped_bytes},
              {"rollups", row.rollups},
              {"seconds", row.seconds},
              {"map", row.map.string()}};
    if (row.eval) j["eval"] = json::parse(row.eval->to_json());
    rows.push_back(std::move(j));
  }
  out << json{{"model", json::parse(r.model.to_json())}, {"rows", rows}}.dump() << '\n';
  return kOk;
}

// --- overlap --------------------------------------------------------------

struct OverlapArgs {
  std::string archive;
  std::string access;
};

int cmd_overlap(const OverlapArgs& a, const Globals&, std::ostream& out, std::ostream& err) {
  std::uint64_t malformed = 0;
  FileLineSource archive_in(a.archive);
  const auto archive = load_uri_counts(archive_in, &malformed);
  FileLineSource access_in(a.access);
  const auto access = load_uri_counts(access_in, &malformed);
  if (malformed > 0) err << "mementomap: skipped " << malformed << " malformed lines\n";
  out << overlap_matrix(archive, access).to_tsv();
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build, compact, query and evaluate MementoMaps.", "mementomap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mementomap 0.1.0");

  Globals g;
  app.add_option("--config", g.config_path, "JSON file with depth caps, cutoff tables and weights")
      ->check(CLI::ExistingFile);
  app.add_option("--report", g.report, "Report format")
      ->check(CLI::IsMember({"text", "json"}));

  std::function<int()> action;

  GenerateArgs gen;
  auto* s_gen = app.add_subcommand("generate", "Baseline MementoMap from CDXJ (or a URI list)");
  s_gen->add_option("input", gen.input, "CDXJ file, plain or gzip ('-' = stdin)");
  s_gen->add_option("-o,--output", gen.output, "Output map ('-' = stdout, .gz = gzip)");
  s_gen->add_flag("--uri-list", gen.uri_list, "Input is one URI per line");
  s_gen->add_flag("--presorted", gen.presorted, "Input is already in key order");
  s_gen->add_flag("--strict", gen.strict, "Fail on malformed input lines");
  s_gen->add_flag("--no-filter", gen.no_filter, "Keep every status, media type and path");
  s_gen->add_flag("--include-revisits", gen.include_revisits, "Count warc/revisit records");
  s_gen->add_option("--status", gen.statuses, "Accepted statuses")->delimiter(',');
  s_gen->add_option("--mime", gen.mimes, "Accepted media type prefixes")->delimiter(',');
  s_gen->add_option("--exclude-suffix", gen.exclude_suffixes, "Excluded path suffixes")
      ->delimiter(',');
  s_gen->add_option("--memory-mb", gen.memory_mb, "Sort memory before spilling")
      ->check(CLI::PositiveNumber);
  s_gen->add_option("--temp-dir", gen.temp_dir, "Directory for sort runs");
  s_gen->add_option("--archive-id", gen.archive_id, "URI written to the !id header");
  s_gen->callback([&] { action = [&] { return cmd_generate(gen, g, out, err); }; });

  CompactArgs cmp;
  auto* s_cmp = app.add_subcommand("compact", "Roll up dense sub-trees into wildcard keys");
  s_cmp->add_option("input", cmp.input, "Sorted map ('-' = stdin)")->required();
  s_cmp->add_option("output", cmp.output, "Output map (regular file)")->required();
  s_cmp->add_option("--wh", cmp.wh, "Host weight")->check(CLI::NonNegativeNumber);
  s_cmp->add_option("--wp", cmp.wp, "Path weight")->check(CLI::NonNegativeNumber);
  s_cmp->add_option("--cutoffs", cmp.cutoffs_path, "JSON {host: [...], path: [...]}")
      ->check(CLI::ExistingFile);
  s_cmp->add_option("--stats-from", cmp.stats_from, "Map whose depth statistics fit the cutoffs")
      ->check(CLI::ExistingFile);
  s_cmp->add_flag("--lenient", cmp.lenient, "Skip malformed lines");
  s_cmp->add_flag("--keep-timestamp", cmp.keep_timestamp, "Do not rewrite updated_at");
  s_cmp->callback([&] { action = [&] { return cmd_compact(cmp, g, out, err); }; });

  LookupArgs lk;
  auto* s_lk = app.add_subcommand("lookup", "Look up URIs in a map");
  s_lk->add_option("map", lk.map, "Uncompressed sorted map")->required()->check(CLI::ExistingFile);
  s_lk->add_option("uris", lk.uris, "URIs")->required();
  s_lk->add_flag("--lenient", lk.lenient, "Treat malformed matches as misses");
  s_lk->callback([&] { action = [&] { return cmd_lookup(lk, g, out, err); }; });

  BatchArgs bl;
  auto* s_bl = app.add_subcommand("batch-lookup", "Look up one URI per input line");
  s_bl->add_option("map", bl.map, "Uncompressed sorted map")->required()->check(CLI::ExistingFile);
  s_bl->add_option("uris", bl.uris, "URI list ('-' = stdin)");
  s_bl->add_option("-o,--output", bl.output, "TSV output ('-' = stdout)");
  s_bl->add_flag("--lenient", bl.lenient, "Treat malformed matches as misses");
  s_bl->callback([&] { action = [&] { return cmd_batch(bl, g, out, err); }; });

  StatsArgs st;
  auto* s_st = app.add_subcommand("stats", "Depth statistics or archive summary");
  s_st->add_option("input", st.input, "Map or sorted key list ('-' = stdin)");
  s_st->add_flag("--archive", st.archive, "Archive summary from map frequencies");
  s_st->add_flag("--fit", st.fit, "Also fit the mean-child power law");
  s_st->callback([&] { action = [&] { return cmd_stats(st, g, out, err); }; });

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "Score a map against a lookup log");
  s_ev->add_option("map", ev.map, "Uncompressed sorted map")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--log", ev.log, "Lookup log, one URI per line")->required();
  s_ev->add_option("--truth", ev.truth, "Baseline map or archived URI list")->required();
  s_ev->add_flag("--raw", ev.raw, "Score every log line instead of unique URIs");
  s_ev->add_option("--urir-count", ev.urir_count, "URI-R count for relative cost");
  s_ev->callback([&] { action = [&] { return cmd_eval(ev, g, out, err); }; });

  FetchArgs fe;
  auto* s_fe = app.add_subcommand("fetch", "Discover and download a MementoMap");
  s_fe->add_option("uri", fe.uri, "Archive base URI")->required();
  s_fe->add_option("-o,--output", fe.output, "Output map ('-' = stdout, .gz = gzip)");
  s_fe->add_flag("--direct", fe.direct, "The URI is the map itself");
  s_fe->add_option("--page-cap", fe.page_cap, "Maximum pages")->check(CLI::PositiveNumber);
  s_fe->add_option("--timeout", fe.timeout, "Seconds per request")->check(CLI::PositiveNumber);
  s_fe->callback([&] { action = [&] { return cmd_fetch(fe, g, out, err); }; });

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "Chained compaction over a weight grid");
  s_sw->add_option("baseline", sw.baseline, "Baseline map")->required()->check(CLI::ExistingFile);
  s_sw->add_option("out_dir", sw.out_dir, "Output directory")->required();
  s_sw->add_option("--weights", sw.weights, "Weights")->delimiter(',');
  s_sw->add_option("--log", sw.log, "Lookup log for evaluation");
  s_sw->add_option("--truth", sw.truth, "Ground truth for evaluation");
  s_sw->add_flag("--raw", sw.raw, "Score every log line");
  s_sw->callback([&] { action = [&] { return cmd_sweep(sw, g, out, err); }; });

  OverlapArgs ov;
  auto* s_ov = app.add_subcommand("overlap", "Archived vs accessed order-of-magnitude matrix");
  s_ov->add_option("--archive", ov.archive, "`uri count` lines of holdings")->required();
  s_ov->add_option("--access", ov.access, "`uri count` lines of accesses")->required();
  s_ov->callback([&] { action = [&] { return cmd_overlap(ov, g, out, err); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, e.what());
    err << "Run with --help for usage.\n";
    return kUsage;
  }

  try {
    g.config = load_config(g.config_path);
    return action();
  } catch (const UsageError& e) {
    print_error(err, e.what());
    return kUsage;
  } catch (const Error& e) {
    print_error(err, e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    print_error(err, e.what());
    return kDataError;
  }
}

}  // namespace mementomap::cli
