#include "mementomap/compactor.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include <json.hpp>

#include "mementomap/error.hpp"
#include "trail.hpp"

namespace mementomap {

namespace {

struct CompactNode {
  std::string token;
  std::optional<FrequencyValue> desc;  // strict descendants only
  std::uint64_t children = 0;
  bool star_child = false;
  std::uint64_t children_pos = 0;    // sink offset of the first child's output
  std::uint64_t children_lines = 0;  // output line count at that offset
};

void add_desc(CompactNode& n, const FrequencyValue& f) {
  n.desc = n.desc ? rollup_sum(*n.desc, f) : f;
}

void check_weight(double w, const char* name) {
  if (!(w >= 0) || std::isinf(w)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be a finite, non-negative number");
  }
}

class StreamingCompactor {
 public:
  StreamingCompactor(SeekableSink& sink, const CompactionParams& params)
      : sink_(sink),
        params_(params),
        host_(std::max<std::size_t>(params.caps.max_host_depth, 1), ','),
        path_(std::max<std::size_t>(params.caps.max_path_depth, 1), '/') {}

  void add(const RecordView& rec) {
    split_key(rec.key, params_.caps, tokens_);
    const std::string_view owner = rec.key.substr(0, rec.key.find(')'));
    if (owner != path_owner_) {
      path_.close_from(0, path_fin());
      path_owner_.assign(owner);
    }

    const std::size_t n = tokens_.host.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto step = host_.enter(i, tokens_.host[i], host_fin());
      if (step.created && i > 0) adopt(host_.top(i - 1), tokens_.host[i]);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) add_desc(host_.top(i), rec.frequency);

    if (tokens_.has_path) {
      path_.enter(0, "", path_fin());
      const std::size_t m = tokens_.path.size();
      for (std::size_t j = 0; j < m; ++j) {
        const auto step = path_.enter(j + 1, tokens_.path[j], path_fin());
        if (step.created) adopt(path_.top(j), tokens_.path[j]);
      }
      for (std::size_t j = 0; j < m; ++j) add_desc(path_.top(j), rec.frequency);
    }

    line_.clear();
    append_record(line_, rec.key, rec.frequency, rec.extra);
    line_.push_back('\n');
    sink_.write(line_);
    ++lines_;
    peak_ = std::max(peak_, host_.live() + path_.live());
  }

  void finish() {
    path_.close_from(0, path_fin());
    host_.close_from(0, host_fin());
    path_owner_.clear();
  }

  std::uint64_t lines() const noexcept { return lines_; }
  std::uint64_t rollups() const noexcept { return rollups_; }
  std::size_t peak() const noexcept { return peak_; }

 private:
  void adopt(CompactNode& parent, std::string_view child_token) {
    if (parent.children == 0) {
      parent.children_pos = sink_.tell();
      parent.children_lines = lines_;
    }
    ++parent.children;
    if (child_token == "*") parent.star_child = true;
  }

  struct HostFin {
    StreamingCompactor* self;
    void operator()(CompactNode& node, std::size_t level) const { self->finalize_host(node, level); }
  };
  struct PathFin {
    StreamingCompactor* self;
    void operator()(CompactNode& node, std::size_t level) const { self->finalize_path(node, level); }
  };
  HostFin host_fin() { return {this}; }
  PathFin path_fin() { return {this}; }

  void finalize_host(CompactNode& node, std::size_t level) {
    if (!should_roll(node, params_.host_cutoff(level + 2))) return;
    wildcard_.clear();
    for (std::size_t i = 0; i < level; ++i) {
      wildcard_ += host_.top(i).token;
      wildcard_.push_back(',');
    }
    wildcard_ += node.token;
    wildcard_ += ",*";
    roll(node);
  }

  void finalize_path(CompactNode& node, std::size_t level) {
    if (!should_roll(node, params_.path_cutoff(level + 1))) return;
    wildcard_.assign(path_owner_);
    wildcard_ += ")/";
    for (std::size_t i = 1; i < level; ++i) {
      wildcard_ += path_.top(i).token;
      wildcard_.push_back('/');
    }
    if (level > 0) {
      wildcard_ += node.token;
      wildcard_.push_back('/');
    }
    wildcard_.push_back('*');
    roll(node);
  }

  bool should_roll(const CompactNode& node, double cutoff) const {
    if (node.children == 0 || !(static_cast<double>(node.children) >= cutoff)) return false;
    // Re-rolling a lone wildcard child would only rewrite it.
    const std::uint64_t desc_lines = lines_ - node.children_lines;
    return !(desc_lines == 1 && node.children == 1 && node.star_child);
  }

  void roll(CompactNode& node) {
    ++rollups_;
    sink_.truncate_to(node.children_pos);
    lines_ = node.children_lines;
    line_.clear();
    append_record(line_, wildcard_, *node.desc);
    line_.push_back('\n');
    sink_.write(line_);
    ++lines_;
  }

  SeekableSink& sink_;
  const CompactionParams& params_;
  detail::LevelStacks<CompactNode> host_;
  detail::LevelStacks<CompactNode> path_;
  KeyTokens tokens_;
  std::string path_owner_;
  std::string line_;
  std::string wildcard_;
  std::uint64_t lines_ = 0;
  std::uint64_t rollups_ = 0;
  std::size_t peak_ = 0;
};

}  // namespace

double CompactionParams::host_cutoff(std::size_t child_depth) const {
  if (child_depth <= 1 || child_depth >= host_cutoffs.size()) return kNeverRollUp;
  return host_cutoffs[child_depth];
}

double CompactionParams::path_cutoff(std::size_t child_depth) const {
  if (child_depth == 0 || child_depth >= path_cutoffs.size()) return kNeverRollUp;
  return path_cutoffs[child_depth];
}

CutoffModel CutoffModel::from_stats(const std::vector<DepthStatsRow>& rows) {
  CutoffModel m;
  const auto host_pts = mean_child_points(rows, Segment::Host);
  const auto path_pts = mean_child_points(rows, Segment::Path);
  try {
    m.host = fit_power_law(host_pts);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("host mean-child fit: ") + e.message());
  }
  try {
    m.path = fit_power_law(path_pts);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("path mean-child fit: ") + e.message());
  }
  return m;
}

std::string CutoffModel::to_json() const {
  nlohmann::json j = {
      {"host_fit", {{"a", host.a}, {"k", host.k}, {"rms_residual", host.rms_residual}}},
      {"path_fit", {{"a", path.a}, {"k", path.k}, {"rms_residual", path.rms_residual}}}};
  return j.dump();
}

CompactionParams derive_cutoffs(const CutoffModel& model, double wh, double wp, DepthCaps caps) {
  check_weight(wh, "wh");
  check_weight(wp, "wp");
  CompactionParams p;
  p.wh = wh;
  p.wp = wp;
  p.caps = caps;
  p.host_cutoffs.assign(caps.max_host_depth + 1, kNeverRollUp);
  p.path_cutoffs.assign(caps.max_path_depth, kNeverRollUp);
  for (std::size_t d = 3; d < p.host_cutoffs.size(); ++d) {
    p.host_cutoffs[d] = wh * model.host.at(static_cast<double>(d));
  }
  for (std::size_t d = 1; d < p.path_cutoffs.size(); ++d) {
    p.path_cutoffs[d] = wp * model.path.at(static_cast<double>(d));
  }
  return p;
}

CompactionParams derive_cutoffs(const std::vector<DepthStatsRow>& rows, double wh, double wp,
                                DepthCaps caps) {
  return derive_cutoffs(CutoffModel::from_stats(rows), wh, wp, caps);
}

CompactionParams fixed_cutoffs(std::vector<double> host, std::vector<double> path,
                               DepthCaps caps) {
  CompactionParams p;
  p.caps = caps;
  host.resize(caps.max_host_depth + 1, kNeverRollUp);
  path.resize(caps.max_path_depth, kNeverRollUp);
  for (double c : host) {
    if (std::isnan(c) || c < 0) throw Error(ErrorKind::InvalidArgument, "negative host cutoff");
  }
  for (double c : path) {
    if (std::isnan(c) || c < 0) throw Error(ErrorKind::InvalidArgument, "negative path cutoff");
  }
  p.host_cutoffs = std::move(host);
  p.path_cutoffs = std::move(path);
  return p;
}

std::string CompactionReport::to_json() const {
  nlohmann::json j = {{"lines_in", lines_in},
                      {"lines_out", lines_out},
                      {"rollups", rollups},
                      {"wall_seconds", wall_seconds},
                      {"peak_trail_entries", peak_trail_entries},
                      {"bytes_out", bytes_out}};
  return j.dump();
}

CompactionReport compact(DocumentReader& input, SeekableSink& output,
                         const CompactionParams& params) {
  const auto start = std::chrono::steady_clock::now();
  auto headers = input.headers();
  if (!params.updated_at.empty()) set_updated_at(headers, params.updated_at);
  for (const auto& h : headers) {
    const std::string line = serialize(h) + "\n";
    output.write(line);
  }

  StreamingCompactor compactor(output, params);
  CompactionReport report;
  RecordView rec;
  while (input.next(rec)) {
    ++report.lines_in;
    compactor.add(rec);
  }
  compactor.finish();
  output.flush();

  report.lines_out = compactor.lines();
  report.rollups = compactor.rollups();
  report.peak_trail_entries = compactor.peak();
  report.bytes_out = output.tell();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CompactionReport compact(LineSource& input, SeekableSink& output, const CompactionParams& params,
                         ParseMode mode) {
  DocumentReader reader(input, mode);
  return compact(reader, output, params);
}

}  // namespace mementomap
