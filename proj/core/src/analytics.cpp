#include "mementomap/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mementomap/error.hpp"
#include "mementomap/ukvs.hpp"
#include "trail.hpp"

namespace mementomap {

namespace {

struct StatNode {
  std::string token;
  std::uint64_t keys = 0;
  std::uint64_t children = 0;
};

struct RowAccumulator {
  CountHistogram values;
  std::uint64_t count = 0;
  std::uint64_t sum = 0;
  std::uint64_t max = 0;
  std::uint64_t parents = 0;

  void record(std::uint64_t v) {
    ++values[v];
    ++count;
    sum += v;
    max = std::max(max, v);
  }
};

double median_of(const CountHistogram& h, std::uint64_t n) {
  if (n == 0) return 0;
  // 0-based ranks of the middle element(s).
  const std::uint64_t lo = (n - 1) / 2;
  const std::uint64_t hi = n / 2;
  double lo_v = 0;
  double hi_v = 0;
  std::uint64_t seen = 0;
  for (const auto& [v, m] : h) {
    if (lo >= seen && lo < seen + m) lo_v = static_cast<double>(v);
    if (hi >= seen && hi < seen + m) {
      hi_v = static_cast<double>(v);
      break;
    }
    seen += m;
  }
  return (lo_v + hi_v) / 2.0;
}

double stddev_of(const CountHistogram& h, std::uint64_t n, double mean) {
  if (n == 0) return 0;
  long double acc = 0;
  for (const auto& [v, m] : h) {
    const long double d = static_cast<long double>(v) - mean;
    acc += d * d * static_cast<long double>(m);
  }
  return static_cast<double>(std::sqrt(acc / static_cast<long double>(n)));
}

std::string fixed(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

std::string DepthStatsRow::label() const {
  return (segment == Segment::Host ? "H" : "P") + std::to_string(depth) + (overflow ? "+" : "");
}

double redq(std::uint64_t count, std::uint64_t sum, std::uint64_t total) {
  if (total == 0 || sum > total || count > sum) {
    throw Error(ErrorKind::DomainError, "redq requires total >= sum >= count and total > 0");
  }
  return static_cast<double>(sum - count) / static_cast<double>(total);
}

struct DepthStatsBuilder::Impl {
  explicit Impl(DepthCaps c)
      : caps(c),
        host(std::max<std::size_t>(c.max_host_depth, 1), ','),
        path(std::max<std::size_t>(c.max_path_depth, 1), '/'),
        host_rows(host.levels()),
        path_rows(path.levels()) {}

  DepthCaps caps;
  detail::LevelStacks<StatNode> host;
  detail::LevelStacks<StatNode> path;
  std::vector<RowAccumulator> host_rows;
  std::vector<RowAccumulator> path_rows;
  std::string previous;
  std::string path_owner;  // full host text of the open path trail
  bool have_previous = false;
  std::uint64_t total = 0;
  std::size_t peak = 0;
  std::vector<std::string_view> host_tokens;
  std::vector<std::string_view> path_tokens;

  void finalize_host(StatNode& n, std::size_t level) {
    host_rows[level].record(n.keys);
    if (n.children > 0 && level + 1 < host_rows.size()) ++host_rows[level + 1].parents;
  }
  void finalize_path(StatNode& n, std::size_t level) {
    path_rows[level].record(n.keys);
    if (n.children > 0 && level + 1 < path_rows.size()) ++path_rows[level + 1].parents;
  }
  auto host_fin() {
    return [this](StatNode& n, std::size_t l) { finalize_host(n, l); };
  }
  auto path_fin() {
    return [this](StatNode& n, std::size_t l) { finalize_path(n, l); };
  }

  void tokenize(std::string_view key) {
    host_tokens.clear();
    path_tokens.clear();
    const auto close = key.find(')');
    std::string_view h = key.substr(0, close);
    std::size_t start = 0;
    while (host_tokens.size() < host.levels()) {
      const auto comma = h.find(',', start);
      host_tokens.push_back(h.substr(start, comma == std::string_view::npos ? h.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (close == std::string_view::npos) return;
    std::string_view p = key.substr(close + 1);
    p = p.substr(0, p.find('?'));
    if (!p.empty() && p.front() == '/') p.remove_prefix(1);
    start = 0;
    while (!p.empty() && path_tokens.size() + 1 < path.levels()) {
      const auto slash = p.find('/', start);
      path_tokens.push_back(p.substr(start, slash == std::string_view::npos ? p.npos : slash - start));
      if (slash == std::string_view::npos) break;
      start = slash + 1;
    }
  }

  void add(std::string_view key) {
    if (have_previous && key <= std::string_view(previous)) {
      throw Error(ErrorKind::UnsortedInput,
                  "key '" + std::string(key) + "' does not sort after '" + previous + "'");
    }
    previous.assign(key);
    have_previous = true;
    ++total;

    tokenize(key);
    const auto close = key.find(')');
    const std::string_view owner = key.substr(0, close);
    if (owner != path_owner) {
      path.close_from(0, path_fin());
      path_owner.assign(owner);
    }
    for (std::size_t i = 0; i < host_tokens.size(); ++i) {
      const auto step = host.enter(i, host_tokens[i], host_fin());
      if (step.created && i > 0) ++host.top(i - 1).children;
      ++host.top(i).keys;
    }
    if (close != std::string_view::npos) {
      path.enter(0, "", path_fin());
      ++path.top(0).keys;
      for (std::size_t i = 0; i < path_tokens.size(); ++i) {
        const auto step = path.enter(i + 1, path_tokens[i], path_fin());
        if (step.created) ++path.top(i).children;
        ++path.top(i + 1).keys;
      }
    }
    peak = std::max(peak, host.live() + path.live());
  }

  std::vector<DepthStatsRow> finish() {
    path.close_from(0, path_fin());
    host.close_from(0, host_fin());
    path_owner.clear();

    std::vector<DepthStatsRow> rows;
    auto emit = [&](Segment seg, std::size_t depth, bool overflow, RowAccumulator& acc,
                    std::uint64_t parents) {
      DepthStatsRow r;
      r.segment = seg;
      r.depth = depth;
      r.overflow = overflow;
      r.count = acc.count;
      r.sum = acc.sum;
      r.max = acc.max;
      if (acc.count > 0) {
        r.mean = static_cast<double>(acc.sum) / static_cast<double>(acc.count);
        r.median = median_of(acc.values, acc.count);
        r.stddev = stddev_of(acc.values, acc.count, r.mean);
      }
      r.redq = total > 0 ? redq(acc.count, acc.sum, total) : 0.0;
      r.parents = parents;
      r.children = acc.count;
      r.mean_child = parents > 0 ? static_cast<double>(r.children) / static_cast<double>(parents) : 0.0;
      rows.push_back(r);
    };
    for (std::size_t i = 0; i < host_rows.size(); ++i) {
      const std::uint64_t parents = i == 0 ? (host_rows[0].count > 0 ? 1 : 0) : host_rows[i].parents;
      emit(Segment::Host, i + 1, i + 1 == host_rows.size(), host_rows[i], parents);
    }
    for (std::size_t i = 0; i < path_rows.size(); ++i) {
      const std::uint64_t parents = i == 0 ? path_rows[0].count : path_rows[i].parents;
      emit(Segment::Path, i, i + 1 == path_rows.size(), path_rows[i], parents);
    }
    return rows;
  }
};

DepthStatsBuilder::DepthStatsBuilder(DepthCaps caps) : impl_(std::make_unique<Impl>(caps)) {}
DepthStatsBuilder::~DepthStatsBuilder() = default;
DepthStatsBuilder::DepthStatsBuilder(DepthStatsBuilder&&) noexcept = default;
DepthStatsBuilder& DepthStatsBuilder::operator=(DepthStatsBuilder&&) noexcept = default;

void DepthStatsBuilder::add(std::string_view key) { impl_->add(key); }
std::vector<DepthStatsRow> DepthStatsBuilder::finish() { return impl_->finish(); }
std::uint64_t DepthStatsBuilder::total_keys() const noexcept { return impl_->total; }
std::size_t DepthStatsBuilder::peak_open_nodes() const noexcept { return impl_->peak; }

std::vector<DepthStatsRow> depth_stats(LineSource& keys, DepthCaps caps) {
  DepthStatsBuilder builder(caps);
  std::string_view line;
  while (keys.next(line)) {
    if (is_blank_line(line) || is_header_line(line)) continue;
    std::size_t b = 0;
    while (b < line.size() && (line[b] == ' ' || line[b] == '\t')) ++b;
    std::size_t e = b;
    while (e < line.size() && line[e] != ' ' && line[e] != '\t') ++e;
    try {
      builder.add(line.substr(b, e - b));
    } catch (const Error& err) {
      throw Error(err.kind(), err.message(), keys.line_number());
    }
  }
  return builder.finish();
}

std::string depth_stats_tsv(const std::vector<DepthStatsRow>& rows) {
  std::string out = "Depth\tCount\tSum\tMax\tMean\tMed.\tStdDev\tRedQ\tParents\tChildren\tMeanChld\n";
  for (const auto& r : rows) {
    out += r.label() + '\t' + std::to_string(r.count) + '\t' + std::to_string(r.sum) + '\t' +
           std::to_string(r.max) + '\t' + fixed(r.mean, 2) + '\t' + fixed(r.median, 1) + '\t' +
           fixed(r.stddev, 2) + '\t' + fixed(r.redq, 5) + '\t' + std::to_string(r.parents) +
           '\t' + std::to_string(r.children) + '\t' + fixed(r.mean_child, 2) + '\n';
  }
  return out;
}

std::string depth_stats_json(const std::vector<DepthStatsRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"depth", r.label()},   {"count", r.count},     {"sum", r.sum},
                   {"max", r.max},         {"mean", r.mean},       {"median", r.median},
                   {"stddev", r.stddev},   {"redq", r.redq},       {"parents", r.parents},
                   {"children", r.children}, {"mean_child", r.mean_child}});
  }
  return arr.dump();
}

double PowerLawFit::at(double depth) const { return a * std::pow(depth, -k); }

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::InsufficientStats, "power-law fit needs at least two points");
  }
  long double sx = 0, sy = 0;
  for (const auto& [d, y] : points) {
    if (!(d > 0) || !(y > 0)) {
      throw Error(ErrorKind::DomainError, "power-law fit needs positive depths and values");
    }
    sx += std::log(static_cast<long double>(d));
    sy += std::log(static_cast<long double>(y));
  }
  const long double n = static_cast<long double>(points.size());
  const long double mx = sx / n;
  const long double my = sy / n;
  long double sxx = 0, sxy = 0;
  for (const auto& [d, y] : points) {
    const long double dx = std::log(static_cast<long double>(d)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(static_cast<long double>(y)) - my);
  }
  if (sxx == 0) throw Error(ErrorKind::DegenerateFit, "all fit points share one depth");
  const long double slope = sxy / sxx;
  const long double intercept = my - slope * mx;
  PowerLawFit fit;
  fit.k = static_cast<double>(-slope);
  fit.a = static_cast<double>(std::exp(intercept));
  fit.points = points.size();
  long double rss = 0;
  for (const auto& [d, y] : points) {
    const long double r = std::log(static_cast<long double>(y)) -
                          (intercept + slope * std::log(static_cast<long double>(d)));
    rss += r * r;
  }
  fit.rms_residual = static_cast<double>(std::sqrt(rss / n));
  return fit;
}

std::vector<std::pair<double, double>> mean_child_points(const std::vector<DepthStatsRow>& rows,
                                                         Segment segment) {
  const std::size_t min_depth = segment == Segment::Host ? 3 : 1;
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.segment == segment && r.depth >= min_depth && r.mean_child > 0) {
      pts.emplace_back(static_cast<double>(r.depth), r.mean_child);
    }
  }
  return pts;
}

double gini(const CountHistogram& histogram) {
  using i128 = __int128;
  i128 n = 0;
  i128 total = 0;
  i128 weighted = 0;  // sum of rank * value, ranks 1-based ascending
  for (const auto& [v, m] : histogram) {
    if (m == 0) continue;
    const i128 mm = m;
    weighted += static_cast<i128>(v) * (mm * n + mm * (mm + 1) / 2);
    n += mm;
    total += static_cast<i128>(v) * mm;
  }
  if (n == 0) throw Error(ErrorKind::EmptyInput, "gini of an empty distribution");
  if (total == 0) return 0.0;
  const i128 numerator = 2 * weighted - (n + 1) * total;
  return static_cast<double>(static_cast<long double>(numerator) /
                             (static_cast<long double>(n) * static_cast<long double>(total)));
}

ParetoBreak pareto_break(const CountHistogram& histogram) {
  long double n = 0;
  long double total = 0;
  for (const auto& [v, m] : histogram) {
    n += m;
    total += static_cast<long double>(v) * m;
  }
  if (n == 0) throw Error(ErrorKind::EmptyInput, "pareto break of an empty distribution");
  if (total == 0) return {0.5, 0.5};
  // Descending runs; within a run the cumulative curve is linear, so it is
  // enough to locate the run where share(x) + x crosses 1.
  long double x0 = 0;
  long double y0 = 0;
  for (auto it = histogram.rbegin(); it != histogram.rend(); ++it) {
    const auto [v, m] = *it;
    if (m == 0) continue;
    const long double x1 = x0 + m / n;
    const long double y1 = y0 + static_cast<long double>(v) * m / total;
    if (y1 + x1 >= 1) {
      const long double g0 = y0 + x0 - 1;
      const long double g1 = y1 + x1 - 1;
      const long double t = g1 == g0 ? 0 : -g0 / (g1 - g0);
      const long double x = x0 + t * (x1 - x0);
      return {static_cast<double>(x), static_cast<double>(1 - x)};
    }
    x0 = x1;
    y0 = y1;
  }
  return {1.0, 0.0};
}

std::string ArchiveSummary::to_json() const {
  nlohmann::json j = {{"unique_urirs", unique_urirs},
                      {"total_urims", total_urims},
                      {"gamma", gamma},
                      {"max_urims_per_urir", max_urims_per_urir},
                      {"median", median},
                      {"stddev", stddev},
                      {"gini", gini},
                      {"pareto_break",
                       {{"top_percent", pareto.top_fraction * 100},
                        {"memento_percent", pareto.memento_fraction * 100}}}};
  return j.dump();
}

ArchiveSummary ArchiveSummaryBuilder::finish() const {
  ArchiveSummary s;
  for (const auto& [v, m] : histogram_) {
    s.unique_urirs += m;
    s.total_urims += v * m;
    if (m > 0) s.max_urims_per_urir = std::max(s.max_urims_per_urir, v);
  }
  if (s.unique_urirs == 0) throw Error(ErrorKind::EmptyInput, "no URI-R counts");
  s.gamma = static_cast<double>(s.total_urims) / static_cast<double>(s.unique_urirs);
  s.median = median_of(histogram_, s.unique_urirs);
  s.stddev = stddev_of(histogram_, s.unique_urirs, s.gamma);
  s.gini = mementomap::gini(histogram_);
  s.pareto = pareto_break(histogram_);
  return s;
}

ArchiveSummary archive_summary(std::span<const std::uint64_t> urim_counts) {
  ArchiveSummaryBuilder b;
  for (auto c : urim_counts) b.add(c);
  return b.finish();
}

}  // namespace mementomap
