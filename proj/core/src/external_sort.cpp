#include "mementomap/external_sort.hpp"

#include <unistd.h>

#include <charconv>
#include <fstream>
#include <memory>
#include <queue>

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

// Rough per-entry cost of a std::map node holding a std::string.
constexpr std::size_t kNodeOverhead = 64;

struct RunCursor {
  std::ifstream in;
  std::string key;
  std::uint64_t count = 0;

  bool advance() {
    std::string line;
    if (!std::getline(in, line)) return false;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error(ErrorKind::IoFailure, "corrupt sort run");
    key.assign(line, 0, tab);
    const auto [ptr, ec] = std::from_chars(line.data() + tab + 1, line.data() + line.size(), count);
    if (ec != std::errc{}) throw Error(ErrorKind::IoFailure, "corrupt sort run");
    return true;
  }
};

}  // namespace

ExternalCounter::ExternalCounter(Options options) : options_(std::move(options)) {}

ExternalCounter::~ExternalCounter() {
  std::error_code ec;
  if (!run_dir_.empty()) std::filesystem::remove_all(run_dir_, ec);
}

void ExternalCounter::add(std::string_view key, std::uint64_t count) {
  auto it = pending_.find(key);
  if (it != pending_.end()) {
    it->second += count;
    return;
  }
  pending_.emplace(std::string(key), count);
  pending_bytes_ += key.size() + kNodeOverhead;
  if (pending_bytes_ >= options_.memory_limit_bytes) spill();
}

void ExternalCounter::spill() {
  if (pending_.empty()) return;
  if (run_dir_.empty()) {
    auto base = options_.temp_dir.empty() ? std::filesystem::temp_directory_path()
                                          : options_.temp_dir;
    run_dir_ = base / ("mementomap-sort-" + std::to_string(::getpid()) + "-" +
                       std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(run_dir_);
  }
  auto path = run_dir_ / ("run-" + std::to_string(runs_.size()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot create sort run " + path.string());
  for (const auto& [k, c] : pending_) out << k << '\t' << c << '\n';
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for sort run " + path.string());
  runs_.push_back(std::move(path));
  pending_.clear();
  pending_bytes_ = 0;
}

void ExternalCounter::finish(
    const std::function<void(std::string_view, std::uint64_t)>& emit) {
  if (runs_.empty()) {
    for (const auto& [k, c] : pending_) emit(k, c);
    pending_.clear();
    pending_bytes_ = 0;
    return;
  }
  spill();

  std::vector<std::unique_ptr<RunCursor>> cursors;
  for (const auto& p : runs_) {
    auto c = std::make_unique<RunCursor>();
    c->in.open(p, std::ios::binary);
    if (!c->in) throw Error(ErrorKind::IoFailure, "cannot reopen sort run " + p.string());
    if (c->advance()) cursors.push_back(std::move(c));
  }
  auto greater = [](const RunCursor* a, const RunCursor* b) { return a->key > b->key; };
  std::priority_queue<RunCursor*, std::vector<RunCursor*>, decltype(greater)> heap(greater);
  for (auto& c : cursors) heap.push(c.get());

  std::string current;
  std::uint64_t total = 0;
  bool have = false;
  while (!heap.empty()) {
    RunCursor* top = heap.top();
    heap.pop();
    if (have && top->key == current) {
      total += top->count;
    } else {
      if (have) emit(current, total);
      current = top->key;
      total = top->count;
      have = true;
    }
    if (top->advance()) heap.push(top);
  }
  if (have) emit(current, total);

  std::error_code ec;
  std::filesystem::remove_all(run_dir_, ec);
  run_dir_.clear();
  runs_.clear();
}

}  // namespace mementomap
