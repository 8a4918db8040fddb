#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mementomap {

/// Counts keys of arbitrary volume. Keys accumulate in memory until the
/// estimated footprint passes the limit, then spill as sorted runs to
/// temporary files; finish() k-way merges the runs, summing counts.
/// Keys must not contain '\n' or '\t'.
class ExternalCounter {
 public:
  struct Options {
    std::size_t memory_limit_bytes = std::size_t{1} << 30;
    std::filesystem::path temp_dir;  // empty = system temp directory
  };

  ExternalCounter() : ExternalCounter(Options{}) {}
  explicit ExternalCounter(Options options);
  ~ExternalCounter();
  ExternalCounter(const ExternalCounter&) = delete;
  ExternalCounter& operator=(const ExternalCounter&) = delete;

  void add(std::string_view key, std::uint64_t count = 1);

  /// Emits every key once, byte-wise ascending. The counter is empty afterwards.
  void finish(const std::function<void(std::string_view key, std::uint64_t count)>& emit);

  std::size_t spilled_runs() const noexcept { return runs_.size(); }

 private:
  void spill();

  Options options_;
  std::map<std::string, std::uint64_t, std::less<>> pending_;
  std::size_t pending_bytes_ = 0;
  std::vector<std::filesystem::path> runs_;
  std::filesystem::path run_dir_;
};

}  // namespace mementomap
