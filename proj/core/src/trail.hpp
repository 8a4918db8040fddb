#pragma once

// Per-level node stacks for a pre-order walk over byte-sorted keys.
//
// Under byte order a token `t` and its extension `t` + c... with c below the
// level separator sort between `t`'s own key and `t`'s children:
//
//   h)/a   h)/a.html   h)/a/x
//
// so node `a` must survive while its sibling `a.html` is open. Each level
// keeps a stack whose entries below the top are such suspended prefixes; a
// suspended node never has children yet, so finalizing it is trivial.
// Deeper levels always belong to the top entry of the level above.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mementomap::detail {

struct TrailStep {
  bool created = false;  // a new sibling: the parent gains a child
  bool changed = false;  // top entry differs from the previous key's
};

template <typename Node>
class LevelStacks {
 public:
  LevelStacks(std::size_t levels, char separator)
      : stacks_(levels), separator_(static_cast<unsigned char>(separator)) {}

  std::size_t levels() const noexcept { return stacks_.size(); }
  bool empty(std::size_t level) const { return stacks_[level].empty(); }
  Node& top(std::size_t level) { return stacks_[level].back(); }
  const Node& top(std::size_t level) const { return stacks_[level].back(); }

  /// Positions `level` on `token`. `finalize(node, level)` is called for every
  /// node leaving the walk, deepest first.
  template <typename Finalize>
  TrailStep enter(std::size_t level, std::string_view token, Finalize&& finalize) {
    auto& stack = stacks_[level];
    if (!stack.empty() && stack.back().token == token) return {};
    close_from(level + 1, finalize);
    while (!stack.empty() && stack.back().token != token &&
           !interleave_prefix(stack.back().token, token)) {
      finalize_top(level, finalize);
    }
    if (!stack.empty() && stack.back().token == token) return {false, true};
    stack.emplace_back();
    stack.back().token.assign(token);
    ++live_;
    if (live_ > peak_) peak_ = live_;
    return {true, true};
  }

  /// Finalizes every node at `level` and deeper.
  template <typename Finalize>
  void close_from(std::size_t level, Finalize&& finalize) {
    for (std::size_t l = stacks_.size(); l-- > level;) {
      while (!stacks_[l].empty()) finalize_top(l, finalize);
    }
  }

  std::size_t live() const noexcept { return live_; }
  std::size_t peak() const noexcept { return peak_; }

 private:
  template <typename Finalize>
  void finalize_top(std::size_t level, Finalize& finalize) {
    finalize(stacks_[level].back(), level);
    stacks_[level].pop_back();
    --live_;
  }

  // `token` extends `prefix` by a byte below the separator.
  bool interleave_prefix(std::string_view prefix, std::string_view token) const {
    return token.size() > prefix.size() && token.starts_with(prefix) &&
           static_cast<unsigned char>(token[prefix.size()]) < separator_;
  }

  std::vector<std::vector<Node>> stacks_;
  unsigned char separator_;
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

}  // namespace mementomap::detail
