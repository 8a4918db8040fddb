// Explicit-tree compaction. Deliberately shares no tokenization or traversal
// code with the streaming compactor so the two can be tested against each other.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>

#include "mementomap/compactor.hpp"
#include "mementomap/error.hpp"

namespace mementomap {

namespace {

struct TreeNode {
  std::map<std::string, TreeNode> children;  // subdomains or path children
  std::unique_ptr<TreeNode> path_root;       // host nodes only: the P0 node
  std::vector<const UkvsRecord*> own;

  // Filled bottom-up.
  std::optional<FrequencyValue> desc;
  std::uint64_t out_lines = 0;
  bool rolled = false;
};

std::vector<std::string> split_all(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(current);
  return out;
}

// Joins everything from index `cap - 1` on into a single final token.
void cap_tokens(std::vector<std::string>& tokens, std::size_t cap, char sep) {
  if (cap == 0 || tokens.size() <= cap) return;
  std::string tail = tokens[cap - 1];
  for (std::size_t i = cap; i < tokens.size(); ++i) {
    tail.push_back(sep);
    tail += tokens[i];
  }
  tokens.resize(cap);
  tokens.back() = std::move(tail);
}

class Pruner {
 public:
  Pruner(const CompactionParams& params) : params_(params) {}

  void insert(const UkvsRecord& rec) {
    const std::string& key = rec.key.text();
    const auto close = key.find(')');
    auto hosts = split_all(std::string_view(key).substr(0, close), ',');
    cap_tokens(hosts, std::max<std::size_t>(params_.caps.max_host_depth, 1), ',');
    TreeNode* node = &root_;
    for (const auto& h : hosts) node = &node->children[h];
    if (close == std::string::npos) {
      node->own.push_back(&rec);
      return;
    }
    if (!node->path_root) node->path_root = std::make_unique<TreeNode>();
    node = node->path_root.get();
    std::string_view path = std::string_view(key).substr(close + 1);
    if (!path.empty() && path.front() == '/') path.remove_prefix(1);
    if (!path.empty()) {
      auto segs = split_all(path, '/');
      cap_tokens(segs, std::max<std::size_t>(params_.caps.max_path_depth, 2) - 1, '/');
      for (const auto& s : segs) node = &node->children[s];
    }
    node->own.push_back(&rec);
  }

  std::vector<UkvsRecord> run(std::uint64_t* rollups) {
    settle(root_, /*is_host=*/true, 0);
    emit_host(root_, "");
    std::sort(out_.begin(), out_.end(),
              [](const UkvsRecord& a, const UkvsRecord& b) { return a.key < b.key; });
    if (rollups) *rollups = rollups_;
    return std::move(out_);
  }

 private:
  // `depth` is the node's own depth: host depth (root = 0) or path depth (P0 = 0).
  void settle(TreeNode& node, bool is_host, std::size_t depth) {
    std::uint64_t desc_lines = 0;
    for (auto& [token, child] : node.children) {
      settle(child, is_host, depth + 1);
      desc_lines += child.out_lines;
      for (const auto* r : child.own) merge(node, r->frequency);
      if (child.desc) merge(node, *child.desc);
      if (child.path_root) {
        accumulate_all(*child.path_root, node);
      }
    }
    std::uint64_t root_lines = 0;
    if (node.path_root) {
      settle(*node.path_root, /*is_host=*/false, 0);
      root_lines = node.path_root->out_lines;
    }

    const double cutoff = is_host ? (depth == 0 ? kNeverRollUp : params_.host_cutoff(depth + 1))
                                  : params_.path_cutoff(depth + 1);
    const std::uint64_t n = node.children.size();
    const bool lone_star = n == 1 && node.children.begin()->first == "*" && desc_lines == 1;
    node.rolled = n > 0 && static_cast<double>(n) >= cutoff && !lone_star;
    if (node.rolled) ++rollups_;
    node.out_lines = node.own.size() + root_lines + (node.rolled ? 1 : desc_lines);
  }

  // Adds every record in a P0 subtree to `target`'s descendant total.
  void accumulate_all(const TreeNode& n, TreeNode& target) {
    for (const auto* r : n.own) merge(target, r->frequency);
    for (const auto& [t, c] : n.children) accumulate_all(c, target);
  }

  static void merge(TreeNode& node, const FrequencyValue& f) {
    node.desc = node.desc ? rollup_sum(*node.desc, f) : f;
  }

  void emit_own(const TreeNode& node) {
    for (const auto* r : node.own) out_.push_back(*r);
  }

  void emit_host(const TreeNode& node, const std::string& host) {
    emit_own(node);
    if (node.path_root) emit_path(*node.path_root, host + ")/", host);
    if (node.rolled) {
      out_.push_back(UkvsRecord{SurtKey(host + ",*"), *node.desc, {}});
      return;
    }
    for (const auto& [token, child] : node.children) {
      emit_host(child, host.empty() ? token : host + "," + token);
    }
  }

  // `prefix` ends with '/' and names this node's children's parent.
  void emit_path(const TreeNode& node, const std::string& prefix, const std::string& host) {
    emit_own(node);
    if (node.rolled) {
      out_.push_back(UkvsRecord{SurtKey(prefix + "*"), *node.desc, {}});
      return;
    }
    for (const auto& [token, child] : node.children) {
      emit_path(child, prefix + token + "/", host);
    }
  }

  const CompactionParams& params_;
  TreeNode root_;
  std::vector<UkvsRecord> out_;
  std::uint64_t rollups_ = 0;
};

}  // namespace

std::vector<UkvsRecord> reference_prune(const std::vector<UkvsRecord>& records,
                                        const CompactionParams& params,
                                        std::uint64_t* rollups) {
  Pruner pruner(params);
  for (const auto& r : records) pruner.insert(r);
  return pruner.run(rollups);
}

}  // namespace mementomap
