#pragma once

// Deterministic decision trees over {0,1}^k stored as a pre-order node arena.
// Node 0 is the root; leaf ids run 0..leaf_count()-1 from left to right
// (the 0-branch before the 1-branch).
//
// Text format (whitespace-insensitive, 1-based variables):
//   (q <var> <subtree if 0> <subtree if 1>)
//   (leaf <label>)

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qclab/core.hpp"

namespace qclab {

using NodeId = int;
using LeafId = int;

class DecisionTree {
 public:
  struct Node {
    int var = -1;  // queried variable (0-based), -1 for a leaf
    NodeId child[2] = {-1, -1};
    NodeId parent = -1;
    int parent_bit = -1;  // outcome that leads from parent to this node
    int depth = 0;
    Label label = 0;
    LeafId leaf_id = -1;

    bool is_leaf() const { return var < 0; }
  };

  static DecisionTree leaf(int arity, Label label);
  /// Queries `var`, continuing in `if0` or `if1`. Both subtrees must share the arity.
  static DecisionTree query(int var, const DecisionTree& if0, const DecisionTree& if1);

  int arity() const { return arity_; }
  NodeId root() const { return 0; }
  std::size_t node_count() const { return nodes_.size(); }
  int leaf_count() const { return static_cast<int>(leaves_.size()); }
  int depth() const { return depth_; }

  /// Throws UnknownNode for ids outside the tree.
  const Node& node(NodeId id) const;
  NodeId leaf_node(LeafId leaf) const;
  const std::vector<Node>& nodes() const { return nodes_; }

  /// (variable, outcome) pairs from the root down to `id`.
  std::vector<std::pair<int, int>> path(NodeId id) const;

  /// Nodes from the root to `id`, inclusive.
  std::vector<NodeId> path_nodes(NodeId id) const;

  friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
    return a.arity_ == b.arity_ && a.structure_equal(b);
  }

 private:
  DecisionTree() = default;
  void finish();
  bool structure_equal(const DecisionTree& other) const;

  int arity_ = 0;
  int depth_ = 0;
  std::vector<Node> nodes_;
  std::vector<NodeId> leaves_;
};

enum class TreeViolation { None, VarOutOfRange, ReadOnce, DuplicateLeafId };

const char* tree_violation_name(TreeViolation v);

struct TreeVerdict {
  TreeViolation violation = TreeViolation::None;
  NodeId node = -1;  // first offending node in pre-order

  bool ok() const { return violation == TreeViolation::None; }
};

/// Read-once paths, variables in range, unique leaf ids. Depth beyond the
/// arity is impossible without a repeated query and is reported as ReadOnce.
TreeVerdict validate(const DecisionTree& tree);

/// Throws MalformedTree unless `tree` validates.
void require_valid(const DecisionTree& tree);

struct Evaluation {
  Label label;
  LeafId leaf;
  int queries;
};

Evaluation evaluate(const DecisionTree& tree, Point x);

Subcube path_subcube(const DecisionTree& tree, NodeId id);

/// Flat variable v of an n*m-bit input is bit (v mod m) of copy (v div m).
class BlockStructure {
 public:
  BlockStructure(int blocks, int width);

  int blocks() const { return blocks_; }
  int width() const { return width_; }
  int arity() const { return blocks_ * width_; }
  int copy_of(int var) const { return var / width_; }
  int within(int var) const { return var % width_; }
  int flat(int copy, int bit) const { return copy * width_ + bit; }

  /// Bits of copy `copy` packed into an m-bit point.
  Point project(Point x, int copy) const {
    return static_cast<Point>((x >> (copy * width_)) & ((Point{1} << width_) - 1));
  }

 private:
  int blocks_;
  int width_;
};

/// Path subcube split by copy; codims sum to the node's depth.
std::vector<Subcube> block_subcubes(const DecisionTree& tree, NodeId id, const BlockStructure& blocks);

/// Leaf reach probabilities under the product of `per_copy` (indexed by leaf id).
std::vector<Rational> reach_probs_product(const DecisionTree& tree, const BlockStructure& blocks,
                                          std::span<const Dist> per_copy);

/// Leaf reach probabilities under an arbitrary flat distribution over the tree's cube.
std::vector<Rational> reach_probs_flat(const DecisionTree& tree, const Dist& mu);

DecisionTree parse_tree(std::string_view text, std::optional<int> arity = std::nullopt);
std::string format_tree(const DecisionTree& tree);

DecisionTree load_tree(const std::string& path, std::optional<int> arity = std::nullopt);

}  // namespace qclab
