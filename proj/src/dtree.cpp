#include "qclab/dtree.hpp"

#include <algorithm>
#include <cctype>

#include "qclab/io.hpp"

namespace qclab {

DecisionTree DecisionTree::leaf(int arity, Label label) {
  if (arity < 0 || arity > caps().structured_arity) fail(ErrorCode::CapExceeded, "tree arity");
  DecisionTree tree;
  tree.arity_ = arity;
  Node node;
  node.label = label;
  tree.nodes_.push_back(node);
  tree.finish();
  return tree;
}

DecisionTree DecisionTree::query(int var, const DecisionTree& if0, const DecisionTree& if1) {
  if (if0.arity_ != if1.arity_) fail(ErrorCode::ArityMismatch, "subtrees have different arities");
  DecisionTree tree;
  tree.arity_ = if0.arity_;
  tree.nodes_.reserve(1 + if0.nodes_.size() + if1.nodes_.size());
  Node root;
  root.var = var;
  tree.nodes_.push_back(root);
  auto append = [&](const DecisionTree& sub, int bit) {
    const NodeId offset = static_cast<NodeId>(tree.nodes_.size());
    for (Node node : sub.nodes_) {
      for (auto& c : node.child) {
        if (c >= 0) c += offset;
      }
      node.parent = node.parent < 0 ? 0 : node.parent + offset;
      if (node.parent == 0 && node.parent_bit < 0) node.parent_bit = bit;
      tree.nodes_.push_back(node);
    }
    tree.nodes_[0].child[bit] = offset;
  };
  append(if0, 0);
  append(if1, 1);
  tree.finish();
  return tree;
}

void DecisionTree::finish() {
  leaves_.clear();
  depth_ = 0;
  // Pre-order arena: parents precede children, so one forward pass suffices.
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    Node& node = nodes_[id];
    node.depth = node.parent < 0 ? 0 : nodes_[node.parent].depth + 1;
    depth_ = std::max(depth_, node.depth);
    if (node.is_leaf()) {
      node.leaf_id = static_cast<LeafId>(leaves_.size());
      leaves_.push_back(id);
    } else {
      node.leaf_id = -1;
    }
  }
}

bool DecisionTree::structure_equal(const DecisionTree& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& a = nodes_[i];
    const Node& b = other.nodes_[i];
    if (a.var != b.var || a.child[0] != b.child[0] || a.child[1] != b.child[1]) return false;
    if (a.is_leaf() && a.label != b.label) return false;
  }
  return true;
}

const DecisionTree::Node& DecisionTree::node(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) fail(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return nodes_[id];
}

NodeId DecisionTree::leaf_node(LeafId leaf) const {
  if (leaf < 0 || leaf >= leaf_count()) fail(ErrorCode::UnknownNode, "leaf " + std::to_string(leaf));
  return leaves_[leaf];
}

std::vector<std::pair<int, int>> DecisionTree::path(NodeId id) const {
  std::vector<std::pair<int, int>> steps;
  for (NodeId cur = node(id).parent, from = id; cur >= 0; from = cur, cur = nodes_[cur].parent) {
    steps.emplace_back(nodes_[cur].var, nodes_[from].parent_bit);
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

std::vector<NodeId> DecisionTree::path_nodes(NodeId id) const {
  std::vector<NodeId> ids;
  node(id);
  for (NodeId cur = id; cur >= 0; cur = nodes_[cur].parent) ids.push_back(cur);
  std::reverse(ids.begin(), ids.end());
  return ids;
}

const char* tree_violation_name(TreeViolation v) {
  switch (v) {
    case TreeViolation::None: return "OK";
    case TreeViolation::VarOutOfRange: return "VarOutOfRange";
    case TreeViolation::ReadOnce: return "ReadOnce";
    case TreeViolation::DuplicateLeafId: return "DuplicateLeafId";
  }
  return "Unknown";
}

TreeVerdict validate(const DecisionTree& tree) {
  const auto& nodes = tree.nodes();
  std::vector<bool> seen_leaf(nodes.size(), false);
  for (NodeId id = 0; id < static_cast<NodeId>(nodes.size()); ++id) {
    const auto& node = nodes[id];
    if (node.is_leaf()) {
      if (node.leaf_id < 0 || node.leaf_id >= static_cast<int>(seen_leaf.size()) || seen_leaf[node.leaf_id]) {
        return {TreeViolation::DuplicateLeafId, id};
      }
      seen_leaf[node.leaf_id] = true;
      continue;
    }
    if (node.var < 0 || node.var >= tree.arity()) return {TreeViolation::VarOutOfRange, id};
    for (NodeId up = node.parent; up >= 0; up = nodes[up].parent) {
      if (nodes[up].var == node.var) return {TreeViolation::ReadOnce, id};
    }
  }
  return {};
}

void require_valid(const DecisionTree& tree) {
  const auto verdict = validate(tree);
  if (!verdict.ok()) {
    fail(ErrorCode::MalformedTree,
         std::string(tree_violation_name(verdict.violation)) + " at node " + std::to_string(verdict.node));
  }
}

Evaluation evaluate(const DecisionTree& tree, Point x) {
  if (x >= cube_size(tree.arity())) fail(ErrorCode::OutOfRange, "point outside the tree's cube");
  const auto& nodes = tree.nodes();
  NodeId cur = tree.root();
  int queries = 0;
  std::uint64_t asked = 0;
  while (!nodes[cur].is_leaf()) {
    const int var = nodes[cur].var;
    if (var < 0 || var >= tree.arity() || ((asked >> var) & 1u)) {
      fail(ErrorCode::MalformedTree, "invalid query at node " + std::to_string(cur));
    }
    asked |= std::uint64_t{1} << var;
    cur = nodes[cur].child[point_bit(x, var)];
    ++queries;
  }
  return {nodes[cur].label, nodes[cur].leaf_id, queries};
}

Subcube path_subcube(const DecisionTree& tree, NodeId id) {
  Subcube cube(tree.arity());
  for (const auto& [var, bit] : tree.path(id)) {
    if (var < 0 || var >= tree.arity() || cube.is_fixed(var)) {
      fail(ErrorCode::MalformedTree, "path to node " + std::to_string(id) + " is not read-once");
    }
    cube = cube.fixed(var, bit);
  }
  return cube;
}

BlockStructure::BlockStructure(int blocks, int width) : blocks_(blocks), width_(width) {
  if (blocks < 1 || width < 1) fail(ErrorCode::InvalidArgument, "block structure needs n, m >= 1");
  if (blocks * width > caps().structured_arity) fail(ErrorCode::CapExceeded, "n*m exceeds the structured cap");
}

std::vector<Subcube> block_subcubes(const DecisionTree& tree, NodeId id, const BlockStructure& blocks) {
  if (tree.arity() != blocks.arity()) fail(ErrorCode::ArityMismatch, "tree arity differs from n*m");
  std::vector<Subcube> cubes(static_cast<std::size_t>(blocks.blocks()), Subcube(blocks.width()));
  for (const auto& [var, bit] : tree.path(id)) {
    if (var < 0 || var >= tree.arity()) fail(ErrorCode::MalformedTree, "variable out of range");
    auto& cube = cubes[blocks.copy_of(var)];
    if (cube.is_fixed(blocks.within(var))) fail(ErrorCode::MalformedTree, "path is not read-once");
    cube = cube.fixed(blocks.within(var), bit);
  }
  return cubes;
}

std::vector<Rational> reach_probs_product(const DecisionTree& tree, const BlockStructure& blocks,
                                          std::span<const Dist> per_copy) {
  if (static_cast<int>(per_copy.size()) != blocks.blocks()) {
    fail(ErrorCode::ArityMismatch, "need one distribution per copy");
  }
  for (const auto& d : per_copy) {
    if (d.arity() != blocks.width()) fail(ErrorCode::ArityMismatch, "copy distribution arity differs from m");
  }
  std::vector<Rational> probs(static_cast<std::size_t>(tree.leaf_count()));
  for (LeafId leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    const auto cubes = block_subcubes(tree, tree.leaf_node(leaf), blocks);
    Rational p = 1;
    for (std::size_t i = 0; i < cubes.size() && p != 0; ++i) p *= subcube_prob(per_copy[i], cubes[i]);
    probs[leaf] = p;
  }
  return probs;
}

std::vector<Rational> reach_probs_flat(const DecisionTree& tree, const Dist& mu) {
  if (tree.arity() != mu.arity()) fail(ErrorCode::ArityMismatch, "tree and distribution arities differ");
  std::vector<Rational> probs(static_cast<std::size_t>(tree.leaf_count()));
  for (LeafId leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    probs[leaf] = subcube_prob(mu, path_subcube(tree, tree.leaf_node(leaf)));
  }
  return probs;
}

// --- Text format ------------------------------------------------------------

namespace {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  // Parsed nodes reference vars before the arity is known, so build a raw
  // description first.
  struct Raw {
    int var = -1;  // 0-based
    Label label = 0;
    std::vector<Raw> kids;
  };

  Raw parse_all() {
    Raw raw = parse_node();
    skip_space();
    if (pos_ != text_.size()) error("trailing input");
    return raw;
  }

 private:
  Raw parse_node() {
    expect('(');
    const std::string head = word();
    Raw raw;
    if (head == "leaf") {
      raw.label = static_cast<Label>(number(false));
    } else if (head == "q") {
      raw.var = static_cast<int>(number(true)) - 1;
      raw.kids.push_back(parse_node());
      raw.kids.push_back(parse_node());
    } else {
      error("expected 'q' or 'leaf', got '" + head + "'");
    }
    expect(')');
    return raw;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        if (text_[pos_] == '\n') ++line_;
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string word() {
    skip_space();
    std::string out;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) out += text_[pos_++];
    return out;
  }

  long number(bool positive) {
    skip_space();
    std::string digits;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) digits += text_[pos_++];
    if (digits.empty() || digits.size() > 9) error("expected a number");
    const long value = std::stol(digits);
    if (positive && value < 1) error("variables are 1-based");
    return value;
  }

  [[noreturn]] void error(const std::string& message) { detail::parse_fail(line_, message); }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

int max_var(const TreeParser::Raw& raw) {
  int best = raw.var;
  for (const auto& kid : raw.kids) best = std::max(best, max_var(kid));
  return best;
}

DecisionTree build(const TreeParser::Raw& raw, int arity) {
  if (raw.var < 0) return DecisionTree::leaf(arity, raw.label);
  return DecisionTree::query(raw.var, build(raw.kids[0], arity), build(raw.kids[1], arity));
}

void format_node(const DecisionTree& tree, NodeId id, std::string& out) {
  const auto& node = tree.node(id);
  if (node.is_leaf()) {
    out += "(leaf " + std::to_string(node.label) + ")";
    return;
  }
  out += "(q " + std::to_string(node.var + 1) + " ";
  format_node(tree, node.child[0], out);
  out += " ";
  format_node(tree, node.child[1], out);
  out += ")";
}

}  // namespace

DecisionTree parse_tree(std::string_view text, std::optional<int> arity) {
  TreeParser parser(text);
  const auto raw = parser.parse_all();
  const int needed = max_var(raw) + 1;
  const int k = arity.value_or(needed);
  if (needed > k) fail(ErrorCode::ParseError, "tree queries variable " + std::to_string(needed) + " beyond arity");
  DecisionTree tree = build(raw, k);
  require_valid(tree);
  return tree;
}

std::string format_tree(const DecisionTree& tree) {
  std::string out;
  format_node(tree, tree.root(), out);
  return out;
}

DecisionTree load_tree(const std::string& path, std::optional<int> arity) {
  const std::string text = read_file(path);
  try {
    return parse_tree(text, arity);
  } catch (const QclabError& e) {
    throw QclabError(e.code(), path + ": " + e.message());
  }
}

}  // namespace qclab
