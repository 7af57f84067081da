#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qclab/dtree.hpp"

using namespace qclab;

namespace {

DecisionTree leaf(int arity, int label) { return DecisionTree::leaf(arity, label); }

DecisionTree dictator(int arity) { return DecisionTree::query(0, leaf(arity, 0), leaf(arity, 1)); }

DecisionTree xor_tree() {
  return DecisionTree::query(0, DecisionTree::query(1, leaf(2, 0), leaf(2, 1)),
                             DecisionTree::query(1, leaf(2, 1), leaf(2, 0)));
}

}  // namespace

TEST(Evaluate, Examples) {
  const auto e0 = evaluate(leaf(3, 1), 5);
  EXPECT_EQ(e0.label, 1);
  EXPECT_EQ(e0.leaf, 0);
  EXPECT_EQ(e0.queries, 0);
  const auto e1 = evaluate(dictator(3), bits_to_point("101"));
  EXPECT_EQ(e1.label, 1);
  EXPECT_EQ(e1.queries, 1);
  const auto e2 = evaluate(xor_tree(), bits_to_point("10"));
  EXPECT_EQ(e2.label, 1);
  EXPECT_EQ(e2.queries, 2);
  EXPECT_THROW(evaluate(xor_tree(), 4), QclabError);
}

TEST(Arena, PreorderAndLeafIds) {
  const DecisionTree t = xor_tree();
  EXPECT_EQ(t.node_count(), 7u);
  EXPECT_EQ(t.leaf_count(), 4);
  EXPECT_EQ(t.depth(), 2);
  for (LeafId l = 0; l < t.leaf_count(); ++l) EXPECT_EQ(t.node(t.leaf_node(l)).leaf_id, l);
  EXPECT_EQ(evaluate(t, bits_to_point("11")).leaf, 3);
  try {
    t.node(7);
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownNode);
  }
  EXPECT_THROW(t.leaf_node(-1), QclabError);
}

TEST(PathSubcube, Examples) {
  const DecisionTree t = DecisionTree::query(2, leaf(3, 0), dictator(3));
  EXPECT_EQ(path_subcube(t, t.root()).codim(), 0);
  const NodeId v1 = t.node(t.root()).child[1];
  const Subcube c = path_subcube(t, v1);
  EXPECT_EQ(c.codim(), 1);
  EXPECT_TRUE(c.is_fixed(2));
  EXPECT_EQ(c.value(2), 1);
  for (LeafId l = 0; l < t.leaf_count(); ++l) {
    const NodeId id = t.leaf_node(l);
    EXPECT_EQ(path_subcube(t, id).codim(), t.node(id).depth);
  }
}

TEST(BlockSubcubes, Bookkeeping) {
  const BlockStructure blocks(4, 3);
  // copy 1 bits 1,2 then copy 3 bit 1
  const DecisionTree t = DecisionTree::query(
      0, DecisionTree::query(1, DecisionTree::query(6, leaf(12, 0), leaf(12, 1)), leaf(12, 0)), leaf(12, 1));
  const auto root = block_subcubes(t, t.root(), blocks);
  ASSERT_EQ(root.size(), 4u);
  for (const auto& c : root) EXPECT_EQ(c.codim(), 0);
  const auto deep = block_subcubes(t, t.leaf_node(0), blocks);
  EXPECT_EQ(deep[0].codim(), 2);
  EXPECT_EQ(deep[1].codim(), 0);
  EXPECT_EQ(deep[2].codim(), 1);
  EXPECT_EQ(deep[3].codim(), 0);

  const DecisionTree only2 = DecisionTree::query(3, leaf(12, 0), leaf(12, 1));
  const auto c2 = block_subcubes(only2, only2.leaf_node(0), blocks);
  EXPECT_EQ(c2[1].codim(), 1);
  EXPECT_EQ(c2[0].codim() + c2[2].codim() + c2[3].codim(), 0);
}

TEST(ReachProbs, Examples) {
  const BlockStructure blocks(2, 2);
  const std::vector<Dist> uniform{Dist::uniform(2), Dist::uniform(2)};
  EXPECT_EQ(reach_probs_product(leaf(4, 0), blocks, uniform), std::vector<Rational>{Rational(1)});
  EXPECT_EQ(reach_probs_product(dictator(4), blocks, uniform), (std::vector<Rational>{Rational(1, 2), Rational(1, 2)}));

  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const DecisionTree t = oracle::random_tree(rng, 4, 4, 2);
    const Point a = static_cast<Point>(rng() % 4), b = static_cast<Point>(rng() % 4);
    const std::vector<Dist> points{Dist::point_mass(2, a), Dist::point_mass(2, b)};
    const auto probs = reach_probs_product(t, blocks, points);
    const LeafId hit = evaluate(t, a | (b << 2)).leaf;
    for (LeafId l = 0; l < t.leaf_count(); ++l) EXPECT_EQ(probs[l], l == hit ? 1 : 0);
  }
}

TEST(ReachProbs, FlatMatchesPointwiseOracle) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const int k = 1 + static_cast<int>(rng() % 5);
    const auto w = oracle::random_weights(rng, k, 6, false);
    const Dist mu = Dist::from_weights(k, w);
    const DecisionTree t = oracle::random_tree(rng, k, k, 3);
    EXPECT_EQ(reach_probs_flat(t, mu), oracle::reach(t, mu.probs()));
  }
}

TEST(Validate, Violations) {
  const DecisionTree twice = DecisionTree::query(0, dictator(2), leaf(2, 0));
  const auto v = validate(twice);
  EXPECT_EQ(v.violation, TreeViolation::ReadOnce);
  EXPECT_EQ(v.node, 1);
  EXPECT_TRUE(validate(dictator(1)).ok());
  const DecisionTree deep = DecisionTree::query(0, DecisionTree::query(0, dictator(1), leaf(1, 0)), leaf(1, 1));
  EXPECT_EQ(deep.depth(), 3);
  EXPECT_EQ(validate(deep).violation, TreeViolation::ReadOnce);
  EXPECT_EQ(validate(DecisionTree::query(4, leaf(2, 0), leaf(2, 1))).violation, TreeViolation::VarOutOfRange);
  try {
    require_valid(twice);
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedTree);
  }
  EXPECT_THROW(evaluate(twice, 0), QclabError);
  EXPECT_EQ(evaluate(twice, 1).label, 0);
}

TEST(TreeText, ParseErrors) {
  try {
    parse_tree("(q 1\n(leaf 0)\n(lief 1))", 1);
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(e.message().find("line 3"), std::string::npos) << e.message();
  }
  EXPECT_EQ(parse_tree("(q 3 (leaf 0) (leaf 1))").arity(), 3);
  EXPECT_EQ(load_tree(std::string(QCLAB_TEST_DATA) + "/b4.tree", 4).depth(), 3);
}
