#include <gtest/gtest.h>

#include <filesystem>

#include "qclab/dtree.hpp"
#include "qclab/io.hpp"

using namespace qclab;

namespace {

std::string data(const std::string& name) { return std::string(QCLAB_TEST_DATA) + "/" + name; }

std::string parse_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.message();
  }
  ADD_FAILURE() << "expected ParseError";
  return {};
}

}  // namespace

TEST(TruthTableFormat, RoundTrip) {
  const TruthTable g(3, {0, 0, 0, 1, 0, 1, 1, 1});
  EXPECT_EQ(parse_truth_table(format_truth_table(g)), g);
  EXPECT_EQ(load_truth_table(data("maj3.tt")), g);
}

TEST(TruthTableFormat, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error([] { parse_truth_table("arity=2\n01x0\n"); }).find("line 2"), std::string::npos);
  EXPECT_NE(parse_error([] { parse_truth_table("# c\n\narity=2\n010\n"); }).find("line 4"), std::string::npos);
  EXPECT_NE(parse_error([] { parse_truth_table("size=2\n0101\n"); }).find("line 1"), std::string::npos);
}

TEST(RelationFormat, RoundTripAndFile) {
  const Relation f(2, 3, {1, 6, 2, 7});
  EXPECT_EQ(parse_relation(format_relation(f)), f);
  const Relation x = load_relation(data("xor2.rel"));
  EXPECT_TRUE(x.accepts(bits_to_point("10"), 1));
  EXPECT_TRUE(x.accepts(bits_to_point("11"), 0));
}

TEST(RelationFormat, Errors) {
  EXPECT_NE(parse_error([] { parse_relation("arity=1 alphabet=2\n0: 0\n0: 1\n"); }).find("duplicate"),
            std::string::npos);
  EXPECT_NE(parse_error([] { parse_relation("arity=1 alphabet=2\n0: 0\n"); }).find("missing"), std::string::npos);
  EXPECT_NE(parse_error([] { parse_relation("arity=1 alphabet=2\n0: 0\n1: 2\n"); }).find("line 3"),
            std::string::npos);
}

TEST(DistFormat, RoundTripAndErrors) {
  const Dist d(1, {Rational(1, 3), Rational(2, 3)});
  EXPECT_EQ(parse_dist(format_dist(d)), d);
  EXPECT_EQ(format_dist(Dist::point_mass(1, 0)), "arity=1\n1/1\n0/1\n");
  EXPECT_NE(parse_error([] { parse_dist("arity=1\n1/2\nabc\n"); }).find("line 3"), std::string::npos);
  EXPECT_THROW(load_dist(data("bad_sum.dist")), QclabError);
}

TEST(Files, MissingFileIsIoError) {
  try {
    load_truth_table(data("does_not_exist.tt"));
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Files, RelationOrFunctionPromotesTables) {
  const Relation from_table = load_relation_or_function(data("xor2.tt"));
  EXPECT_EQ(from_table, load_relation(data("xor2.rel")));
}

TEST(TreeFormat, RoundTrip) {
  const std::string text = "(q 1 (q 2 (leaf 0) (leaf 1)) (leaf 2))";
  const DecisionTree t = parse_tree(text, 2);
  EXPECT_EQ(format_tree(t), text);
  EXPECT_EQ(parse_tree(" ( q 1\n(q 2 (leaf 0)(leaf 1)) (leaf 2) ) ", 2), t);
  EXPECT_THROW(parse_tree("(q 3 (leaf 0) (leaf 1))", 2), QclabError);
  EXPECT_THROW(parse_tree("(q 1 (leaf 0))", 2), QclabError);
}
