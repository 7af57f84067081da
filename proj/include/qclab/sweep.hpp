#pragma once

// Exhaustive and sampled claim sweeps. Grid distributions are integer weight
// vectors; checks inside the inner loops are exact integer cross-multiplications.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qclab/compose.hpp"
#include "qclab/core.hpp"
#include "qclab/dtree.hpp"

namespace qclab {

/// Nonnegative integer weights on 2^arity points with total D for D = 1..max_total,
/// keeping only vectors whose gcd is 1 so each grid distribution appears once.
void for_each_grid_weights(int arity, int max_total, const std::function<void(std::span<const std::int64_t>)>& fn);
std::int64_t grid_size(int arity, int max_total);

/// Every read-once tree shape of depth <= max_depth on `arity` variables, all
/// leaves labeled 0, in a fixed order (leaf first, then queries by variable).
void for_each_tree_shape(int arity, int max_depth, const std::function<void(const DecisionTree&)>& fn);

/// Leaf subcubes (ternary indices) of every shape above, in the same order.
std::vector<std::vector<std::uint32_t>> tree_shape_leaves(int arity, int max_depth);

struct SweepSummary {
  std::string claim;
  std::int64_t fixtures = 0;  // (g, mu, parameter) combinations examined
  std::int64_t checks = 0;    // individual inequalities evaluated
  std::int64_t skipped = 0;   // fixtures failing the claim's hypothesis
  std::int64_t violations = 0;
  std::string first_violation;  // empty when none
  std::string tightest;         // closest approach to a bound, as text
  bool pass() const { return violations == 0; }
};

struct UnbiasSweepConfig {
  int max_exhaustive_arity = 3;
  int sampled_arity = 4;
  int sampled_functions = 200;
  int max_total = 6;
  std::vector<Rational> deltas{Rational(1, 8), Rational(1, 4), Rational(1, 2)};
  std::uint64_t seed = 1;
};

SweepSummary sweep_unbias(const UnbiasSweepConfig& config);

struct RBiasSweepConfig {
  int max_arity = 3;
  int max_total = 8;
  int max_depth = 3;
  std::vector<Rational> epsilons{Rational(1, 4), Rational(7, 16)};
};

SweepSummary sweep_rbias(const RBiasSweepConfig& config);

struct FullbiasSweepConfig {
  int max_arity = 3;
  int max_total = 8;
  std::vector<Rational> epsilons{Rational(1, 4), Rational(1, 3), Rational(5, 12), Rational(7, 16)};
};

SweepSummary sweep_fullbias(const FullbiasSweepConfig& config);

/// Random composed instance with c > 0, balanced or nearly balanced full-support mu,
/// and conditioning defined everywhere A' can condition.
struct GeneratedInstance {
  ComposedInstance inst;
  std::vector<DecisionTree> trees;
  std::string key;  // stable fixture name
};

struct InstanceSweepConfig {
  int count = 100;
  int max_arity = 10;  // n * m
  std::vector<Rational> delta0s{Rational(1, 16), Rational(1, 64), Rational(1, 256), Rational(1, 1024)};
  int trees_per_instance = 3;
  int traces_per_z = 20;
  std::uint64_t seed = 7;
};

std::vector<GeneratedInstance> generate_instances(const InstanceSweepConfig& config);

struct InstanceSweepResult {
  std::int64_t instances = 0;
  SweepSummary simileaf;
  SweepSummary lilsnip;
  SweepSummary chain;
  SweepSummary budget;
};

InstanceSweepResult sweep_instances(const InstanceSweepConfig& config);

}  // namespace qclab
