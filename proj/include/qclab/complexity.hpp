#pragma once

// Distributional query complexity by exact dynamic programming over subcubes,
// and randomized query complexity through the minimax principle.

#include <cstdint>
#include <span>
#include <vector>

#include "qclab/core.hpp"
#include "qclab/dtree.hpp"

namespace qclab {

/// Optimal depth-bounded decision tree for a relation under nonnegative
/// weights on its inputs (a distribution, or integer weights for fast sweeps).
///
/// value(C) = max( max_r mass_r(C), max_i value(C|x_i=0) + value(C|x_i=1) )
/// with the remaining depth equal to depth - codim(C), memoized over the 3^k
/// subcubes. Ties prefer answering, then the lowest label, then the lowest
/// query variable, so witnesses do not depend on evaluation order.
template <class W>
class SubcubeDP {
 public:
  SubcubeDP(const Relation& h, std::span<const W> weights, int depth);

  const W& value() const { return value_at(Subcube(arity_)); }
  DecisionTree witness() const;
  int depth() const { return depth_; }

 private:
  const W& value_at(const Subcube& cube) const;
  DecisionTree build(const Subcube& cube) const;

  const Relation& h_;
  std::span<const W> weights_;
  int arity_;
  int depth_;
  mutable std::vector<W> values_;
  // 0 = not computed, -(label+1) = answer, var+1 = query.
  mutable std::vector<int> choices_;
};

extern template class SubcubeDP<Rational>;
extern template class SubcubeDP<std::int64_t>;

struct DPResult {
  Rational success;
  DecisionTree witness;
};

DPResult best_success(const Relation& h, const Dist& mu, int depth);
DPResult best_success(const TruthTable& g, const Dist& mu, int depth);

/// Smallest depth d with best_success(h, mu, d) >= 1 - eps.
int dist_complexity(const Relation& h, const Dist& mu, const Rational& eps);
int dist_complexity(const TruthTable& g, const Dist& mu, const Rational& eps);

/// Same quantity for integer weights (exact; used by the exhaustive sweeps).
int dist_complexity_weighted(const Relation& h, std::span<const std::int64_t> weights, const Rational& eps);

/// Success of a fixed tree under mu: Pr_{x~mu}[(x, T(x)) in h].
Rational tree_success(const Relation& h, const DecisionTree& tree, const Dist& mu);

struct GameOptions {
  Rational tol{1, 100};
  int max_iter = 20000;
};

struct GameResult {
  int depth = 0;
  Rational lower_value;  // certified lower bound on the game value at `depth`
  Rational upper_value;  // certified upper bound on the game value at `depth`
  Dist hard_dist;        // adversary distribution certifying that depth-1 fails
  DecisionTree best_tree;
  int iterations = 0;  // summed over all depths searched
  bool limit_hit = false;
};

/// Searches d = 0, 1, ... for the first depth whose zero-sum game value
/// (adversary: input distributions, algorithm: depth-d trees, payoff:
/// success probability) reaches 1 - eps - tol. The adversary runs
/// multiplicative weights with rate tol/4; best_success is the exact
/// best-response oracle. Depth d is rejected once some adversary
/// distribution holds every depth-d tree below 1 - eps, and accepted once the
/// averaged best responses succeed with probability >= 1 - eps - tol on every
/// input. The returned depth satisfies R_{eps+tol} <= depth <= R_eps.
GameResult rand_complexity(const Relation& h, const Rational& eps, const GameOptions& options = {});
GameResult rand_complexity(const TruthTable& g, const Rational& eps, const GameOptions& options = {});

struct HardDistribution {
  Dist mu;
  int depth;              // game-search depth bound
  int certificate_depth;  // exact dist_complexity(g, mu, eps)
  GameResult game;

  bool certified() const { return certificate_depth >= depth; }
};

HardDistribution hard_distribution(const TruthTable& g, const Rational& eps, const GameOptions& options = {});

}  // namespace qclab
