#include "qclab/complexity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace qclab {

namespace {

std::uint64_t pow3(int k) {
  std::uint64_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

}  // namespace

template <class W>
SubcubeDP<W>::SubcubeDP(const Relation& h, std::span<const W> weights, int depth)
    : h_(h), weights_(weights), arity_(h.arity()), depth_(std::clamp(depth, 0, h.arity())) {
  if (depth < 0) fail(ErrorCode::InvalidArgument, "depth must be >= 0");
  if (arity_ > caps().dp_arity) fail(ErrorCode::CapExceeded, "arity " + std::to_string(arity_) + " exceeds the DP cap");
  if (weights.size() != cube_size(arity_)) fail(ErrorCode::ArityMismatch, "weights and relation arities differ");
  const auto slots = pow3(arity_);
  values_.assign(slots, W{});
  choices_.assign(slots, 0);
}

template <class W>
const W& SubcubeDP<W>::value_at(const Subcube& cube) const {
  const auto index = cube.ternary_index();
  if (choices_[index] != 0) return values_[index];

  std::vector<W> mass(static_cast<std::size_t>(h_.alphabet()), W{});
  cube.for_each_point([&](Point x) {
    auto set = h_.accepted(x);
    while (set) {
      const int r = std::countr_zero(set);
      mass[r] += weights_[x];
      set &= set - 1;
    }
  });
  int choice = -1;
  W best = mass[0];
  for (int r = 1; r < h_.alphabet(); ++r) {
    if (mass[r] > best) {
      best = mass[r];
      choice = -(r + 1);
    }
  }
  if (cube.codim() < depth_) {
    for (int var = 0; var < arity_; ++var) {
      if (cube.is_fixed(var)) continue;
      W split = value_at(cube.fixed(var, 0));
      split += value_at(cube.fixed(var, 1));
      if (split > best) {
        best = std::move(split);
        choice = var + 1;
      }
    }
  }
  values_[index] = std::move(best);
  choices_[index] = choice;
  return values_[index];
}

template <class W>
DecisionTree SubcubeDP<W>::build(const Subcube& cube) const {
  value_at(cube);
  const int choice = choices_[cube.ternary_index()];
  if (choice < 0) return DecisionTree::leaf(arity_, -choice - 1);
  const int var = choice - 1;
  return DecisionTree::query(var, build(cube.fixed(var, 0)), build(cube.fixed(var, 1)));
}

template <class W>
DecisionTree SubcubeDP<W>::witness() const {
  return build(Subcube(arity_));
}

template class SubcubeDP<Rational>;
template class SubcubeDP<std::int64_t>;

DPResult best_success(const Relation& h, const Dist& mu, int depth) {
  if (mu.arity() != h.arity()) fail(ErrorCode::ArityMismatch, "distribution and relation arities differ");
  SubcubeDP<Rational> dp(h, mu.probs(), depth);
  return {dp.value(), dp.witness()};
}

DPResult best_success(const TruthTable& g, const Dist& mu, int depth) {
  return best_success(Relation::from_function(g), mu, depth);
}

int dist_complexity(const Relation& h, const Dist& mu, const Rational& eps) {
  if (eps < 0 || eps >= Rational(1, 2)) fail(ErrorCode::InvalidArgument, "eps must lie in [0, 1/2)");
  if (mu.arity() != h.arity()) fail(ErrorCode::ArityMismatch, "distribution and relation arities differ");
  const Rational target = 1 - eps;
  for (int d = 0; d <= h.arity(); ++d) {
    SubcubeDP<Rational> dp(h, mu.probs(), d);
    if (dp.value() >= target) return d;
  }
  fail(ErrorCode::Unachievable, "full-depth success stays below 1 - eps");
}

int dist_complexity(const TruthTable& g, const Dist& mu, const Rational& eps) {
  return dist_complexity(Relation::from_function(g), mu, eps);
}

int dist_complexity_weighted(const Relation& h, std::span<const std::int64_t> weights, const Rational& eps) {
  if (eps < 0 || eps >= Rational(1, 2)) fail(ErrorCode::InvalidArgument, "eps must lie in [0, 1/2)");
  std::int64_t total = 0;
  for (auto w : weights) total += w;
  // value / total >= 1 - eps  <=>  value * den >= (den - num) * total
  const Rational keep = 1 - eps;
  const std::int64_t num = keep.get_num().get_si();
  const std::int64_t den = keep.get_den().get_si();
  for (int d = 0; d <= h.arity(); ++d) {
    SubcubeDP<std::int64_t> dp(h, weights, d);
    if (dp.value() * den >= num * total) return d;
  }
  fail(ErrorCode::Unachievable, "full-depth success stays below 1 - eps");
}

Rational tree_success(const Relation& h, const DecisionTree& tree, const Dist& mu) {
  if (tree.arity() != h.arity() || mu.arity() != h.arity()) fail(ErrorCode::ArityMismatch, "tree_success arities");
  Rational success = 0;
  for (Point x = 0; x < mu.size(); ++x) {
    if (mu[x] != 0 && h.accepts(x, evaluate(tree, x).label)) success += mu[x];
  }
  return success;
}

// --- Game solver ------------------------------------------------------------

namespace {

constexpr std::int64_t kQuantum = std::int64_t{1} << 24;

// Full-support rational distribution with denominator 2^24 closest to `w`.
Dist quantize(int arity, const std::vector<double>& w) {
  double total = 0;
  for (double v : w) total += v;
  std::vector<std::int64_t> counts(w.size());
  std::int64_t sum = 0;
  std::size_t largest = 0;
  for (std::size_t x = 0; x < w.size(); ++x) {
    counts[x] = std::max<std::int64_t>(1, std::llround(w[x] / total * static_cast<double>(kQuantum)));
    sum += counts[x];
    if (counts[x] > counts[largest]) largest = x;
  }
  counts[largest] += kQuantum - sum;
  if (counts[largest] < 1) fail(ErrorCode::InvalidArgument, "quantization failed");
  return Dist::from_weights(arity, counts);
}

struct DepthOutcome {
  bool accepted = false;
  bool decided = false;
  Rational lower, upper;
  Dist upper_mu;
  DecisionTree last_tree;
  int iterations = 0;
};

DepthOutcome play_depth(const Relation& h, int depth, const Rational& eps, const GameOptions& options) {
  const int k = h.arity();
  const std::size_t n = cube_size(k);
  const Rational target = 1 - eps;
  const Rational accept_at = target - options.tol;
  const double rate = Rational(options.tol / 4).get_d();

  std::vector<std::int64_t> correct(n, 0);
  std::vector<double> weights(n, 1.0);
  DepthOutcome out{false, false, 0, 1, Dist::uniform(k), DecisionTree::leaf(k, 0), 0};
  bool have_upper = false;

  for (int t = 1; t <= options.max_iter; ++t) {
    const std::int64_t least = *std::min_element(correct.begin(), correct.end());
    for (std::size_t x = 0; x < n; ++x) weights[x] = std::exp(-rate * static_cast<double>(correct[x] - least));
    Dist mu = t == 1 ? Dist::uniform(k) : quantize(k, weights);

    DPResult response = best_success(h, mu, depth);
    if (!have_upper || response.success < out.upper) {
      out.upper = response.success;
      out.upper_mu = mu;
      have_upper = true;
    }
    for (Point x = 0; x < n; ++x) {
      if (h.accepts(x, evaluate(response.witness, x).label)) ++correct[x];
    }
    out.lower = Rational(static_cast<long>(*std::min_element(correct.begin(), correct.end())), static_cast<unsigned long>(t));
    out.lower.canonicalize();
    out.last_tree = std::move(response.witness);
    out.iterations = t;

    if (out.upper < target) {
      out.decided = true;
      out.accepted = false;
      return out;
    }
    if (out.lower >= accept_at) {
      out.decided = true;
      out.accepted = true;
      return out;
    }
  }
  return out;
}

}  // namespace

GameResult rand_complexity(const Relation& h, const Rational& eps, const GameOptions& options) {
  if (eps < 0 || eps >= Rational(1, 2)) fail(ErrorCode::InvalidArgument, "eps must lie in [0, 1/2)");
  if (options.tol <= 0) fail(ErrorCode::InvalidArgument, "tol must be positive");
  if (options.max_iter < 1) fail(ErrorCode::InvalidArgument, "max_iter must be positive");
  if (h.arity() > caps().dp_arity) fail(ErrorCode::CapExceeded, "arity exceeds the DP cap");

  GameResult result{0, 0, 0, Dist::uniform(h.arity()), DecisionTree::leaf(h.arity(), 0), 0, false};
  Dist certified = Dist::uniform(h.arity());
  for (int d = 0; d <= h.arity(); ++d) {
    DepthOutcome outcome = play_depth(h, d, eps, options);
    result.iterations += outcome.iterations;
    result.depth = d;
    result.lower_value = outcome.lower;
    result.upper_value = outcome.upper;
    result.best_tree = outcome.last_tree;
    result.hard_dist = certified;
    if (!outcome.decided) {
      result.limit_hit = true;
      return result;
    }
    if (outcome.accepted) return result;
    certified = outcome.upper_mu;
  }
  // Full depth always answers a total relation exactly, so the loop returns earlier.
  fail(ErrorCode::Unachievable, "no depth reached 1 - eps - tol");
}

GameResult rand_complexity(const TruthTable& g, const Rational& eps, const GameOptions& options) {
  return rand_complexity(Relation::from_function(g), eps, options);
}

HardDistribution hard_distribution(const TruthTable& g, const Rational& eps, const GameOptions& options) {
  GameResult game = rand_complexity(g, eps, options);
  const int certificate = dist_complexity(g, game.hard_dist, eps);
  return {game.hard_dist, game.depth, certificate, std::move(game)};
}

}  // namespace qclab
