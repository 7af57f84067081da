#include "qclab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "qclab/complexity.hpp"

namespace qclab {

namespace {

// Outcomes along a leaf's path, grouped by copy: steps[i] lists (bit within
// copy i, outcome) in query order.
using CopySteps = std::vector<std::vector<std::pair<int, int>>>;

CopySteps copy_steps(const DecisionTree& tree, NodeId id, const BlockStructure& blocks) {
  CopySteps steps(static_cast<std::size_t>(blocks.blocks()));
  for (const auto& [var, bit] : tree.path(id)) {
    steps[blocks.copy_of(var)].emplace_back(blocks.within(var), bit);
  }
  return steps;
}

void require_compatible(const ComposedInstance& inst, const DecisionTree& tree, Point z) {
  if (tree.arity() != inst.arity()) fail(ErrorCode::ArityMismatch, "tree arity differs from n*m");
  if (z >= cube_size(inst.n)) fail(ErrorCode::OutOfRange, "z outside {0,1}^n");
  if (inst.inner_complexity <= 0) fail(ErrorCode::InnerComplexityZero, "inner complexity must be positive");
}

int z_query_count(const CopySteps& steps, int c) {
  int count = 0;
  for (const auto& s : steps) count += static_cast<int>(s.size()) >= c ? 1 : 0;
  return count;
}

// Copy-subcube biases memoized by ternary index; nullopt when Pr_mu is zero.
class BiasCache {
 public:
  BiasCache(const TruthTable& g, const Dist& mu) : g_(g), mu_(mu) {}

  const std::optional<Rational>& get(const Subcube& cube) {
    auto [it, inserted] = cache_.try_emplace(cube.ternary_index());
    if (inserted && subcube_prob(mu_, cube) > 0) it->second = bias(g_, mu_, cube);
    return it->second;
  }

 private:
  const TruthTable& g_;
  const Dist& mu_;
  std::unordered_map<std::uint64_t, std::optional<Rational>> cache_;
};

}  // namespace

bool BranchSampler::bernoulli(const Rational& p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  // Four 32-bit limbs keep the construction independent of unsigned long width.
  const std::uint64_t hi = engine_();
  const std::uint64_t lo = engine_();
  mpz_class u(static_cast<unsigned long>(hi >> 32));
  u = (u << 32) + static_cast<unsigned long>(hi & 0xffffffffu);
  u = (u << 32) + static_cast<unsigned long>(lo >> 32);
  u = (u << 32) + static_cast<unsigned long>(lo & 0xffffffffu);
  return u * p.get_den() < (mpz_class(p.get_num()) << 128);
}

SimulationTrace run_aprime(const ComposedInstance& inst, const DecisionTree& tree, Point z, std::uint64_t seed) {
  require_compatible(inst, tree, z);
  const int c = inst.inner_complexity;
  BranchSampler sampler(seed);
  std::vector<Subcube> current(static_cast<std::size_t>(inst.n), Subcube(inst.m));
  std::vector<bool> charged(static_cast<std::size_t>(inst.n), false);
  SimulationTrace trace;
  trace.z = z;
  trace.rng_seed = seed;
  NodeId id = tree.root();
  while (!tree.node(id).is_leaf()) {
    const auto& node = tree.node(id);
    const int i = inst.block.copy_of(node.var);
    const int j = inst.block.within(node.var);
    if (!charged[i] && current[i].codim() == c - 1) {
      charged[i] = true;
      trace.z_queries.push_back(i);
    }
    const Dist& dist = charged[i] ? inst.restricted(point_bit(z, i)) : inst.mu;
    const Subcube one = current[i].fixed(j, 1);
    const int bit = sampler.bernoulli(cond_prob(dist, one, current[i])) ? 1 : 0;
    current[i] = bit ? one : current[i].fixed(j, 0);
    id = node.child[bit];
    ++trace.b_queries;
  }
  const auto& leaf = tree.node(id);
  trace.leaf = leaf.leaf_id;
  trace.output = leaf.label;
  for (const auto& cube : current) trace.per_copy_codims.push_back(cube.codim());
  return trace;
}

std::vector<Rational> exact_q(const ComposedInstance& inst, const DecisionTree& tree, Point z) {
  require_compatible(inst, tree, z);
  const int c = inst.inner_complexity;
  std::vector<Rational> q(static_cast<std::size_t>(tree.leaf_count()), Rational(0));
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    const CopySteps steps = copy_steps(tree, tree.leaf_node(l), inst.block);
    // A zero-mass prefix makes the leaf unreachable before any conditioning on mu_{z_i}.
    std::vector<Subcube> prefixes;
    std::vector<Rational> prefix_mass;
    bool reachable = true;
    for (const auto& s : steps) {
      const std::size_t len = std::min(s.size(), static_cast<std::size_t>(c - 1));
      Subcube prefix(inst.m);
      for (std::size_t t = 0; t < len; ++t) prefix = prefix.fixed(s[t].first, s[t].second);
      prefix_mass.push_back(subcube_prob(inst.mu, prefix));
      if (prefix_mass.back() == 0) reachable = false;
      prefixes.push_back(prefix);
    }
    if (!reachable) continue;
    Rational value = 1;
    for (int i = 0; i < inst.n; ++i) {
      value *= prefix_mass[i];
      const auto& s = steps[i];
      if (static_cast<int>(s.size()) < c) continue;
      Subcube full = prefixes[i];
      for (std::size_t t = static_cast<std::size_t>(c - 1); t < s.size(); ++t) full = full.fixed(s[t].first, s[t].second);
      value *= cond_prob(inst.restricted(point_bit(z, i)), full, prefixes[i]);
    }
    q[l] = value;
  }
  return q;
}

std::vector<Rational> exact_p(const ComposedInstance& inst, const DecisionTree& tree, Point z) {
  require_compatible(inst, tree, z);
  std::vector<Dist> factors;
  for (int i = 0; i < inst.n; ++i) factors.push_back(inst.restricted(point_bit(z, i)));
  return reach_probs_product(tree, inst.block, factors);
}

SnipLabels snip_labels(const ComposedInstance& inst, const DecisionTree& tree, const Rational& theta) {
  if (tree.arity() != inst.arity()) fail(ErrorCode::ArityMismatch, "tree arity differs from n*m");
  const int c = inst.inner_complexity;
  BiasCache cache(inst.g, inst.mu);
  // marked[node][i]: some node from the root to here has copy-i codim < c and bias >= theta.
  std::vector<std::vector<bool>> marked(tree.node_count(), std::vector<bool>(static_cast<std::size_t>(inst.n)));
  for (NodeId id = 0; id < static_cast<NodeId>(tree.node_count()); ++id) {
    const auto& node = tree.node(id);
    if (node.parent >= 0) marked[id] = marked[node.parent];
    const auto cubes = block_subcubes(tree, id, inst.block);
    for (int i = 0; i < inst.n; ++i) {
      if (marked[id][i] || cubes[i].codim() >= c) continue;
      const auto& b = cache.get(cubes[i]);
      if (!b) {
        fail(ErrorCode::ZeroConditioningMass,
             "node " + std::to_string(id) + " copy " + std::to_string(i + 1) + ": Pr_mu[" + to_string(cubes[i]) + "] is zero");
      }
      if (*b >= theta) marked[id][i] = true;
    }
  }
  SnipLabels labels;
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    const auto& flags = marked[tree.leaf_node(l)];
    labels.flags.push_back(flags);
    labels.snip.push_back(std::any_of(flags.begin(), flags.end(), [](bool f) { return f; }));
  }
  return labels;
}

std::vector<LeafReport> leaf_reports(const ComposedInstance& inst, const DecisionTree& tree, Point z,
                                     const Rational& theta) {
  const auto p = exact_p(inst, tree, z);
  const auto q = exact_q(inst, tree, z);
  const auto labels = snip_labels(inst, tree, theta);
  BiasCache cache(inst.g, inst.mu);
  std::vector<LeafReport> reports;
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    LeafReport report{l, p[l], q[l], labels.flags[l], labels.snip[l], {}};
    for (NodeId id : tree.path_nodes(tree.leaf_node(l))) {
      std::vector<std::optional<Rational>> row;
      for (const auto& cube : block_subcubes(tree, id, inst.block)) row.push_back(cache.get(cube));
      report.bias_trace.push_back(std::move(row));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<std::int64_t> sample_leaf_counts(const ComposedInstance& inst, const DecisionTree& tree, Point z,
                                             std::int64_t samples, std::uint64_t root_seed, int* max_z_queries,
                                             int* budget_violations) {
  if (samples < 0) fail(ErrorCode::InvalidArgument, "sample count must be >= 0");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(tree.leaf_count()), 0);
  int worst = 0;
  int violations = 0;
  for (std::int64_t k = 0; k < samples; ++k) {
    const auto trace = run_aprime(inst, tree, z, trace_seed(root_seed, static_cast<std::uint64_t>(k)));
    ++counts[trace.leaf];
    const int used = static_cast<int>(trace.z_queries.size());
    worst = std::max(worst, used);
    if (used * inst.inner_complexity > trace.b_queries) ++violations;
  }
  if (max_z_queries) *max_z_queries = worst;
  if (budget_violations) *budget_violations = violations;
  return counts;
}

bool within_sigmas(std::int64_t count, std::int64_t samples, const Rational& q, int k) {
  const Rational diff = Rational(count) - Rational(samples) * q;
  return diff * diff <= Rational(k * k) * Rational(samples) * q * (1 - q);
}

MonteCarloCheck monte_carlo_check(const ComposedInstance& inst, const DecisionTree& tree, Point z,
                                  std::int64_t samples, std::uint64_t root_seed, int k, int retries) {
  if (samples <= 0) fail(ErrorCode::InvalidArgument, "sample count must be positive");
  const auto q = exact_q(inst, tree, z);
  MonteCarloCheck check;
  check.samples = samples;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    check.root_seed = root_seed + static_cast<std::uint64_t>(attempt) * static_cast<std::uint64_t>(samples);
    int worst = 0;
    int violations = 0;
    check.counts = sample_leaf_counts(inst, tree, z, samples, check.root_seed, &worst, &violations);
    check.attempts = attempt + 1;
    check.max_z_queries = std::max(check.max_z_queries, worst);
    check.budget_violations += violations;
    check.outliers.clear();
    check.max_sigma = 0;
    for (LeafId l = 0; l < tree.leaf_count(); ++l) {
      if (!within_sigmas(check.counts[l], samples, q[l], k)) check.outliers.push_back(l);
      const double mean = samples * q[l].get_d();
      const double sd = std::sqrt(mean * (1 - q[l].get_d()));
      if (sd > 0) check.max_sigma = std::max(check.max_sigma, std::abs(check.counts[l] - mean) / sd);
    }
    if (check.outliers.empty()) break;
  }
  return check;
}

bool conditioning_well_defined(const TruthTable& g, const Dist& mu, int inner_complexity) {
  if (mu.arity() != g.arity()) fail(ErrorCode::ArityMismatch, "distribution and function arities differ");
  for (const auto& cube : all_subcubes(g.arity())) {
    if (cube.codim() >= inner_complexity) continue;
    Rational mass[2] = {0, 0};
    cube.for_each_point([&](Point x) { mass[g(x)] += mu[x]; });
    if (mass[0] + mass[1] > 0 && (mass[0] == 0 || mass[1] == 0)) return false;
  }
  return true;
}

// --- Claim verifiers --------------------------------------------------------

UnbiasReport verify_unbias(const TruthTable& g, const Dist& mu, const Rational& delta) {
  if (delta <= 0 || delta > Rational(1, 2)) fail(ErrorCode::HypothesisViolated, "delta must lie in (0, 1/2]");
  const Subcube whole(g.arity());
  if (bias(g, mu, whole) > delta) fail(ErrorCode::HypothesisViolated, "full-cube bias exceeds delta");
  const Dist restricted[2] = {restrict_dist(mu, g, 0), restrict_dist(mu, g, 1)};
  UnbiasReport report;
  report.delta = delta;
  bool first = true;
  for (const auto& cube : all_subcubes(g.arity())) {
    const Rational pm = subcube_prob(mu, cube);
    if (pm == 0 || bias(g, mu, cube) > delta) continue;
    ++report.subcubes_checked;
    for (int b = 0; b < 2; ++b) {
      const Rational pb = subcube_prob(restricted[b], cube);
      if (pm > (1 + 4 * delta) * pb) report.violations.push_back({cube, b, 'a'});
      if ((1 - 4 * delta) * pb > pm) report.violations.push_back({cube, b, 'b'});
      if (pb == 0) continue;
      const Rational ratio = pm / pb;
      if (first || ratio > report.max_ratio) report.max_ratio = ratio;
      if (first || ratio < report.min_ratio) report.min_ratio = ratio;
      first = false;
    }
  }
  return report;
}

RBiasReport verify_rbias(const TruthTable& g, const Dist& mu, const Rational& eps, const DecisionTree& tree) {
  if (eps < Rational(1, 4) || eps >= Rational(1, 2)) fail(ErrorCode::HypothesisViolated, "eps must lie in [1/4, 1/2)");
  return verify_rbias(g, mu, eps, tree, dist_complexity(g, mu, eps));
}

RBiasReport verify_rbias(const TruthTable& g, const Dist& mu, const Rational& eps, const DecisionTree& tree,
                         int inner_complexity) {
  if (eps < Rational(1, 4) || eps >= Rational(1, 2)) fail(ErrorCode::HypothesisViolated, "eps must lie in [1/4, 1/2)");
  if (inner_complexity <= 0) fail(ErrorCode::HypothesisViolated, "D^mu_eps(g) must be positive");
  if (tree.arity() != g.arity()) fail(ErrorCode::ArityMismatch, "tree arity differs from g arity");
  RBiasReport report;
  report.eps = eps;
  report.delta = Rational(1, 2) - eps;
  report.inner_complexity = inner_complexity;
  report.prob_mu = 0;
  report.prob_restricted[0] = report.prob_restricted[1] = 0;
  Rational class_mass[2] = {preimage_mass(mu, g, 0), preimage_mass(mu, g, 1)};
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    const Subcube cube = path_subcube(tree, tree.leaf_node(l));
    if (cube.codim() >= inner_complexity) continue;
    Rational mass[2] = {0, 0};
    cube.for_each_point([&](Point x) { mass[g(x)] += mu[x]; });
    const Rational total = mass[0] + mass[1];
    if (total == 0) continue;
    if (compare_scaled_sqrt(abs(mass[0] - mass[1]) / total, 2, report.delta) < 0) continue;
    report.prob_mu += total;
    for (int b = 0; b < 2; ++b) {
      if (class_mass[b] > 0) report.prob_restricted[b] += mass[b] / class_mass[b];
    }
  }
  report.pass_a = compare_scaled_sqrt(report.prob_mu, 1, report.delta) < 0;
  report.pass_b = compare_scaled_sqrt(report.prob_restricted[0], 4, report.delta) < 0 &&
                  compare_scaled_sqrt(report.prob_restricted[1], 4, report.delta) < 0;
  return report;
}

SimileafReport verify_simileaf(const ComposedInstance& inst, const DecisionTree& tree, Point z, const Rational& theta) {
  if (theta < 0 || theta > Rational(1, 2)) fail(ErrorCode::HypothesisViolated, "theta must lie in [0, 1/2]");
  if (bias(inst.g, inst.mu, Subcube(inst.m)) > theta) fail(ErrorCode::HypothesisViolated, "full-cube bias exceeds theta");
  SimileafReport report;
  report.theta = theta;
  report.lower_factor = pow(clamp_nonnegative(1 - 4 * theta), static_cast<unsigned>(inst.n));
  report.upper_factor = pow(1 + 4 * theta, static_cast<unsigned>(inst.n));
  const auto p = exact_p(inst, tree, z);
  const auto q = exact_q(inst, tree, z);
  const auto labels = snip_labels(inst, tree, theta);
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    if (labels.snip[l]) continue;
    ++report.leaves_checked;
    if (report.lower_factor * p[l] > q[l]) report.lower_violations.push_back(l);
    if (q[l] > report.upper_factor * p[l]) report.upper_violations.push_back(l);
    if (Rational(8, 9) * p[l] > q[l] || q[l] > Rational(10, 9) * p[l]) report.asymptotic_constants_hold = false;
    if (p[l] == 0) continue;
    const Rational ratio = q[l] / p[l];
    if (!report.min_ratio || ratio < *report.min_ratio) report.min_ratio = ratio;
    if (!report.max_ratio || ratio > *report.max_ratio) report.max_ratio = ratio;
  }
  return report;
}

Rational lilsnip_theta(const ComposedInstance& inst) {
  if (inst.epsilon < Rational(1, 4) || inst.epsilon >= Rational(1, 2)) {
    fail(ErrorCode::HypothesisViolated, "eps must lie in [1/4, 1/2)");
  }
  const auto root = exact_sqrt(inst.delta0());
  if (!root) fail(ErrorCode::HypothesisViolated, "1/2 - eps = " + to_string(inst.delta0()) + " is not a rational square");
  return 2 * *root;
}

LilsnipReport verify_lilsnip(const ComposedInstance& inst, const DecisionTree& tree, Point z) {
  LilsnipReport report;
  report.delta0 = inst.delta0();
  report.theta = lilsnip_theta(inst);
  report.per_copy_bound = 2 * report.theta;
  const auto p = exact_p(inst, tree, z);
  const auto labels = snip_labels(inst, tree, report.theta);
  report.per_copy_mass.assign(static_cast<std::size_t>(inst.n), Rational(0));
  report.snipped_mass = 0;
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    for (int i = 0; i < inst.n; ++i) {
      if (labels.flags[l][i]) report.per_copy_mass[i] += p[l];
    }
    if (labels.snip[l]) report.snipped_mass += p[l];
  }
  for (int i = 0; i < inst.n; ++i) {
    if (report.per_copy_mass[i] > report.per_copy_bound) report.violating_copies.push_back(i);
  }
  report.aggregate_ok = report.snipped_mass <= inst.n * report.per_copy_bound;
  report.at_default_parameters = inst.epsilon == default_epsilon(inst.n);
  report.asymptotic_bound_holds = report.snipped_mass <= Rational(4, inst.n);
  return report;
}

SuccessChainReport success_chain(const ComposedInstance& inst, const DecisionTree& tree) {
  return success_chain(inst, tree, inst.theta);
}

SuccessChainReport success_chain(const ComposedInstance& inst, const DecisionTree& tree, const Rational& theta) {
  if (tree.arity() != inst.arity()) fail(ErrorCode::ArityMismatch, "tree arity differs from n*m");
  SuccessChainReport report;
  report.theta = theta;
  report.success_b = 0;
  report.success_aprime = 0;
  report.snipped_mass = 0;
  report.expected_z_queries = 0;
  const int c = inst.inner_complexity;
  const auto labels = snip_labels(inst, tree, theta);
  std::vector<int> z_counts;
  for (LeafId l = 0; l < tree.leaf_count(); ++l) {
    z_counts.push_back(z_query_count(copy_steps(tree, tree.leaf_node(l), inst.block), c));
    report.worst_z_queries = std::max(report.worst_z_queries, z_counts.back());
  }
  for (Point z = 0; z < cube_size(inst.n); ++z) {
    const Rational& weight = inst.lambda[z];
    if (weight == 0) continue;
    const auto p = exact_p(inst, tree, z);
    const auto q = exact_q(inst, tree, z);
    for (LeafId l = 0; l < tree.leaf_count(); ++l) {
      const bool correct = inst.f.accepts(z, tree.node(tree.leaf_node(l)).label);
      if (correct) {
        report.success_b += weight * p[l];
        report.success_aprime += weight * q[l];
      }
      if (labels.snip[l]) report.snipped_mass += weight * p[l];
      report.expected_z_queries += weight * q[l] * z_counts[l];
    }
  }
  report.lower_bound = pow(clamp_nonnegative(1 - 4 * theta), static_cast<unsigned>(inst.n)) *
                       (report.success_b - report.snipped_mass);
  report.budget = tree.depth() / c;
  report.asymptotic_lower = Rational(8, 9) * (report.success_b - Rational(4, inst.n));
  if (inst.arity() <= caps().flat_arity) {
    const Relation composed = compose_relation(inst.f, inst.g, inst.n);
    report.success_b_flat = tree_success(composed, tree, gamma(inst.lambda, inst.mu, inst.g).expand());
  }
  return report;
}

SeedSearchResult best_fixed_seed(const ComposedInstance& inst, const DecisionTree& tree, std::uint64_t root_seed,
                                 std::int64_t budget) {
  if (budget <= 0) fail(ErrorCode::InvalidArgument, "seed budget must be positive");
  SeedSearchResult best;
  for (std::int64_t k = 0; k < budget; ++k) {
    const std::uint64_t seed = trace_seed(root_seed, static_cast<std::uint64_t>(k));
    Rational success = 0;
    for (Point z = 0; z < cube_size(inst.n); ++z) {
      if (inst.lambda[z] == 0) continue;
      if (inst.f.accepts(z, run_aprime(inst, tree, z, seed).output)) success += inst.lambda[z];
    }
    if (k == 0 || success > best.success) {
      best.seed = seed;
      best.success = success;
    }
  }
  best.seeds_tried = budget;
  return best;
}

}  // namespace qclab
