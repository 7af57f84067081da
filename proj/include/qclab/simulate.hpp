#pragma once

// The randomized simulation A' of a tree B for f o g^n, its exact leaf law,
// snip labels, and exact checks of the bias and leaf-probability bounds.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qclab/compose.hpp"
#include "qclab/core.hpp"
#include "qclab/dtree.hpp"

namespace qclab {

/// Exact Bernoulli draws from a 64-bit seed. The generator is std::mt19937_64;
/// each draw concatenates two outputs into a 128-bit integer U and returns
/// U < p * 2^128, compared exactly.
class BranchSampler {
 public:
  explicit BranchSampler(std::uint64_t seed) : engine_(seed) {}
  bool bernoulli(const Rational& p);

 private:
  std::mt19937_64 engine_;
};

/// Seed of the k-th trace in a batch rooted at `root`.
inline std::uint64_t trace_seed(std::uint64_t root, std::uint64_t k) { return root + k; }

struct SimulationTrace {
  Point z = 0;
  LeafId leaf = -1;
  Label output = 0;
  std::vector<int> z_queries;  // copy indices in query order
  std::vector<int> per_copy_codims;
  int b_queries = 0;  // length of B's path
  std::uint64_t rng_seed = 0;

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

/// Runs A' on z. At a node querying bit j of copy i: when copy i has not been
/// charged and this query would be its c-th (c = inner_complexity), z_i is
/// queried first. The branch is drawn from mu_{z_i} conditioned on the current
/// copy-i subcube once z_i is known, and from mu otherwise.
SimulationTrace run_aprime(const ComposedInstance& inst, const DecisionTree& tree, Point z, std::uint64_t seed);

/// Leaf law of A' on z: per copy, the first min(d, c-1) outcomes under mu and
/// the remaining ones under mu_{z_i} conditioned on that prefix.
std::vector<Rational> exact_q(const ComposedInstance& inst, const DecisionTree& tree, Point z);

/// Leaf law of B on inputs drawn from gamma^z.
std::vector<Rational> exact_p(const ComposedInstance& inst, const DecisionTree& tree, Point z);

struct SnipLabels {
  std::vector<std::vector<bool>> flags;  // [leaf][copy]
  std::vector<bool> snip;                // [leaf], OR over copies
};

/// flags[l][i] = 1 iff some node on the path to l has copy-i codim < c and
/// copy-i bias >= theta.
SnipLabels snip_labels(const ComposedInstance& inst, const DecisionTree& tree, const Rational& theta);

struct LeafReport {
  LeafId leaf_id;
  Rational p;
  Rational q;
  std::vector<bool> snip_flags;
  bool snip;
  /// bias_trace[t][i]: copy-i bias at the t-th path node; empty when Pr_mu is zero.
  std::vector<std::vector<std::optional<Rational>>> bias_trace;
};

std::vector<LeafReport> leaf_reports(const ComposedInstance& inst, const DecisionTree& tree, Point z,
                                     const Rational& theta);

/// Leaf visit counts of `samples` independent runs of A' (seeds root+k).
std::vector<std::int64_t> sample_leaf_counts(const ComposedInstance& inst, const DecisionTree& tree, Point z,
                                             std::int64_t samples, std::uint64_t root_seed,
                                             int* max_z_queries = nullptr, int* budget_violations = nullptr);

/// (count - N q)^2 <= k^2 N q (1 - q), decided exactly.
bool within_sigmas(std::int64_t count, std::int64_t samples, const Rational& q, int k);

struct MonteCarloCheck {
  std::vector<std::int64_t> counts;  // from the last attempt
  std::int64_t samples = 0;
  std::uint64_t root_seed = 0;       // of the last attempt
  int attempts = 0;
  int max_z_queries = 0;
  int budget_violations = 0;         // over all attempts
  std::vector<LeafId> outliers;      // leaves outside k sigma in the last attempt
  double max_sigma = 0;              // informational only
  bool pass() const { return outliers.empty() && budget_violations == 0; }
};

/// Compares seeded leaf frequencies with exact_q at k sigma per leaf. A failed
/// attempt is retried up to `retries` times with the next disjoint block of seeds.
MonteCarloCheck monte_carlo_check(const ComposedInstance& inst, const DecisionTree& tree, Point z,
                                  std::int64_t samples, std::uint64_t root_seed, int k = 4, int retries = 1);

/// Every subcube of codim < c with positive mu mass meets both g^{-1}(0) and
/// g^{-1}(1) under mu. Without it A' may condition mu_b on an empty event.
bool conditioning_well_defined(const TruthTable& g, const Dist& mu, int inner_complexity);

// --- Claim verifiers --------------------------------------------------------

struct UnbiasViolation {
  Subcube cube;
  int b;
  char part;  // 'a' or 'b'
};

struct UnbiasReport {
  Rational delta;
  int subcubes_checked = 0;
  std::vector<UnbiasViolation> violations;
  Rational max_ratio;  // max Pr_mu[C] / Pr_{mu_b}[C] over checked (C, b)
  Rational min_ratio;
  bool pass() const { return violations.empty(); }
};

/// Checks (1-4d) Pr_{mu_b}[C] <= Pr_mu[C] <= (1+4d) Pr_{mu_b}[C] on all
/// subcubes with positive mass and bias <= d. HypothesisViolated unless
/// d in (0, 1/2] and the full cube has bias <= d.
UnbiasReport verify_unbias(const TruthTable& g, const Dist& mu, const Rational& delta);

struct RBiasReport {
  Rational eps;
  Rational delta;
  int inner_complexity = 0;
  Rational prob_mu;         // Pr_{y~mu}[codim(l_y) < c and bias(l_y) >= 2 sqrt(delta)]
  Rational prob_restricted[2];  // same under mu_0, mu_1
  bool pass_a = true;       // prob_mu < sqrt(delta)
  bool pass_b = true;       // prob_restricted[b] < 4 sqrt(delta) for both b
  bool pass() const { return pass_a && pass_b; }
};

/// Leaf labels of `tree` are ignored; only its query paths matter.
RBiasReport verify_rbias(const TruthTable& g, const Dist& mu, const Rational& eps, const DecisionTree& tree);
/// Same with c = D^mu_eps(g) supplied by the caller.
RBiasReport verify_rbias(const TruthTable& g, const Dist& mu, const Rational& eps, const DecisionTree& tree,
                         int inner_complexity);

struct SimileafReport {
  Rational theta;
  Rational lower_factor;  // max(0, 1-4 theta)^n
  Rational upper_factor;  // (1+4 theta)^n, reconstructed from the upper unbias bound
  int leaves_checked = 0;
  std::vector<LeafId> lower_violations;
  std::vector<LeafId> upper_violations;
  bool asymptotic_constants_hold = true;  // 8/9 p <= q <= 10/9 p on every snip-free leaf (informational)
  std::optional<Rational> min_ratio;  // min q/p over snip-free leaves with p > 0
  std::optional<Rational> max_ratio;
  bool pass() const { return lower_violations.empty() && upper_violations.empty(); }
};

SimileafReport verify_simileaf(const ComposedInstance& inst, const DecisionTree& tree, Point z, const Rational& theta);

struct LilsnipReport {
  Rational delta0;
  Rational theta;               // 2 sqrt(delta0)
  Rational per_copy_bound;      // 4 sqrt(delta0)
  std::vector<Rational> per_copy_mass;  // sum of p over leaves with snip^(i) = 1
  Rational snipped_mass;        // sum of p over leaves with snip = 1
  std::vector<int> violating_copies;
  bool aggregate_ok = true;     // snipped_mass <= n * per_copy_bound
  bool at_default_parameters = false;
  bool asymptotic_bound_holds = true;  // snipped_mass <= 4/n (informational)
  bool pass() const { return violating_copies.empty() && aggregate_ok; }
};

/// theta = 2 sqrt(1/2 - eps); HypothesisViolated unless eps in [1/4, 1/2) and
/// 1/2 - eps is the square of a rational.
LilsnipReport verify_lilsnip(const ComposedInstance& inst, const DecisionTree& tree, Point z);

/// 2 sqrt(1/2 - eps) for an instance, when rational.
Rational lilsnip_theta(const ComposedInstance& inst);

struct SuccessChainReport {
  Rational theta;
  Rational success_b;        // Pr_{x~gamma}[(x, B(x)) in f o g^n], leaf sums averaged over lambda
  Rational success_aprime;   // sum_z lambda(z) sum_{(z,b_l) in f} q_l^z
  Rational snipped_mass;     // sum_z lambda(z) sum_{snip(l)=1} p_l^z
  Rational lower_bound;      // max(0, 1-4 theta)^n (success_b - snipped_mass)
  std::optional<Rational> success_b_flat;  // same as success_b through the flat gamma, when small enough
  int worst_z_queries = 0;   // over all z and all reachable leaves
  Rational expected_z_queries;  // under lambda and A's randomness
  int budget = 0;            // floor(depth(B) / c)
  Rational asymptotic_lower;      // 8/9 (success_b - 4/n), informational
  bool holds() const { return success_aprime >= lower_bound; }
  bool budget_ok() const { return worst_z_queries <= budget; }
  bool flat_consistent() const { return !success_b_flat || *success_b_flat == success_b; }
};

SuccessChainReport success_chain(const ComposedInstance& inst, const DecisionTree& tree);
SuccessChainReport success_chain(const ComposedInstance& inst, const DecisionTree& tree, const Rational& theta);

struct SeedSearchResult {
  std::uint64_t seed = 0;
  Rational success;  // Pr_{z~lambda}[(z, A_seed(z)) in f], exact for this fixed seed
  std::int64_t seeds_tried = 0;
};

/// Fixes A's randomness by trying seeds root..root+budget-1 and keeping the
/// best. An upper-bound artifact, not the averaging argument's exact object.
SeedSearchResult best_fixed_seed(const ComposedInstance& inst, const DecisionTree& tree, std::uint64_t root_seed,
                                 std::int64_t budget);

}  // namespace qclab
