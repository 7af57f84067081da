#include "qclab/sweep.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

#include "qclab/complexity.hpp"
#include "qclab/simulate.hpp"

namespace qclab {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

void compositions(std::vector<i64>& parts, std::size_t at, i64 left,
                  const std::function<void(std::span<const i64>)>& fn) {
  if (at + 1 == parts.size()) {
    parts[at] = left;
    fn(parts);
    return;
  }
  for (i64 v = left; v >= 0; --v) {
    parts[at] = v;
    compositions(parts, at + 1, left - v, fn);
  }
  parts[at] = 0;
}

std::vector<std::vector<i64>> grid_list(int arity, int max_total) {
  std::vector<std::vector<i64>> out;
  for_each_grid_weights(arity, max_total, [&](std::span<const i64> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

// Ternary subcube layout for integer kernels: entry t is either a point
// (all digits fixed) or splits on its lowest free digit into t + 3^j, t + 2*3^j.
struct TernaryLayout {
  int arity;
  std::uint32_t count;
  std::vector<int> split;  // -1 for a point, else the free digit
  std::vector<std::uint32_t> stride;
  std::vector<Point> point;
  std::vector<int> codim;

  explicit TernaryLayout(int k) : arity(k) {
    count = 1;
    for (int j = 0; j < k; ++j) {
      stride.push_back(count);
      count *= 3;
    }
    split.assign(count, -1);
    point.assign(count, 0);
    codim.assign(count, 0);
    for (std::uint32_t t = 0; t < count; ++t) {
      std::uint32_t rest = t;
      for (int j = 0; j < k; ++j, rest /= 3) {
        const auto digit = rest % 3;
        if (digit == 0) {
          if (split[t] < 0) split[t] = j;
        } else {
          ++codim[t];
          if (digit == 2) point[t] |= Point{1} << j;
        }
      }
    }
  }

  // out[t] = sum of values over the points of subcube t.
  template <class F>
  void fill(std::vector<i64>& out, F&& value_at) const {
    out.resize(count);
    for (std::uint32_t t = count; t-- > 0;) {
      const int j = split[t];
      out[t] = j < 0 ? value_at(point[t]) : out[t + stride[j]] + out[t + 2 * stride[j]];
    }
  }
};

std::string weights_text(std::span<const i64> w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

std::string table_text(const TruthTable& g) {
  std::string out;
  for (auto bit : g.outputs()) out += bit ? '1' : '0';
  return out;
}

std::string ternary_text(const TernaryLayout& layout, std::uint32_t t) {
  std::string out;
  for (int j = 0; j < layout.arity; ++j, t /= 3) out += "*01"[t % 3];
  return out;
}

// Keeps the largest fraction num/den seen.
struct MaxFraction {
  i128 num = -1;
  i128 den = 1;
  void offer(i128 n, i128 d) {
    if (num < 0 || n * den > num * d) {
      num = n;
      den = d;
    }
  }
  std::string text() const {
    if (num < 0) return "none";
    Rational value(mpz_class(std::to_string(static_cast<long long>(num))),
                   mpz_class(std::to_string(static_cast<long long>(den))));
    value.canonicalize();
    return to_string(value);
  }
};

void unbias_kernel(const TruthTable& g, const TernaryLayout& layout, const std::vector<std::vector<i64>>& grid,
                   const std::vector<Rational>& deltas, SweepSummary& summary, MaxFraction& tightest) {
  std::vector<i64> wc, w1c;
  for (const auto& w : grid) {
    i64 total = 0, total1 = 0;
    for (Point x = 0; x < w.size(); ++x) {
      total += w[x];
      if (g(x)) total1 += w[x];
    }
    const i64 total0 = total - total1;
    bool filled = false;
    for (const auto& delta : deltas) {
      const i64 a = delta.get_num().get_si();
      const i64 b = delta.get_den().get_si();
      ++summary.fixtures;
      if (std::abs(total0 - total1) * b > a * total) {
        ++summary.skipped;
        continue;
      }
      if (!filled) {
        layout.fill(wc, [&](Point x) { return w[x]; });
        layout.fill(w1c, [&](Point x) { return g(x) ? w[x] : 0; });
        filled = true;
      }
      for (std::uint32_t t = 0; t < layout.count; ++t) {
        const i64 c = wc[t];
        if (c == 0) continue;
        const i64 c1 = w1c[t];
        const i64 c0 = c - c1;
        if (std::abs(c0 - c1) * b > a * c) continue;
        for (int bit = 0; bit < 2; ++bit) {
          const i64 cb = bit ? c1 : c0;
          const i64 tb = bit ? total1 : total0;
          // Pr_mu[C] = c / total, Pr_{mu_b}[C] = cb / tb.
          const i128 lhs = static_cast<i128>(c) * tb * b;
          const i128 rhs_hi = static_cast<i128>(b + 4 * a) * cb * total;
          const i128 rhs_lo = static_cast<i128>(b - 4 * a) * cb * total;
          summary.checks += 2;
          tightest.offer(lhs, rhs_hi);
          if (lhs > rhs_hi || rhs_lo > lhs) {
            if (summary.violations++ == 0) {
              summary.first_violation = "g=" + table_text(g) + " w=" + weights_text(w) + " delta=" + to_string(delta) +
                                        " C=" + ternary_text(layout, t) + " b=" + std::to_string(bit);
            }
          }
        }
      }
    }
  }
}

void tree_leaves_rec(const TernaryLayout& layout, std::uint32_t t, int depth, std::vector<std::uint32_t>& acc,
                     const std::function<void(std::vector<std::uint32_t>&)>& fn) {
  acc.push_back(t);
  fn(acc);
  acc.pop_back();
  if (depth == 0) return;
  std::uint32_t rest = t;
  for (int j = 0; j < layout.arity; ++j, rest /= 3) {
    if (rest % 3 != 0) continue;
    const std::uint32_t t0 = t + layout.stride[j];
    const std::uint32_t t1 = t + 2 * layout.stride[j];
    tree_leaves_rec(layout, t0, depth - 1, acc, [&](std::vector<std::uint32_t>& inner) {
      tree_leaves_rec(layout, t1, depth - 1, inner, fn);
    });
  }
}

void tree_shape_rec(int arity, Point free, int depth, const std::function<void(const DecisionTree&)>& fn) {
  fn(DecisionTree::leaf(arity, 0));
  if (depth == 0) return;
  for (int j = 0; j < arity; ++j) {
    if (!((free >> j) & 1u)) continue;
    const Point rest = free & ~(Point{1} << j);
    tree_shape_rec(arity, rest, depth - 1, [&](const DecisionTree& t0) {
      tree_shape_rec(arity, rest, depth - 1, [&](const DecisionTree& t1) { fn(DecisionTree::query(j, t0, t1)); });
    });
  }
}

DecisionTree random_tree(std::mt19937_64& rng, int arity, Point free, int depth, int alphabet) {
  if (depth == 0 || free == 0 || rng() % 5 == 0) {
    return DecisionTree::leaf(arity, static_cast<Label>(rng() % static_cast<std::uint64_t>(alphabet)));
  }
  std::vector<int> vars;
  for (int j = 0; j < arity; ++j) {
    if ((free >> j) & 1u) vars.push_back(j);
  }
  const int var = vars[rng() % vars.size()];
  const Point rest = free & ~(Point{1} << var);
  auto t0 = random_tree(rng, arity, rest, depth - 1, alphabet);
  auto t1 = random_tree(rng, arity, rest, depth - 1, alphabet);
  return DecisionTree::query(var, t0, t1);
}

void note_violation(SweepSummary& summary, const std::string& what) {
  if (summary.violations++ == 0) summary.first_violation = what;
}

}  // namespace

void for_each_grid_weights(int arity, int max_total, const std::function<void(std::span<const std::int64_t>)>& fn) {
  if (arity < 0 || arity > 5) fail(ErrorCode::CapExceeded, "grid arity must be <= 5");
  if (max_total < 1) fail(ErrorCode::InvalidArgument, "grid total must be >= 1");
  std::vector<i64> parts(cube_size(arity), 0);
  for (i64 total = 1; total <= max_total; ++total) {
    compositions(parts, 0, total, [&](std::span<const i64> w) {
      i64 g = 0;
      for (auto v : w) g = std::gcd(g, v);
      if (g == 1) fn(w);
    });
  }
}

std::int64_t grid_size(int arity, int max_total) {
  std::int64_t count = 0;
  for_each_grid_weights(arity, max_total, [&](std::span<const i64>) { ++count; });
  return count;
}

void for_each_tree_shape(int arity, int max_depth, const std::function<void(const DecisionTree&)>& fn) {
  if (arity < 1 || arity > 8) fail(ErrorCode::CapExceeded, "tree shape arity must be in [1, 8]");
  tree_shape_rec(arity, static_cast<Point>(cube_size(arity) - 1), std::min(max_depth, arity), fn);
}

std::vector<std::vector<std::uint32_t>> tree_shape_leaves(int arity, int max_depth) {
  if (arity < 1 || arity > 8) fail(ErrorCode::CapExceeded, "tree shape arity must be in [1, 8]");
  const TernaryLayout layout(arity);
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> acc;
  tree_leaves_rec(layout, 0, std::min(max_depth, arity), acc, [&](std::vector<std::uint32_t>& leaves) { out.push_back(leaves); });
  return out;
}

SweepSummary sweep_unbias(const UnbiasSweepConfig& config) {
  SweepSummary summary;
  summary.claim = "unbias";
  MaxFraction tightest;
  for (int m = 1; m <= config.max_exhaustive_arity; ++m) {
    const TernaryLayout layout(m);
    const auto grid = grid_list(m, config.max_total);
    for (std::uint64_t table = 0; table < (std::uint64_t{1} << cube_size(m)); ++table) {
      const auto g = TruthTable::from_function(m, [&](Point x) { return static_cast<int>((table >> x) & 1u); });
      unbias_kernel(g, layout, grid, config.deltas, summary, tightest);
    }
  }
  if (config.sampled_functions > 0) {
    const int m = config.sampled_arity;
    const TernaryLayout layout(m);
    const auto grid = grid_list(m, config.max_total);
    std::mt19937_64 rng(config.seed);
    for (int k = 0; k < config.sampled_functions; ++k) {
      const std::uint64_t table = rng();
      const auto g = TruthTable::from_function(m, [&](Point x) { return static_cast<int>((table >> x) & 1u); });
      unbias_kernel(g, layout, grid, config.deltas, summary, tightest);
    }
  }
  summary.tightest = "max Pr_mu[C] / ((1+4d) Pr_mu_b[C]) = " + tightest.text();
  return summary;
}

SweepSummary sweep_rbias(const RBiasSweepConfig& config) {
  SweepSummary summary;
  summary.claim = "rbias";
  MaxFraction tightest_a, tightest_b;
  for (int m = 1; m <= config.max_arity; ++m) {
    const TernaryLayout layout(m);
    const auto grid = grid_list(m, config.max_total);
    const auto trees = tree_shape_leaves(m, config.max_depth);
    std::vector<i64> wc, w1c, flagged, flagged0, flagged1;
    for (std::uint64_t table = 0; table < (std::uint64_t{1} << cube_size(m)); ++table) {
      const auto g = TruthTable::from_function(m, [&](Point x) { return static_cast<int>((table >> x) & 1u); });
      const auto h = Relation::from_function(g);
      for (const auto& w : grid) {
        bool filled = false;
        for (const auto& eps : config.epsilons) {
          ++summary.fixtures;
          const int c = dist_complexity_weighted(h, w, eps);
          if (c == 0) {
            ++summary.skipped;
            continue;
          }
          if (!filled) {
            layout.fill(wc, [&](Point x) { return w[x]; });
            layout.fill(w1c, [&](Point x) { return g(x) ? w[x] : 0; });
            filled = true;
          }
          const Rational delta = Rational(1, 2) - eps;
          const i64 a = delta.get_num().get_si();
          const i64 b = delta.get_den().get_si();
          flagged.assign(layout.count, 0);
          flagged0.assign(layout.count, 0);
          flagged1.assign(layout.count, 0);
          for (std::uint32_t t = 0; t < layout.count; ++t) {
            const i64 mass = wc[t];
            if (mass == 0 || layout.codim[t] >= c) continue;
            const i64 diff = mass - 2 * w1c[t];
            // bias >= 2 sqrt(delta)  <=>  diff^2 b >= 4 a mass^2
            if (static_cast<i128>(diff) * diff * b < static_cast<i128>(4 * a) * mass * mass) continue;
            flagged[t] = mass;
            flagged1[t] = w1c[t];
            flagged0[t] = mass - w1c[t];
          }
          const i64 total = wc[0];
          const i64 total1 = w1c[0];
          const i64 total0 = total - total1;
          for (std::size_t k = 0; k < trees.size(); ++k) {
            i64 s = 0, s0 = 0, s1 = 0;
            for (auto t : trees[k]) {
              s += flagged[t];
              s0 += flagged0[t];
              s1 += flagged1[t];
            }
            summary.checks += 3;
            // (a) s/total < sqrt(delta): s^2 b < a total^2
            const i128 lhs_a = static_cast<i128>(s) * s * b;
            const i128 rhs_a = static_cast<i128>(a) * total * total;
            tightest_a.offer(lhs_a, rhs_a);
            bool ok = lhs_a < rhs_a;
            // (b) s_b/total_b < 4 sqrt(delta): s_b^2 b < 16 a total_b^2
            const i64 sb[2] = {s0, s1};
            const i64 tb[2] = {total0, total1};
            for (int bit = 0; bit < 2; ++bit) {
              const i128 lhs = static_cast<i128>(sb[bit]) * sb[bit] * b;
              const i128 rhs = static_cast<i128>(16 * a) * tb[bit] * tb[bit];
              if (tb[bit] > 0) tightest_b.offer(lhs, rhs);
              ok = ok && lhs < rhs;
            }
            if (!ok) {
              note_violation(summary, "g=" + table_text(g) + " w=" + weights_text(w) + " eps=" + to_string(eps) +
                                          " tree#" + std::to_string(k));
            }
          }
        }
      }
    }
  }
  summary.tightest = "max (Pr/sqrt(d))^2 part a = " + tightest_a.text() + ", max (Pr_b/(4 sqrt(d)))^2 part b = " +
                     tightest_b.text();
  return summary;
}

SweepSummary sweep_fullbias(const FullbiasSweepConfig& config) {
  SweepSummary summary;
  summary.claim = "fullbias";
  MaxFraction tightest;
  for (int m = 1; m <= config.max_arity; ++m) {
    const auto grid = grid_list(m, config.max_total);
    for (std::uint64_t table = 0; table < (std::uint64_t{1} << cube_size(m)); ++table) {
      const auto g = TruthTable::from_function(m, [&](Point x) { return static_cast<int>((table >> x) & 1u); });
      const auto h = Relation::from_function(g);
      for (const auto& w : grid) {
        i64 total = 0, total1 = 0;
        for (Point x = 0; x < w.size(); ++x) {
          total += w[x];
          if (g(x)) total1 += w[x];
        }
        const i64 total0 = total - total1;
        for (const auto& eps : config.epsilons) {
          ++summary.fixtures;
          if (dist_complexity_weighted(h, w, eps) == 0) {
            ++summary.skipped;
            continue;
          }
          const i64 a = eps.get_num().get_si();
          const i64 b = eps.get_den().get_si();
          summary.checks += 2;
          // min mass > eps and |total0 - total1| / total < 1 - 2 eps
          const bool mass_ok = std::min(total0, total1) * b > a * total;
          const bool bias_ok = std::abs(total0 - total1) * b < (b - 2 * a) * total;
          if (mass_ok) tightest.offer(static_cast<i128>(a) * total, static_cast<i128>(std::min(total0, total1)) * b);
          if (!mass_ok || !bias_ok) {
            note_violation(summary, "g=" + table_text(g) + " w=" + weights_text(w) + " eps=" + to_string(eps));
          }
        }
      }
    }
  }
  summary.tightest = "max eps / min_b Pr[g=b] = " + tightest.text();
  return summary;
}

std::vector<GeneratedInstance> generate_instances(const InstanceSweepConfig& config) {
  if (config.delta0s.empty()) fail(ErrorCode::InvalidArgument, "no delta0 values");
  std::mt19937_64 rng(config.seed);
  std::vector<GeneratedInstance> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < config.count) {
    if (++attempts > 200 * config.count + 1000) fail(ErrorCode::Unachievable, "instance generator made no progress");
    // Odd slots use a spiked mu: parity of the other bits on a heavy half-cube,
    // a light half-cube with random labels. This yields c >= 2 with high-bias
    // low-mass subcubes, so snipping actually occurs.
    const bool spiked = out.size() % 2 == 1;
    const int n = spiked ? 2 + static_cast<int>(rng() % 2) : 2 + static_cast<int>(rng() % 3);
    const int max_m = std::min(4, config.max_arity / n);
    if (max_m < 1 || (spiked && max_m < 3)) continue;
    const int m = spiked ? 3 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_m - 2))
                         : 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_m));
    // Spiked instances rarely reach c >= 2 below delta0 = 1/64, so they cycle through the first two values.
    const std::size_t choices = spiked ? std::min<std::size_t>(2, config.delta0s.size()) : config.delta0s.size();
    const Rational delta0 = config.delta0s[(out.size() / 2) % choices];
    const Rational eps = epsilon_from_delta(delta0);
    const Rational theta = 2 * *exact_sqrt(delta0);

    std::vector<std::uint8_t> outputs(cube_size(m));
    std::vector<i64> w(cube_size(m));
    const int spike_var = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
    const Point spike_bit = static_cast<Point>(rng() % 2);
    const Point others = static_cast<Point>(cube_size(m) - 1) & ~(Point{1} << spike_var);
    const i64 heavy = 4 + static_cast<i64>(rng() % 40);
    const std::uint64_t table = rng();
    for (Point x = 0; x < w.size(); ++x) {
      if (!spiked) {
        outputs[x] = (table >> x) & 1u;
        w[x] = 1 + static_cast<i64>(rng() % 4);
      } else if (point_bit(x, spike_var) == static_cast<int>(spike_bit)) {
        outputs[x] = rng() % 2;
        w[x] = 1 + static_cast<i64>(rng() % 3);
      } else {
        outputs[x] = std::popcount(x & others) & 1;
        w[x] = heavy + static_cast<i64>(rng() % 3);
      }
    }
    const TruthTable g(m, outputs);
    i64 mass[2] = {0, 0};
    for (Point x = 0; x < w.size(); ++x) mass[g(x)] += w[x];
    if (mass[0] == 0 || mass[1] == 0) continue;
    // Rescale the two classes to equal total mass, then optionally nudge one point.
    for (Point x = 0; x < w.size(); ++x) w[x] *= mass[1 - g(x)];
    if (rng() % 3 == 0) w[rng() % w.size()] += 1;
    const Dist mu = Dist::from_weights(m, w);
    if (bias(g, mu, Subcube(m)) > theta) continue;
    const int c = dist_complexity(g, mu, eps);
    if (c == 0 || (spiked && c < 2) || !conditioning_well_defined(g, mu, c)) continue;

    const int alphabet = 2 + static_cast<int>(rng() % 2);
    std::vector<Relation::LabelSet> accepted(cube_size(n));
    for (auto& set : accepted) {
      do {
        set = rng() & ((Relation::LabelSet{1} << alphabet) - 1);
      } while (set == 0);
    }
    Relation f(n, alphabet, std::move(accepted));
    std::vector<i64> lw(cube_size(n));
    for (auto& v : lw) v = static_cast<i64>(rng() % 4);
    if (std::all_of(lw.begin(), lw.end(), [](i64 v) { return v == 0; })) lw[0] = 1;
    auto inst = make_instance(std::move(f), g, mu, Dist::from_weights(n, lw), eps, theta);

    GeneratedInstance gen{std::move(inst), {}, ""};
    const int nm = n * m;
    const Point all = static_cast<Point>(cube_size(nm) - 1);
    for (int k = 0; k < config.trees_per_instance; ++k) {
      gen.trees.push_back(random_tree(rng, nm, all, std::min(nm, 7), alphabet));
    }
    if (nm <= 8) {
      const Relation composed = compose_relation(gen.inst.f, g, n);
      const Dist flat = gamma(gen.inst.lambda, mu, g).expand();
      gen.trees.push_back(best_success(composed, flat, std::min(nm, c * n)).witness);
    }
    gen.key = "inst" + std::to_string(out.size()) + "-n" + std::to_string(n) + "-m" + std::to_string(m) + "-c" +
              std::to_string(c) + "-d0_" + to_string(delta0);
    out.push_back(std::move(gen));
  }
  return out;
}

InstanceSweepResult sweep_instances(const InstanceSweepConfig& config) {
  InstanceSweepResult result;
  result.simileaf.claim = "simileaf";
  result.lilsnip.claim = "lilsnip";
  result.chain.claim = "success_chain";
  result.budget.claim = "query_budget";
  std::optional<Rational> min_slack;
  Rational max_snip_ratio = 0;
  for (const auto& gen : generate_instances(config)) {
    ++result.instances;
    const auto& inst = gen.inst;
    for (std::size_t k = 0; k < gen.trees.size(); ++k) {
      const auto& tree = gen.trees[k];
      const std::string where = gen.key + " tree#" + std::to_string(k);
      for (Point z = 0; z < cube_size(inst.n); ++z) {
        const std::string at = where + " z=" + point_to_bits(z, inst.n);
        const auto sim = verify_simileaf(inst, tree, z, inst.theta);
        ++result.simileaf.fixtures;
        result.simileaf.checks += 2 * sim.leaves_checked;
        if (!sim.pass()) note_violation(result.simileaf, at);
        if (sim.min_ratio && sim.lower_factor > 0) {
          const Rational slack = *sim.min_ratio / sim.lower_factor;
          if (!min_slack || slack < *min_slack) min_slack = slack;
        }

        const auto lil = verify_lilsnip(inst, tree, z);
        ++result.lilsnip.fixtures;
        result.lilsnip.checks += inst.n + 1;
        if (!lil.pass()) note_violation(result.lilsnip, at);
        for (const auto& mass : lil.per_copy_mass) max_snip_ratio = std::max(max_snip_ratio, Rational(mass / lil.per_copy_bound));

        for (int s = 0; s < config.traces_per_z; ++s) {
          const auto trace = run_aprime(inst, tree, z, trace_seed(config.seed, static_cast<std::uint64_t>(s)));
          const int used = static_cast<int>(trace.z_queries.size());
          ++result.budget.checks;
          if (used * inst.inner_complexity > trace.b_queries || used > tree.depth() / inst.inner_complexity) {
            note_violation(result.budget, at + " seed=" + std::to_string(trace.rng_seed));
          }
        }
      }
      const auto chain = success_chain(inst, tree);
      ++result.chain.fixtures;
      ++result.budget.fixtures;
      result.chain.checks += 2;
      ++result.budget.checks;
      if (!chain.holds() || !chain.flat_consistent()) note_violation(result.chain, where);
      if (!chain.budget_ok()) note_violation(result.budget, where + " worst-case");
    }
  }
  result.lilsnip.tightest = "max per-copy snipped mass / 4 sqrt(delta0) = " + to_string(max_snip_ratio);
  result.simileaf.tightest = min_slack ? "min q / ((1-4t)^n p) = " + to_string(*min_slack) : "none";
  return result;
}

}  // namespace qclab
