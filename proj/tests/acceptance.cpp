// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
// Every comparison is exact unless a tolerance is printed with the line.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "qclab/complexity.hpp"
#include "qclab/simulate.hpp"
#include "qclab/sweep.hpp"

using namespace qclab;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int number, const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", number, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string summary_text(const SweepSummary& s) {
  std::ostringstream os;
  os << s.fixtures << " fixtures, " << s.skipped << " outside hypothesis, " << s.checks << " checks, "
     << s.violations << " violations; " << s.tightest;
  if (!s.first_violation.empty()) os << "; first violation " << s.first_violation;
  return os.str();
}

TruthTable id1() { return TruthTable(1, {0, 1}); }
TruthTable xor2() { return TruthTable(2, {0, 1, 1, 0}); }
TruthTable and2() { return TruthTable(2, {0, 0, 0, 1}); }
TruthTable maj3() { return TruthTable(3, {0, 0, 0, 1, 0, 1, 1, 1}); }

const Rational kThird(1, 3);
const Rational kTol(1, 100);  // game solver tolerance for every rand_complexity call

}  // namespace

int main() {
  criterion(1, "unbias sweep (m<=3 all g, 200 sampled g at m=4, grid totals<=6, delta in {1/8,1/4,1/2})", [] {
    const auto s = sweep_unbias(UnbiasSweepConfig{});
    return Outcome{s.pass() && s.checks > 0, summary_text(s)};
  });

  criterion(2, "R->bias sweep (m<=3 all g, grid totals<=8, all trees depth<=3, eps in {1/4,7/16})", [] {
    const auto s = sweep_rbias(RBiasSweepConfig{});
    return Outcome{s.pass() && s.checks > 0, summary_text(s)};
  });

  criterion(3, "fullbias sweep (m<=3 all g, grid totals<=8, eps in {1/4,1/3,5/12,7/16})", [] {
    const auto s = sweep_fullbias(FullbiasSweepConfig{});
    return Outcome{s.pass() && s.checks > 0, summary_text(s)};
  });

  criterion(4, "DP equals brute force over all trees (500 fixtures, arity<=4, exact)", [] {
    std::mt19937_64 rng(4);
    int mismatches = 0;
    for (int k = 0; k < 500; ++k) {
      const int arity = 1 + static_cast<int>(rng() % 4);
      const Relation h = oracle::random_relation(rng, arity, 1 + static_cast<int>(rng() % 3));
      const Dist mu = Dist::from_weights(arity, oracle::random_weights(rng, arity, 9, rng() % 2 == 0));
      const int depth = static_cast<int>(rng() % (arity + 1));
      const auto lib = best_success(h, mu, depth);
      if (lib.success != oracle::best_success(h, mu.probs(), depth) || tree_success(h, lib.witness, mu) != lib.success ||
          lib.witness.depth() > depth) {
        ++mismatches;
      }
    }
    return Outcome{mismatches == 0, std::to_string(mismatches) + " mismatches in 500"};
  });

  criterion(5, "minimax consistency (100 mu per id1, XOR2, AND2, MAJ3; eps=1/3, tol=1/100)", [] {
    std::mt19937_64 rng(5);
    std::ostringstream os;
    bool ok = true;
    for (const auto& g : {id1(), xor2(), and2(), maj3()}) {
      const auto hard = hard_distribution(g, kThird, GameOptions{kTol, 20000});
      const int oracle_cert = oracle::dist_complexity(Relation::from_function(g), hard.mu.probs(), kThird);
      int exceed = 0, worst = 0;
      for (int k = 0; k < 100; ++k) {
        const Dist mu = Dist::from_weights(g.arity(), oracle::random_weights(rng, g.arity(), 9, false));
        const int d = dist_complexity(g, mu, kThird);
        worst = std::max(worst, d);
        if (d > hard.depth) ++exceed;
      }
      const bool here = exceed == 0 && hard.certified() && oracle_cert == hard.certificate_depth && !hard.game.limit_hit;
      ok = ok && here;
      os << "m=" << g.arity() << " depth " << hard.depth << " cert " << hard.certificate_depth << " max D^mu " << worst
         << " exceed " << exceed << "; ";
    }
    return Outcome{ok, os.str()};
  });

  InstanceSweepConfig six;
  six.count = 50;
  six.max_arity = 10;
  const auto fifty = generate_instances(six);

  criterion(6, "simulator exactness (exact_q vs branch enumeration on 50 instances nm<=10; MC 1e5 at 4 sigma, 1 retry)", [&] {
    int compared = 0, mismatches = 0;
    for (const auto& gi : fifty) {
      for (const auto& t : gi.trees) {
        for (Point z = 0; z < cube_size(gi.inst.n); ++z) {
          ++compared;
          if (exact_q(gi.inst, t, z) != oracle::aprime_leaf_law(gi.inst, t, z)) ++mismatches;
        }
      }
    }
    // Monte Carlo on the deepest tree of five instances, including spiked ones (odd slots).
    int mc_runs = 0, mc_fail = 0;
    double worst_sigma = 0;
    for (std::size_t k = 0; k < 5 && k < fifty.size(); ++k) {
      const auto& gi = fifty[k];
      const DecisionTree* deepest = &gi.trees.front();
      for (const auto& t : gi.trees) {
        if (t.depth() > deepest->depth()) deepest = &t;
      }
      const Point z = static_cast<Point>(k % cube_size(gi.inst.n));
      const auto mc = monte_carlo_check(gi.inst, *deepest, z, 100000, 600000 + 1000000 * k, 4, 1);
      ++mc_runs;
      if (!mc.pass()) ++mc_fail;
      worst_sigma = std::max(worst_sigma, mc.max_sigma);
    }
    std::ostringstream os;
    os << compared << " (instance, tree, z) laws, " << mismatches << " mismatches; " << mc_runs << " MC runs, " << mc_fail
       << " failed, max |dev|/sigma " << worst_sigma;
    return Outcome{mismatches == 0 && mc_fail == 0 && compared > 0, os.str()};
  });

  InstanceSweepResult swept;
  bool swept_ok = false;
  std::string swept_error;
  try {
    swept = sweep_instances(InstanceSweepConfig{});
    swept_ok = true;
  } catch (const std::exception& e) {
    swept_error = e.what();
  }

  criterion(7, "query budget z-queries <= floor(depth(B)/c) over all traces", [&] {
    if (!swept_ok) return Outcome{false, swept_error};
    // Extra traces on the 50 instances of criterion 6.
    std::int64_t traces = 0, violations = 0;
    for (const auto& gi : fifty) {
      for (const auto& t : gi.trees) {
        const int budget = t.depth() / gi.inst.inner_complexity;
        for (Point z = 0; z < cube_size(gi.inst.n); ++z) {
          for (std::uint64_t k = 0; k < 50; ++k) {
            ++traces;
            if (static_cast<int>(run_aprime(gi.inst, t, z, trace_seed(7000, k)).z_queries.size()) > budget) ++violations;
          }
        }
      }
    }
    std::ostringstream os;
    os << traces << " traces, " << violations << " violations; instance sweep " << summary_text(swept.budget);
    return Outcome{violations == 0 && swept.budget.pass(), os.str()};
  });

  criterion(8, "simileaf / lilsnip / success chain on generated instances (nm<=10, theta=2 sqrt(delta0))", [&] {
    if (!swept_ok) return Outcome{false, swept_error};
    std::ostringstream os;
    os << swept.instances << " instances; simileaf " << summary_text(swept.simileaf) << " | lilsnip "
       << summary_text(swept.lilsnip) << " | chain " << summary_text(swept.chain);
    const bool ok = swept.simileaf.pass() && swept.lilsnip.pass() && swept.chain.pass() && swept.simileaf.checks > 0;
    return Outcome{ok, os.str()};
  });

  criterion(9, "XOR stack tables for tm<=12 and R depth monotone in t for id1 (t=1..3, eps=7/16, tol=1/100)", [] {
    std::mt19937_64 rng(9);
    std::vector<TruthTable> gs{id1(), xor2(), and2(), maj3()};
    for (int k = 0; k < 4; ++k) gs.push_back(oracle::random_function(rng, 1 + k));
    int tables = 0, wrong = 0;
    for (const auto& g : gs) {
      const int m = g.arity();
      for (int t = 1; t * m <= 12; ++t) {
        ++tables;
        const TruthTable s = xor_stack(g, t);
        for (Point x = 0; x < s.size(); ++x) {
          int parity = 0;
          for (int i = 0; i < t; ++i) parity ^= g((x >> (i * m)) & ((Point{1} << m) - 1));
          if (s(x) != parity) {
            ++wrong;
            break;
          }
        }
      }
    }
    std::vector<int> depths;
    bool limit = false;
    for (int t = 1; t <= 3; ++t) {
      const auto game = rand_complexity(xor_stack(id1(), t), Rational(7, 16), GameOptions{kTol, 20000});
      depths.push_back(game.depth);
      limit = limit || game.limit_hit;
    }
    const bool monotone = depths[0] <= depths[1] && depths[1] <= depths[2];
    std::ostringstream os;
    os << tables << " tables, " << wrong << " wrong; depths t=1,2,3: " << depths[0] << "," << depths[1] << ","
       << depths[2];
    return Outcome{wrong == 0 && monotone && !limit, os.str()};
  });

  criterion(10, "known values R_1/3(id1)=1, R_1/3(XOR2)=2, D^unif_1/3(AND2)=0 (tol=1/100)", [] {
    const auto r_id = rand_complexity(id1(), kThird, GameOptions{kTol, 20000});
    const auto r_xor = rand_complexity(xor2(), kThird, GameOptions{kTol, 20000});
    const int d_and = dist_complexity(and2(), Dist::uniform(2), kThird);
    // Oracle side: the certifying distributions force the depth, and the
    // full-depth tree bounds it from above.
    const int o_id = oracle::dist_complexity(Relation::from_function(id1()), r_id.hard_dist.probs(), kThird);
    const int o_xor = oracle::dist_complexity(Relation::from_function(xor2()), r_xor.hard_dist.probs(), kThird);
    const int o_and = oracle::dist_complexity(Relation::from_function(and2()), Dist::uniform(2).probs(), kThird);
    const bool ok = r_id.depth == 1 && r_xor.depth == 2 && d_and == 0 && o_id == 1 && o_xor == 2 && o_and == 0;
    std::ostringstream os;
    os << "R(id1)=" << r_id.depth << " oracle cert " << o_id << ", R(XOR2)=" << r_xor.depth << " oracle cert " << o_xor
       << ", D(AND2)=" << d_and << " oracle " << o_and;
    return Outcome{ok, os.str()};
  });

  return failures == 0 ? 0 : 1;
}
