// qclab: command-line harness for the query-complexity laboratory.
//
// Every command prints line-delimited JSON records (keys sorted, rationals as
// strings). Exit status: 0 when every verdict passes, 1 on a failed verdict,
// 2 on an error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qclab/complexity.hpp"
#include "qclab/compose.hpp"
#include "qclab/dtree.hpp"
#include "qclab/io.hpp"
#include "qclab/simulate.hpp"
#include "qclab/sweep.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qclab;

namespace {

struct Config {
  std::string g, f, mu, lambda, tree, instance, out, claim = "all";
  int n = 0;
  int m = 0;
  int t = 1;
  std::string eps, theta, tol = "1/100";
  int max_iter = 20000;
  std::uint64_t seed = 1;
  std::int64_t samples = 100000;
  int scale_functions = 200;
  int instances = 100;
};

class Reporter {
 public:
  explicit Reporter(const std::string& out_dir) {
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      file_.open(fs::path(out_dir) / "report.jsonl");
      if (!file_) fail(ErrorCode::IoError, "cannot write report in " + out_dir);
    }
  }
  void emit(const json& record) {
    const std::string line = record.dump();
    std::cout << line << '\n';
    if (file_.is_open()) file_ << line << '\n';
  }
  void verdict(bool ok) { all_ok_ = all_ok_ && ok; }
  int exit_code() const { return all_ok_ ? 0 : 1; }

 private:
  std::ofstream file_;
  bool all_ok_ = true;
};

std::string rat(const Rational& r) { return to_string(r); }

json rat_list(const std::vector<Rational>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(rat(v));
  return out;
}

Rational require_rational(const std::string& text, const char* flag) {
  if (text.empty()) fail(ErrorCode::InvalidArgument, std::string("missing ") + flag);
  return parse_rational(text);
}

std::optional<Rational> optional_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_rational(text);
}

void require_path(const std::string& path, const char* flag) {
  if (path.empty()) fail(ErrorCode::InvalidArgument, std::string("missing ") + flag);
}

GameOptions game_options(const Config& cfg) {
  GameOptions options;
  options.tol = parse_rational(cfg.tol);
  options.max_iter = cfg.max_iter;
  return options;
}

void write_artifact(const Config& cfg, const std::string& name, const std::string& contents) {
  if (!cfg.out.empty()) write_file(fs::path(cfg.out) / name, contents);
}

json summary_record(const SweepSummary& s) {
  return json{{"record", "sweep"},     {"claim", s.claim},       {"fixtures", s.fixtures},
              {"checks", s.checks},    {"skipped", s.skipped},   {"violations", s.violations},
              {"tightest", s.tightest}, {"first_violation", s.first_violation},
              {"verdict", s.pass() ? "pass" : "fail"}};
}

// --- commands ---------------------------------------------------------------

void cmd_dce(const Config& cfg, Reporter& rep) {
  require_path(cfg.g, "--g");
  require_path(cfg.mu, "--mu");
  const Relation h = load_relation_or_function(cfg.g);
  const Dist mu = load_dist(cfg.mu);
  const Rational eps = require_rational(cfg.eps, "--eps");
  const int depth = dist_complexity(h, mu, eps);
  const auto best = best_success(h, mu, depth);
  write_artifact(cfg, "witness.tree", format_tree(best.witness) + "\n");
  rep.emit({{"record", "dce"},
            {"eps", rat(eps)},
            {"depth", depth},
            {"success", rat(best.success)},
            {"witness_tree", format_tree(best.witness)},
            {"verdict", "pass"}});
}

void cmd_rqc(const Config& cfg, Reporter& rep) {
  require_path(cfg.g, "--g");
  const Rational eps = require_rational(cfg.eps, "--eps");
  const GameOptions options = game_options(cfg);
  json record{{"record", "rqc"}, {"eps", rat(eps)}, {"tol", rat(options.tol)}};
  GameResult game = [&] {
    const std::string text = read_file(cfg.g);
    if (text.find("alphabet=") != std::string::npos) return rand_complexity(parse_relation(text), eps, options);
    const TruthTable g = parse_truth_table(text);
    const auto hard = hard_distribution(g, eps, options);
    record["certificate_depth"] = hard.certificate_depth;
    record["certified"] = hard.certified();
    rep.verdict(hard.certified());
    return hard.game;
  }();
  record["depth"] = game.depth;
  record["lower_value"] = rat(game.lower_value);
  record["upper_value"] = rat(game.upper_value);
  record["iterations"] = game.iterations;
  record["limit_hit"] = game.limit_hit;
  record["hard_dist"] = format_dist(game.hard_dist);
  record["witness_tree"] = format_tree(game.best_tree);
  rep.verdict(!game.limit_hit);
  const bool ok = !game.limit_hit && (!record.contains("certified") || record["certified"].get<bool>());
  record["verdict"] = ok ? "pass" : (game.limit_hit ? "partial" : "fail");
  write_artifact(cfg, "hard.dist", format_dist(game.hard_dist));
  write_artifact(cfg, "witness.tree", format_tree(game.best_tree) + "\n");
  rep.emit(record);
}

void cmd_build_instance(const Config& cfg, Reporter& rep) {
  require_path(cfg.g, "--g");
  require_path(cfg.f, "--f");
  require_path(cfg.out, "--out");
  const TruthTable g = load_truth_table(cfg.g);
  const Relation f = load_relation_or_function(cfg.f);
  if (cfg.n != 0 && cfg.n != f.arity()) fail(ErrorCode::ArityMismatch, "--n differs from the arity of f");
  if (cfg.m != 0 && cfg.m != g.arity()) fail(ErrorCode::ArityMismatch, "--m differs from the arity of g");
  const auto eps = optional_rational(cfg.eps);
  const Rational eps_value = eps ? *eps : default_epsilon(f.arity());
  json record{{"record", "build-instance"}};
  Dist mu = [&] {
    if (!cfg.mu.empty()) return load_dist(cfg.mu);
    const auto hard = hard_distribution(g, eps_value, game_options(cfg));
    record["hard_dist_depth"] = hard.depth;
    record["certificate_depth"] = hard.certificate_depth;
    return hard.mu;
  }();
  std::optional<Dist> lambda;
  if (!cfg.lambda.empty()) lambda = load_dist(cfg.lambda);
  const auto inst = make_instance(f, g, std::move(mu), std::move(lambda), eps_value, optional_rational(cfg.theta));
  const fs::path manifest = save_instance(inst, cfg.out, cfg.seed);
  record["manifest"] = manifest.filename().string();
  record["n"] = inst.n;
  record["m"] = inst.m;
  record["eps"] = rat(inst.epsilon);
  record["theta"] = rat(inst.theta);
  record["inner_complexity"] = inst.inner_complexity;
  record["conditioning_defined"] = conditioning_well_defined(inst.g, inst.mu, inst.inner_complexity);
  record["verdict"] = "pass";
  rep.emit(record);
}

ComposedInstance instance_from(const Config& cfg) {
  require_path(cfg.instance, "--instance");
  return load_instance(cfg.instance);
}

void cmd_simulate(const Config& cfg, Reporter& rep) {
  const ComposedInstance inst = instance_from(cfg);
  require_path(cfg.tree, "--tree");
  const DecisionTree tree = load_tree(cfg.tree, inst.arity());
  const Rational theta = cfg.theta.empty() ? inst.theta : parse_rational(cfg.theta);
  for (Point z = 0; z < cube_size(inst.n); ++z) {
    const auto reports = leaf_reports(inst, tree, z, theta);
    json leaves = json::array();
    for (const auto& r : reports) {
      json flags = json::array();
      for (bool flag : r.snip_flags) flags.push_back(flag ? 1 : 0);
      leaves.push_back({{"leaf", r.leaf_id}, {"p", rat(r.p)}, {"q", rat(r.q)}, {"snip", r.snip ? 1 : 0},
                        {"snip_flags", flags}});
    }
    json record{{"record", "leaves"}, {"z", point_to_bits(z, inst.n)}, {"leaves", leaves}};
    if (cfg.samples > 0) {
      const auto mc = monte_carlo_check(inst, tree, z, cfg.samples, cfg.seed + z * static_cast<std::uint64_t>(2 * cfg.samples));
      record["samples"] = mc.samples;
      record["counts"] = mc.counts;
      record["attempts"] = mc.attempts;
      record["max_sigma"] = mc.max_sigma;
      record["max_z_queries"] = mc.max_z_queries;
      record["budget_violations"] = mc.budget_violations;
      record["verdict"] = mc.pass() ? "pass" : "fail";
      rep.verdict(mc.pass());
    }
    rep.emit(record);
  }
  const auto trace = run_aprime(inst, tree, 0, cfg.seed);
  rep.emit({{"record", "trace"},
            {"z", point_to_bits(trace.z, inst.n)},
            {"seed", trace.rng_seed},
            {"leaf", trace.leaf},
            {"output", trace.output},
            {"z_queries", trace.z_queries},
            {"per_copy_codims", trace.per_copy_codims},
            {"b_queries", trace.b_queries}});
  const auto chain = success_chain(inst, tree, theta);
  json record{{"record", "success_chain"},
              {"theta", rat(chain.theta)},
              {"success_b", rat(chain.success_b)},
              {"success_aprime", rat(chain.success_aprime)},
              {"snipped_mass", rat(chain.snipped_mass)},
              {"lower_bound", rat(chain.lower_bound)},
              {"asymptotic_lower", rat(chain.asymptotic_lower)},
              {"worst_z_queries", chain.worst_z_queries},
              {"expected_z_queries", rat(chain.expected_z_queries)},
              {"budget", chain.budget}};
  if (chain.success_b_flat) record["success_b_flat"] = rat(*chain.success_b_flat);
  const bool ok = chain.holds() && chain.budget_ok() && chain.flat_consistent();
  record["verdict"] = ok ? "pass" : "fail";
  rep.verdict(ok);
  rep.emit(record);
}

void verify_one_instance(const Config& cfg, Reporter& rep) {
  const ComposedInstance inst = instance_from(cfg);
  require_path(cfg.tree, "--tree");
  const DecisionTree tree = load_tree(cfg.tree, inst.arity());
  const Rational theta = cfg.theta.empty() ? inst.theta : parse_rational(cfg.theta);
  for (Point z = 0; z < cube_size(inst.n); ++z) {
    const auto sim = verify_simileaf(inst, tree, z, theta);
    json record{{"record", "simileaf"},
                {"z", point_to_bits(z, inst.n)},
                {"theta", rat(theta)},
                {"lower_factor", rat(sim.lower_factor)},
                {"upper_factor", rat(sim.upper_factor)},
                {"upper_factor_reconstructed", true},
                {"leaves_checked", sim.leaves_checked},
                {"lower_violations", sim.lower_violations},
                {"upper_violations", sim.upper_violations},
                {"asymptotic_constants_hold", sim.asymptotic_constants_hold},
                {"verdict", sim.pass() ? "pass" : "fail"}};
    rep.verdict(sim.pass());
    rep.emit(record);
  }
  if (exact_sqrt(inst.delta0()) && inst.epsilon >= Rational(1, 4)) {
    for (Point z = 0; z < cube_size(inst.n); ++z) {
      const auto lil = verify_lilsnip(inst, tree, z);
      rep.verdict(lil.pass());
      rep.emit({{"record", "lilsnip"},
                {"z", point_to_bits(z, inst.n)},
                {"delta0", rat(lil.delta0)},
                {"per_copy_bound", rat(lil.per_copy_bound)},
                {"per_copy_mass", rat_list(lil.per_copy_mass)},
                {"snipped_mass", rat(lil.snipped_mass)},
                {"violating_copies", lil.violating_copies},
                {"asymptotic_bound_holds", lil.asymptotic_bound_holds},
                {"verdict", lil.pass() ? "pass" : "fail"}});
    }
  }
}

void cmd_verify(const Config& cfg, Reporter& rep) {
  if (!cfg.instance.empty()) {
    verify_one_instance(cfg, rep);
    return;
  }
  const std::vector<std::string> known{"all", "fullbias", "instances", "rbias", "unbias"};
  if (std::find(known.begin(), known.end(), cfg.claim) == known.end()) {
    fail(ErrorCode::InvalidArgument, "unknown claim " + cfg.claim);
  }
  const auto wants = [&](const std::string& name) { return cfg.claim == "all" || cfg.claim == name; };
  std::vector<SweepSummary> summaries;
  if (wants("fullbias")) summaries.push_back(sweep_fullbias({}));
  if (wants("instances")) {
    InstanceSweepConfig config;
    config.count = cfg.instances;
    config.seed = cfg.seed;
    const auto result = sweep_instances(config);
    summaries.push_back(result.simileaf);
    summaries.push_back(result.lilsnip);
    summaries.push_back(result.chain);
    summaries.push_back(result.budget);
  }
  if (wants("rbias")) summaries.push_back(sweep_rbias({}));
  if (wants("unbias")) {
    UnbiasSweepConfig config;
    config.sampled_functions = cfg.scale_functions;
    config.seed = cfg.seed;
    summaries.push_back(sweep_unbias(config));
  }
  std::sort(summaries.begin(), summaries.end(), [](const auto& a, const auto& b) { return a.claim < b.claim; });
  for (const auto& s : summaries) {
    rep.verdict(s.pass());
    rep.emit(summary_record(s));
  }
}

void cmd_xor_stack(const Config& cfg, Reporter& rep) {
  require_path(cfg.g, "--g");
  const TruthTable g = load_truth_table(cfg.g);
  const TruthTable stacked = xor_stack(g, cfg.t);
  write_artifact(cfg, "xor.tt", format_truth_table(stacked));
  json record{{"record", "xor-stack"}, {"t", cfg.t}, {"arity", stacked.arity()}};
  std::string bits;
  for (auto b : stacked.outputs()) bits += b ? '1' : '0';
  record["outputs"] = bits;
  if (!cfg.eps.empty()) {
    const auto game = rand_complexity(stacked, parse_rational(cfg.eps), game_options(cfg));
    record["eps"] = cfg.eps;
    record["depth"] = game.depth;
    record["lower_value"] = rat(game.lower_value);
    record["upper_value"] = rat(game.upper_value);
    record["limit_hit"] = game.limit_hit;
    rep.verdict(!game.limit_hit);
  }
  record["verdict"] = "pass";
  rep.emit(record);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact experiments on randomized query complexity of composed relations"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--g", cfg.g, "inner function (truth table; relations accepted where noted)");
    sub->add_option("--f", cfg.f, "outer relation or function");
    sub->add_option("--mu", cfg.mu, "distribution file");
    sub->add_option("--lambda", cfg.lambda, "distribution over {0,1}^n");
    sub->add_option("--tree", cfg.tree, "decision tree file");
    sub->add_option("--instance", cfg.instance, "instance manifest");
    sub->add_option("--n", cfg.n, "number of copies");
    sub->add_option("--m", cfg.m, "inner arity");
    sub->add_option("--t", cfg.t, "XOR stack height")->check(CLI::PositiveNumber);
    sub->add_option("--eps", cfg.eps, "error bound p/q");
    sub->add_option("--theta", cfg.theta, "snip threshold p/q");
    sub->add_option("--tol", cfg.tol, "game solver tolerance p/q");
    sub->add_option("--max-iter", cfg.max_iter, "game solver iteration cap");
    sub->add_option("--seed", cfg.seed, "root seed");
    sub->add_option("--samples", cfg.samples, "Monte-Carlo samples per z (0 disables)");
    sub->add_option("--out", cfg.out, "output directory for report.jsonl and artifacts");
  };

  std::string command;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"dce", "distributional complexity D^mu_eps and an optimal tree"},
      {"rqc", "randomized complexity through the minimax game, with certificate"},
      {"build-instance", "build and save a composed instance"},
      {"simulate", "run A' and report exact and sampled leaf laws"},
      {"verify", "run claim sweeps, or verify one instance"},
      {"xor-stack", "build g_t^xor and optionally measure its randomized complexity"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "verify") {
      sub->add_option("--claim", cfg.claim, "all, unbias, rbias, fullbias or instances");
      sub->add_option("--functions", cfg.scale_functions, "sampled 4-bit functions in the unbias sweep");
      sub->add_option("--instances", cfg.instances, "generated instances in the instance sweep");
    }
    sub->callback([&command, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    Reporter rep(cfg.out);
    if (command == "dce") cmd_dce(cfg, rep);
    else if (command == "rqc") cmd_rqc(cfg, rep);
    else if (command == "build-instance") cmd_build_instance(cfg, rep);
    else if (command == "simulate") cmd_simulate(cfg, rep);
    else if (command == "verify") cmd_verify(cfg, rep);
    else if (command == "xor-stack") cmd_xor_stack(cfg, rep);
    return rep.exit_code();
  } catch (const QclabError& e) {
    std::cout << json{{"record", "error"}, {"command", command}, {"error", error_code_name(e.code())},
                      {"message", e.message()}}.dump()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cout << json{{"record", "error"}, {"command", command}, {"error", "Internal"}, {"message", e.what()}}.dump()
              << '\n';
    return 2;
  }
}
