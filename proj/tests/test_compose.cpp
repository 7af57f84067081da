#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "qclab/complexity.hpp"
#include "qclab/compose.hpp"
#include "qclab/io.hpp"

using namespace qclab;

namespace {

TruthTable id1() { return TruthTable(1, {0, 1}); }
TruthTable and2() { return TruthTable(2, {0, 0, 0, 1}); }
TruthTable xor2() { return TruthTable(2, {0, 1, 1, 0}); }

Relation accept_all(int n, int alphabet) {
  return Relation(n, alphabet, std::vector<Relation::LabelSet>(cube_size(n), (Relation::LabelSet{1} << alphabet) - 1));
}

}  // namespace

TEST(ComposeRelation, Examples) {
  const Relation f = Relation::from_function(xor2());
  const Relation h = compose_relation(f, and2(), 2);
  EXPECT_EQ(h.arity(), 4);
  EXPECT_EQ(h.accepted(bits_to_point("1101")), 0b10u);
  const Relation all = compose_relation(accept_all(2, 3), and2(), 2);
  for (Point x = 0; x < 16; ++x) EXPECT_EQ(all.accepted(x), 0b111u);
  const TruthTable g = TruthTable(3, {1, 0, 0, 1, 1, 1, 0, 0});
  EXPECT_EQ(compose_relation(Relation::from_function(id1()), g, 1), Relation::from_function(g));
  EXPECT_THROW(compose_relation(f, and2(), 3), QclabError);
}

TEST(ComposeRelation, MatchesBlockwiseOracle) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 3);
    const Relation f = oracle::random_relation(rng, n, 3);
    const TruthTable g = oracle::random_function(rng, m);
    const Relation h = compose_relation(f, g, n);
    for (Point x = 0; x < cube_size(n * m); ++x) EXPECT_EQ(h.accepted(x), oracle::composed_accepted(f, g, n, x));
  }
}

TEST(GammaZ, Examples) {
  const Dist u = Dist::uniform(2);
  EXPECT_EQ(gamma_z(u, and2(), 1, 1).expand(), Dist::point_mass(2, 3));
  const Dist mu = Dist::from_weights(2, std::vector<std::int64_t>{1, 2, 3, 4});
  const ProductDist g00 = gamma_z(mu, xor2(), 0, 2);
  const Dist mu0 = restrict_dist(mu, xor2(), 0);
  for (Point x = 0; x < 16; ++x) EXPECT_EQ(g00.prob(x), mu0[x & 3] * mu0[x >> 2]);
}

TEST(GammaZ, SupportRespectsRelation) {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 3);
    TruthTable g = oracle::random_function(rng, m);
    if (preimage_mass(Dist::uniform(m), g, 0) == 0 || preimage_mass(Dist::uniform(m), g, 1) == 0) continue;
    const Relation f = oracle::random_relation(rng, n, 3);
    const Relation h = compose_relation(f, g, n);
    const Dist mu = Dist::from_weights(m, oracle::random_weights(rng, m, 4, true));
    for (Point z = 0; z < cube_size(n); ++z) {
      const Dist flat = gamma_z(mu, g, z, n).expand();
      for (Point x = 0; x < flat.size(); ++x) {
        if (flat[x] > 0) EXPECT_EQ(h.accepted(x), f.accepted(z));
      }
    }
  }
}

TEST(Gamma, Examples) {
  const Dist mu = Dist::from_weights(2, std::vector<std::int64_t>{1, 2, 2, 3});
  const MixtureDist point = gamma(Dist::point_mass(2, 2), mu, xor2());
  EXPECT_EQ(point.expand(), gamma_z(mu, xor2(), 2, 2).expand());
  // XOR under this mu is balanced: Pr[g=1] = 4/8.
  EXPECT_EQ(gamma(Dist::uniform(1), mu, xor2()).expand(), mu);

  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const Dist lam = Dist::from_weights(2, oracle::random_weights(rng, 2, 5, false));
    const Dist m2 = Dist::from_weights(2, oracle::random_weights(rng, 2, 5, true));
    const Dist flat = gamma(lam, m2, xor2()).expand();
    Rational total = 0;
    for (const auto& p : flat.probs()) total += p;
    EXPECT_EQ(total, 1);
  }
}

TEST(XorStack, Examples) {
  EXPECT_EQ(xor_stack(id1(), 2), xor2());
  EXPECT_EQ(xor_stack(and2(), 1), and2());
  EXPECT_EQ(xor_stack(and2(), 2)(bits_to_point("1111")), 0);
  EXPECT_EQ(xor_stack(xor_stack(id1(), 2), 2), xor_stack(id1(), 4));
  EXPECT_THROW(xor_stack(and2(), 0), QclabError);
  EXPECT_THROW(xor_stack(and2(), 9), QclabError);
}

TEST(Parameters, Defaults) {
  EXPECT_EQ(default_epsilon(2), Rational(7, 16));
  EXPECT_EQ(default_theta(4), Rational(1, 8));
  EXPECT_EQ(epsilon_from_delta(Rational(1, 256)), Rational(127, 256));
  EXPECT_THROW(epsilon_from_delta(Rational(1, 2)), QclabError);
}

TEST(MakeInstance, ComputesInnerComplexity) {
  const auto inst =
      make_instance(Relation::from_function(xor2()), xor2(), Dist::uniform(2), std::nullopt, Rational(1, 4));
  EXPECT_EQ(inst.inner_complexity, 2);
  EXPECT_EQ(inst.n, 2);
  EXPECT_EQ(inst.lambda, Dist::uniform(2));
  EXPECT_EQ(inst.theta, Rational(1, 2));
  try {
    make_instance(Relation::from_function(xor2()), and2(), Dist::uniform(2), std::nullopt, Rational(1, 3));
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InnerComplexityZero);
  }
  try {
    make_instance(Relation::from_function(xor2()), and2(), Dist::point_mass(2, 0), std::nullopt, Rational(1, 3));
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroConditioningMass);
  }
}

TEST(Manifest, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "qclab_manifest_test";
  std::filesystem::remove_all(dir);
  const auto inst = make_instance(Relation::from_function(xor2()), xor2(),
                                  Dist::from_weights(2, std::vector<std::int64_t>{1, 2, 2, 1}),
                                  Dist::from_weights(2, std::vector<std::int64_t>{1, 1, 1, 5}), Rational(1, 4));
  const auto path = save_instance(inst, dir, 42);
  const auto back = load_instance(path);
  EXPECT_EQ(back.g, inst.g);
  EXPECT_EQ(back.f, inst.f);
  EXPECT_EQ(back.mu, inst.mu);
  EXPECT_EQ(back.lambda, inst.lambda);
  EXPECT_EQ(back.epsilon, inst.epsilon);
  EXPECT_EQ(back.theta, inst.theta);
  EXPECT_EQ(back.inner_complexity, inst.inner_complexity);
  const Manifest m = parse_manifest(read_file(path));
  EXPECT_EQ(m.seed, 42u);
  std::filesystem::remove_all(dir);
  try {
    parse_manifest("g=g.tt\nf=f.rel\nmu=mu.dist\nfoo=1\n");
    FAIL();
  } catch (const QclabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(e.message().find("line 4"), std::string::npos);
  }
}
