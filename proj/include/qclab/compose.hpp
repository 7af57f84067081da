#pragma once

// Composed relations f o g^n, the input distributions gamma^z and gamma built
// from an inner distribution mu, and the XOR stack of g.

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "qclab/core.hpp"
#include "qclab/dtree.hpp"

namespace qclab {

/// Relation on n*m bits: (x, r) is accepted iff (g(x^(1)), ..., g(x^(n)), r) is in f.
Relation compose_relation(const Relation& f, const TruthTable& g, int n);

/// The string (g(x^(1)), ..., g(x^(n))) for an n*m-bit input.
Point inner_values(const TruthTable& g, const BlockStructure& blocks, Point x);

/// Product distribution over n copies of {0,1}^m, kept factored.
class ProductDist {
 public:
  ProductDist(BlockStructure blocks, std::vector<Dist> factors);

  const BlockStructure& blocks() const { return blocks_; }
  std::span<const Dist> factors() const { return factors_; }
  const Dist& factor(int copy) const { return factors_[copy]; }

  Rational prob(Point x) const;
  /// Flat 2^{nm} vector; bounded by the flat cap.
  Dist expand() const;

 private:
  BlockStructure blocks_;
  std::vector<Dist> factors_;
};

/// gamma^z: copy i drawn from mu_{z_i}.
ProductDist gamma_z(const Dist& mu, const TruthTable& g, Point z, int n);

/// gamma = sum_z lambda(z) gamma^z, kept as its mixture terms.
class MixtureDist {
 public:
  MixtureDist(Dist lambda, Dist mu0, Dist mu1);

  const Dist& lambda() const { return lambda_; }
  int blocks() const { return lambda_.arity(); }
  int width() const { return restricted_[0].arity(); }
  ProductDist component(Point z) const;

  Rational prob(Point x) const;
  Dist expand() const;

 private:
  Dist lambda_;
  Dist restricted_[2];
};

MixtureDist gamma(const Dist& lambda, const Dist& mu, const TruthTable& g);

/// g_t^xor(x) = XOR of g over t disjoint m-bit blocks.
TruthTable xor_stack(const TruthTable& g, int t);

/// 1/2 - 1/n^4.
Rational default_epsilon(int n);
/// 2/n^2.
Rational default_theta(int n);
/// 1/2 - delta0 for delta0 in (0, 1/4].
Rational epsilon_from_delta(const Rational& delta0);

struct ComposedInstance {
  Relation f;
  TruthTable g;
  int n;
  int m;
  Dist mu;
  Dist mu0;  // mu conditioned on g = 0
  Dist mu1;  // mu conditioned on g = 1
  Rational epsilon;
  int inner_complexity;  // D^mu_eps(g)
  Dist lambda;
  BlockStructure block;
  Rational theta;  // snip threshold

  const Dist& restricted(int b) const { return b ? mu1 : mu0; }
  Rational delta0() const { return Rational(1, 2) - epsilon; }
  int arity() const { return n * m; }
};

/// Builds an instance and computes inner_complexity exactly. Defaults:
/// eps = 1/2 - 1/n^4, theta = 2/n^2, lambda uniform. Fails with
/// ZeroConditioningMass if mu misses g^{-1}(0) or g^{-1}(1), and with
/// InnerComplexityZero if D^mu_eps(g) = 0.
ComposedInstance make_instance(Relation f, TruthTable g, Dist mu, std::optional<Dist> lambda = std::nullopt,
                               std::optional<Rational> eps = std::nullopt,
                               std::optional<Rational> theta = std::nullopt);

/// Manifest: "key=value" lines naming g, f, mu, lambda files (relative to the
/// manifest's directory) and the scalars n, m, eps, theta, inner_complexity, seed.
struct Manifest {
  std::filesystem::path g, f, mu, lambda;
  int n = 0;
  int m = 0;
  Rational eps;
  Rational theta;
  int inner_complexity = 0;
  std::uint64_t seed = 0;
};

std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);

/// Writes g.tt, f.rel, mu.dist, lambda.dist and instance.manifest into `dir`.
std::filesystem::path save_instance(const ComposedInstance& inst, const std::filesystem::path& dir,
                                    std::uint64_t seed);

/// Loads and rebuilds an instance; a stored inner_complexity must match the recomputed one.
ComposedInstance load_instance(const std::filesystem::path& manifest_path);

}  // namespace qclab
