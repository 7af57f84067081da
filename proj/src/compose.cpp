#include "qclab/compose.hpp"

#include "qclab/complexity.hpp"
#include "qclab/io.hpp"

namespace qclab {

Point inner_values(const TruthTable& g, const BlockStructure& blocks, Point x) {
  Point z = 0;
  for (int i = 0; i < blocks.blocks(); ++i) z |= static_cast<Point>(g(blocks.project(x, i))) << i;
  return z;
}

Relation compose_relation(const Relation& f, const TruthTable& g, int n) {
  if (f.arity() != n) fail(ErrorCode::ArityMismatch, "f must have arity n");
  if (n * g.arity() > caps().flat_arity) fail(ErrorCode::CapExceeded, "n*m exceeds the flat cap");
  const BlockStructure blocks(n, g.arity());
  std::vector<Relation::LabelSet> accepted(cube_size(blocks.arity()));
  for (Point x = 0; x < accepted.size(); ++x) accepted[x] = f.accepted(inner_values(g, blocks, x));
  return Relation(blocks.arity(), f.alphabet(), std::move(accepted));
}

// --- ProductDist ------------------------------------------------------------

ProductDist::ProductDist(BlockStructure blocks, std::vector<Dist> factors)
    : blocks_(blocks), factors_(std::move(factors)) {
  if (static_cast<int>(factors_.size()) != blocks_.blocks()) fail(ErrorCode::ArityMismatch, "one factor per copy");
  for (const auto& d : factors_) {
    if (d.arity() != blocks_.width()) fail(ErrorCode::ArityMismatch, "factor arity differs from m");
  }
}

Rational ProductDist::prob(Point x) const {
  Rational p = 1;
  for (int i = 0; i < blocks_.blocks() && p != 0; ++i) p *= factors_[i][blocks_.project(x, i)];
  return p;
}

Dist ProductDist::expand() const {
  if (blocks_.arity() > caps().flat_arity) fail(ErrorCode::CapExceeded, "n*m exceeds the flat cap");
  std::vector<Rational> probs(cube_size(blocks_.arity()));
  for (Point x = 0; x < probs.size(); ++x) probs[x] = prob(x);
  return Dist(blocks_.arity(), std::move(probs));
}

ProductDist gamma_z(const Dist& mu, const TruthTable& g, Point z, int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (z >= cube_size(n)) fail(ErrorCode::OutOfRange, "z outside {0,1}^n");
  const Dist restricted[2] = {restrict_dist(mu, g, 0), restrict_dist(mu, g, 1)};
  std::vector<Dist> factors;
  factors.reserve(n);
  for (int i = 0; i < n; ++i) factors.push_back(restricted[point_bit(z, i)]);
  return ProductDist(BlockStructure(n, g.arity()), std::move(factors));
}

// --- MixtureDist ------------------------------------------------------------

MixtureDist::MixtureDist(Dist lambda, Dist mu0, Dist mu1)
    : lambda_(std::move(lambda)), restricted_{std::move(mu0), std::move(mu1)} {
  if (restricted_[0].arity() != restricted_[1].arity()) fail(ErrorCode::ArityMismatch, "mu0 and mu1 arities differ");
  static_cast<void>(BlockStructure(lambda_.arity(), restricted_[0].arity()));
}

ProductDist MixtureDist::component(Point z) const {
  if (z >= lambda_.size()) fail(ErrorCode::OutOfRange, "z outside {0,1}^n");
  std::vector<Dist> factors;
  for (int i = 0; i < blocks(); ++i) factors.push_back(restricted_[point_bit(z, i)]);
  return ProductDist(BlockStructure(blocks(), width()), std::move(factors));
}

Rational MixtureDist::prob(Point x) const {
  const BlockStructure blocks_of(blocks(), width());
  Rational p = 0;
  for (Point z = 0; z < lambda_.size(); ++z) {
    if (lambda_[z] == 0) continue;
    Rational term = lambda_[z];
    for (int i = 0; i < blocks() && term != 0; ++i) term *= restricted_[point_bit(z, i)][blocks_of.project(x, i)];
    p += term;
  }
  return p;
}

Dist MixtureDist::expand() const {
  const int arity = blocks() * width();
  if (arity > caps().flat_arity) fail(ErrorCode::CapExceeded, "n*m exceeds the flat cap");
  std::vector<Rational> probs(cube_size(arity));
  for (Point x = 0; x < probs.size(); ++x) probs[x] = prob(x);
  return Dist(arity, std::move(probs));
}

MixtureDist gamma(const Dist& lambda, const Dist& mu, const TruthTable& g) {
  if (mu.arity() != g.arity()) fail(ErrorCode::ArityMismatch, "mu and g arities differ");
  // Only the restrictions that lambda actually uses must exist; an unused one
  // is never read, so mu stands in for it.
  bool needs[2] = {false, false};
  for (Point z = 0; z < lambda.size(); ++z) {
    if (lambda[z] == 0) continue;
    for (int i = 0; i < lambda.arity(); ++i) needs[point_bit(z, i)] = true;
  }
  auto restriction = [&](int b) {
    if (needs[b]) return restrict_dist(mu, g, b);
    return preimage_mass(mu, g, b) == 0 ? mu : restrict_dist(mu, g, b);
  };
  return MixtureDist(lambda, restriction(0), restriction(1));
}

TruthTable xor_stack(const TruthTable& g, int t) {
  if (t < 1) fail(ErrorCode::InvalidArgument, "t must be >= 1");
  if (t * g.arity() > caps().truth_table_arity) fail(ErrorCode::CapExceeded, "t*m exceeds the truth-table cap");
  const BlockStructure blocks(t, g.arity());
  return TruthTable::from_function(blocks.arity(), [&](Point x) {
    int parity = 0;
    for (int i = 0; i < t; ++i) parity ^= g(blocks.project(x, i));
    return parity;
  });
}

Rational default_epsilon(int n) {
  const Rational n4 = pow(Rational(n), 4);
  return Rational(1, 2) - 1 / n4;
}

Rational default_theta(int n) { return Rational(2) / pow(Rational(n), 2); }

Rational epsilon_from_delta(const Rational& delta0) {
  if (delta0 <= 0 || delta0 > Rational(1, 4)) fail(ErrorCode::InvalidArgument, "delta0 must lie in (0, 1/4]");
  return Rational(1, 2) - delta0;
}

ComposedInstance make_instance(Relation f, TruthTable g, Dist mu, std::optional<Dist> lambda,
                               std::optional<Rational> eps, std::optional<Rational> theta) {
  const int n = f.arity();
  const int m = g.arity();
  if (mu.arity() != m) fail(ErrorCode::ArityMismatch, "mu arity differs from g arity");
  Dist lam = lambda ? std::move(*lambda) : Dist::uniform(n);
  if (lam.arity() != n) fail(ErrorCode::ArityMismatch, "lambda arity differs from f arity");
  const Rational e = eps ? *eps : default_epsilon(n);
  const Rational th = theta ? *theta : default_theta(n);
  if (e < 0 || e >= Rational(1, 2)) fail(ErrorCode::InvalidArgument, "eps must lie in [0, 1/2)");
  if (th < 0) fail(ErrorCode::InvalidArgument, "theta must be >= 0");
  const BlockStructure block(n, m);
  for (int b = 0; b < 2; ++b) {
    if (preimage_mass(mu, g, b) == 0) {
      fail(ErrorCode::ZeroConditioningMass,
           "mu puts no mass on g^{-1}(" + std::to_string(b) + "); the inner distribution must be nondegenerate");
    }
  }
  const int c = dist_complexity(g, mu, e);
  if (c == 0) fail(ErrorCode::InnerComplexityZero, "D^mu_eps(g) = 0 at eps = " + to_string(e));
  Dist mu0 = restrict_dist(mu, g, 0);
  Dist mu1 = restrict_dist(mu, g, 1);
  return ComposedInstance{std::move(f), std::move(g), n, m, std::move(mu), std::move(mu0), std::move(mu1),
                          e, c, std::move(lam), block, th};
}

// --- Manifest ---------------------------------------------------------------

std::string format_manifest(const Manifest& manifest) {
  std::string out = "# composed instance\n";
  out += "g=" + manifest.g.string() + "\n";
  out += "f=" + manifest.f.string() + "\n";
  out += "mu=" + manifest.mu.string() + "\n";
  out += "lambda=" + manifest.lambda.string() + "\n";
  out += "n=" + std::to_string(manifest.n) + "\n";
  out += "m=" + std::to_string(manifest.m) + "\n";
  out += "eps=" + to_string(manifest.eps) + "\n";
  out += "theta=" + to_string(manifest.theta) + "\n";
  out += "inner_complexity=" + std::to_string(manifest.inner_complexity) + "\n";
  out += "seed=" + std::to_string(manifest.seed) + "\n";
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest manifest;
  bool have_eps = false, have_theta = false;
  for (const auto& line : detail::content_lines(text)) {
    const auto eq = line.text.find('=');
    if (eq == std::string::npos) detail::parse_fail(line.number, "expected key=value");
    const std::string key = line.text.substr(0, eq);
    const std::string value = line.text.substr(eq + 1);
    try {
      if (key == "g") manifest.g = value;
      else if (key == "f") manifest.f = value;
      else if (key == "mu") manifest.mu = value;
      else if (key == "lambda") manifest.lambda = value;
      else if (key == "n") manifest.n = detail::parse_int(line, value);
      else if (key == "m") manifest.m = detail::parse_int(line, value);
      else if (key == "eps") manifest.eps = parse_rational(value), have_eps = true;
      else if (key == "theta") manifest.theta = parse_rational(value), have_theta = true;
      else if (key == "inner_complexity") manifest.inner_complexity = detail::parse_int(line, value);
      else if (key == "seed") manifest.seed = std::stoull(value);
      else detail::parse_fail(line.number, "unknown key '" + key + "'");
    } catch (const QclabError& e) {
      if (e.code() == ErrorCode::ParseError && e.message().rfind("line ", 0) == 0) throw;
      detail::parse_fail(line.number, e.message());
    } catch (const std::exception&) {
      detail::parse_fail(line.number, "bad value for '" + key + "'");
    }
  }
  if (manifest.g.empty() || manifest.f.empty() || manifest.mu.empty()) {
    fail(ErrorCode::ParseError, "manifest must name g, f and mu");
  }
  if (!have_eps) manifest.eps = manifest.n > 0 ? default_epsilon(manifest.n) : Rational(0);
  if (!have_theta) manifest.theta = manifest.n > 0 ? default_theta(manifest.n) : Rational(0);
  return manifest;
}

std::filesystem::path save_instance(const ComposedInstance& inst, const std::filesystem::path& dir,
                                    std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  write_file(dir / "g.tt", format_truth_table(inst.g));
  write_file(dir / "f.rel", format_relation(inst.f));
  write_file(dir / "mu.dist", format_dist(inst.mu));
  write_file(dir / "lambda.dist", format_dist(inst.lambda));
  Manifest manifest{"g.tt", "f.rel", "mu.dist", "lambda.dist", inst.n, inst.m, inst.epsilon, inst.theta,
                    inst.inner_complexity, seed};
  const auto path = dir / "instance.manifest";
  write_file(path, format_manifest(manifest));
  return path;
}

ComposedInstance load_instance(const std::filesystem::path& manifest_path) {
  const Manifest manifest = parse_manifest(read_file(manifest_path));
  const auto base = manifest_path.parent_path();
  auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : base / p; };
  TruthTable g = load_truth_table(resolve(manifest.g));
  Relation f = load_relation_or_function(resolve(manifest.f));
  Dist mu = load_dist(resolve(manifest.mu));
  std::optional<Dist> lambda;
  if (!manifest.lambda.empty()) lambda = load_dist(resolve(manifest.lambda));
  if (manifest.n != 0 && manifest.n != f.arity()) fail(ErrorCode::ArityMismatch, "manifest n differs from f arity");
  if (manifest.m != 0 && manifest.m != g.arity()) fail(ErrorCode::ArityMismatch, "manifest m differs from g arity");
  ComposedInstance inst =
      make_instance(std::move(f), std::move(g), std::move(mu), std::move(lambda), manifest.eps, manifest.theta);
  if (manifest.inner_complexity != 0 && manifest.inner_complexity != inst.inner_complexity) {
    fail(ErrorCode::InvalidArgument, "manifest inner_complexity " + std::to_string(manifest.inner_complexity) +
                                         " differs from recomputed " + std::to_string(inst.inner_complexity));
  }
  return inst;
}

}  // namespace qclab
