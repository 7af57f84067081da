#include "qclab/core.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <sstream>

namespace qclab {

Caps parse_caps(std::string_view list, Caps base) {
  std::string text(list);
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, "cap override needs key=value: " + item);
    const std::string key = item.substr(0, eq);
    int value = 0;
    try {
      value = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad cap value: " + item);
    }
    if (value <= 0 || value > 30) fail(ErrorCode::InvalidArgument, "cap out of range: " + item);
    if (key == "truth_table") base.truth_table_arity = value;
    else if (key == "dp") base.dp_arity = value;
    else if (key == "flat") base.flat_arity = value;
    else if (key == "structured") base.structured_arity = value;
    else if (key == "alphabet") base.alphabet = std::min(value, 64);
    else fail(ErrorCode::ParseError, "unknown cap: " + key);
  }
  return base;
}

const Caps& caps() {
  static const Caps value = [] {
    const char* env = std::getenv("QCLAB_CAP_OVERRIDE");
    return env ? parse_caps(env) : Caps{};
  }();
  return value;
}

std::string point_to_bits(Point x, int arity) {
  std::string bits(static_cast<std::size_t>(arity), '0');
  for (int j = 0; j < arity; ++j) bits[j] = point_bit(x, j) ? '1' : '0';
  return bits;
}

Point bits_to_point(std::string_view bits) {
  if (bits.size() > 31) fail(ErrorCode::OutOfRange, "bitstring too long");
  Point x = 0;
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] == '1') x |= Point{1} << j;
    else if (bits[j] != '0') fail(ErrorCode::ParseError, "bad bitstring: " + std::string(bits));
  }
  return x;
}

// --- TruthTable -------------------------------------------------------------

TruthTable::TruthTable(int arity, std::vector<std::uint8_t> outputs) : arity_(arity), outputs_(std::move(outputs)) {
  if (arity < 1) fail(ErrorCode::InvalidArgument, "truth table arity must be >= 1");
  if (arity > caps().truth_table_arity) fail(ErrorCode::CapExceeded, "truth table arity " + std::to_string(arity));
  if (outputs_.size() != cube_size(arity)) fail(ErrorCode::ArityMismatch, "truth table needs 2^arity outputs");
  for (auto& bit : outputs_) {
    if (bit > 1) fail(ErrorCode::InvalidArgument, "truth table outputs must be 0/1");
  }
}

TruthTable TruthTable::from_function(int arity, const std::function<int(Point)>& fn) {
  if (arity < 1 || arity > caps().truth_table_arity) fail(ErrorCode::CapExceeded, "truth table arity");
  std::vector<std::uint8_t> outputs(cube_size(arity));
  for (Point x = 0; x < outputs.size(); ++x) outputs[x] = fn(x) ? 1 : 0;
  return TruthTable(arity, std::move(outputs));
}

TruthTable TruthTable::constant(int arity, int value) {
  return from_function(arity, [value](Point) { return value; });
}

// --- Relation ---------------------------------------------------------------

Relation::Relation(int arity, int alphabet, std::vector<LabelSet> accepted)
    : arity_(arity), alphabet_(alphabet), accepted_(std::move(accepted)) {
  if (arity < 1) fail(ErrorCode::InvalidArgument, "relation arity must be >= 1");
  if (arity > caps().truth_table_arity) fail(ErrorCode::CapExceeded, "relation arity " + std::to_string(arity));
  if (alphabet < 1 || alphabet > caps().alphabet) fail(ErrorCode::CapExceeded, "relation alphabet size");
  if (accepted_.size() != cube_size(arity)) fail(ErrorCode::ArityMismatch, "relation needs 2^arity accepted sets");
  const LabelSet universe = alphabet == 64 ? ~LabelSet{0} : ((LabelSet{1} << alphabet) - 1);
  for (std::size_t x = 0; x < accepted_.size(); ++x) {
    if (accepted_[x] & ~universe) fail(ErrorCode::OutOfRange, "accepted label outside alphabet");
    if (accepted_[x] == 0) {
      fail(ErrorCode::InvalidArgument, "relation is not total at input " + point_to_bits(static_cast<Point>(x), arity));
    }
  }
}

Relation Relation::from_function(const TruthTable& g) {
  std::vector<LabelSet> accepted(g.size());
  for (Point x = 0; x < g.size(); ++x) accepted[x] = LabelSet{1} << g(x);
  return Relation(g.arity(), 2, std::move(accepted));
}

// --- Dist -------------------------------------------------------------------

Dist::Dist(int arity, std::vector<Rational> probs) : arity_(arity), probs_(std::move(probs)) {
  if (arity < 0 || arity > caps().structured_arity) fail(ErrorCode::CapExceeded, "distribution arity");
  if (probs_.size() != cube_size(arity)) fail(ErrorCode::ArityMismatch, "distribution needs 2^arity entries");
  Rational total = 0;
  for (const auto& p : probs_) {
    if (p < 0) fail(ErrorCode::InvalidArgument, "negative probability");
    total += p;
  }
  if (total != 1) fail(ErrorCode::InvalidArgument, "probabilities sum to " + to_string(total) + ", not 1");
}

Dist Dist::uniform(int arity) {
  const std::uint64_t size = cube_size(arity);
  return Dist(arity, std::vector<Rational>(size, Rational(1, static_cast<unsigned long>(size))));
}

Dist Dist::point_mass(int arity, Point x) {
  if (x >= cube_size(arity)) fail(ErrorCode::OutOfRange, "point outside cube");
  std::vector<Rational> probs(cube_size(arity), Rational(0));
  probs[x] = 1;
  return Dist(arity, std::move(probs));
}

Dist Dist::from_weights(int arity, std::span<const std::int64_t> weights) {
  if (weights.size() != cube_size(arity)) fail(ErrorCode::ArityMismatch, "weights need 2^arity entries");
  std::int64_t total = 0;
  for (auto w : weights) {
    if (w < 0) fail(ErrorCode::InvalidArgument, "negative weight");
    total += w;
  }
  if (total == 0) fail(ErrorCode::InvalidArgument, "all weights zero");
  std::vector<Rational> probs;
  probs.reserve(weights.size());
  for (auto w : weights) {
    Rational p(static_cast<long>(w), static_cast<unsigned long>(total));
    p.canonicalize();
    probs.push_back(p);
  }
  return Dist(arity, std::move(probs));
}

// --- Subcube ----------------------------------------------------------------

Subcube::Subcube(int arity) : arity_(arity) {
  if (arity < 0 || arity > 31) fail(ErrorCode::OutOfRange, "subcube arity");
}

Subcube::Subcube(int arity, std::span<const std::pair<int, int>> assignment) : Subcube(arity) {
  for (const auto& [var, bit] : assignment) *this = fixed(var, bit);
}

int Subcube::codim() const { return std::popcount(mask_); }

Subcube Subcube::fixed(int var, int bit) const {
  if (var < 0 || var >= arity_) fail(ErrorCode::OutOfRange, "variable " + std::to_string(var + 1) + " out of range");
  if (is_fixed(var)) fail(ErrorCode::InvalidArgument, "variable " + std::to_string(var + 1) + " already fixed");
  const Point b = Point{1} << var;
  return Subcube(arity_, mask_ | b, bit ? (values_ | b) : values_);
}

bool Subcube::refines(const Subcube& coarser) const {
  return arity_ == coarser.arity_ && (coarser.mask_ & ~mask_) == 0 && (values_ & coarser.mask_) == coarser.values_;
}

std::uint64_t Subcube::ternary_index() const {
  std::uint64_t index = 0;
  for (int j = arity_ - 1; j >= 0; --j) {
    index = index * 3 + (is_fixed(j) ? 1 + value(j) : 0);
  }
  return index;
}

std::string to_string(const Subcube& cube) {
  std::string out(static_cast<std::size_t>(cube.arity()), '*');
  for (int j = 0; j < cube.arity(); ++j) {
    if (cube.is_fixed(j)) out[j] = cube.value(j) ? '1' : '0';
  }
  return out;
}

std::vector<Subcube> all_subcubes(int arity) {
  if (arity < 0 || arity > 16) fail(ErrorCode::CapExceeded, "subcube enumeration arity");
  std::uint64_t count = 1;
  for (int i = 0; i < arity; ++i) count *= 3;
  std::vector<Subcube> cubes;
  cubes.reserve(count);
  for (std::uint64_t index = 0; index < count; ++index) {
    Subcube cube(arity);
    std::uint64_t rest = index;
    for (int j = 0; j < arity; ++j, rest /= 3) {
      if (rest % 3 != 0) cube = cube.fixed(j, static_cast<int>(rest % 3) - 1);
    }
    cubes.push_back(cube);
  }
  return cubes;
}

// --- Operations -------------------------------------------------------------

int eval_fn(const TruthTable& g, Point x) {
  if (x >= g.size()) fail(ErrorCode::OutOfRange, "point outside {0,1}^" + std::to_string(g.arity()));
  return g(x);
}

Rational preimage_mass(const Dist& mu, const TruthTable& g, int b) {
  if (mu.arity() != g.arity()) fail(ErrorCode::ArityMismatch, "distribution and function arities differ");
  Rational mass = 0;
  for (Point x = 0; x < g.size(); ++x) {
    if (g(x) == b) mass += mu[x];
  }
  return mass;
}

Dist restrict_dist(const Dist& mu, const TruthTable& g, int b) {
  const Rational mass = preimage_mass(mu, g, b);
  if (mass == 0) fail(ErrorCode::ZeroConditioningMass, "Pr[g = " + std::to_string(b) + "] is zero");
  std::vector<Rational> probs(mu.size(), Rational(0));
  for (Point x = 0; x < g.size(); ++x) {
    if (g(x) == b) probs[x] = mu[x] / mass;
  }
  return Dist(mu.arity(), std::move(probs));
}

Rational subcube_prob(const Dist& mu, const Subcube& cube) {
  if (mu.arity() != cube.arity()) fail(ErrorCode::ArityMismatch, "distribution and subcube arities differ");
  Rational mass = 0;
  cube.for_each_point([&](Point x) { mass += mu[x]; });
  return mass;
}

Rational cond_prob(const Dist& mu, const Subcube& fine, const Subcube& coarse) {
  if (!fine.refines(coarse)) fail(ErrorCode::NotARefinement, to_string(fine) + " does not refine " + to_string(coarse));
  const Rational denom = subcube_prob(mu, coarse);
  if (denom == 0) fail(ErrorCode::ZeroConditioningMass, "Pr[" + to_string(coarse) + "] is zero");
  return subcube_prob(mu, fine) / denom;
}

Rational bias(const TruthTable& g, const Dist& mu, const Subcube& cube) {
  if (mu.arity() != g.arity() || cube.arity() != g.arity()) fail(ErrorCode::ArityMismatch, "bias arities differ");
  Rational mass[2] = {0, 0};
  cube.for_each_point([&](Point x) { mass[g(x)] += mu[x]; });
  const Rational total = mass[0] + mass[1];
  if (total == 0) fail(ErrorCode::ZeroConditioningMass, "Pr[" + to_string(cube) + "] is zero");
  return abs(mass[0] - mass[1]) / total;
}

FullbiasCheck check_fullbias(const TruthTable& g, const Dist& mu, const Rational& eps) {
  FullbiasCheck check;
  const Rational m0 = preimage_mass(mu, g, 0);
  const Rational m1 = 1 - m0;
  check.min_mass = m0 < m1 ? m0 : m1;
  check.full_bias = abs(m0 - m1);
  check.min_mass_exceeds_eps = check.min_mass > eps;
  check.bias_below_bound = check.full_bias < 1 - 2 * eps;
  return check;
}

}  // namespace qclab
