#pragma once

// Hypercube points, Boolean functions, relations, exact distributions and
// subcubes.
//
// Bit convention, used everywhere: bit j of a point's integer index holds
// variable x_{j+1}. Index 0 is the all-zeros input. A bitstring "b1 b2 ... bk"
// lists x_1 first, so "01" is index 2.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qclab/errors.hpp"
#include "qclab/rational.hpp"

namespace qclab {

using Point = std::uint32_t;
using Label = int;

/// Size limits. Defaults are conservative; QCLAB_CAP_OVERRIDE overrides them
/// with a comma list such as "dp=14,flat=14,structured=24,truth_table=18".
struct Caps {
  int truth_table_arity = 16;
  int dp_arity = 12;
  int flat_arity = 12;
  int structured_arity = 20;
  int alphabet = 64;
};

Caps parse_caps(std::string_view list, Caps base = {});
const Caps& caps();

inline std::uint64_t cube_size(int arity) { return std::uint64_t{1} << arity; }

inline int point_bit(Point x, int var) { return static_cast<int>((x >> var) & 1u); }

/// "b1b2...bk" with b1 = x_1.
std::string point_to_bits(Point x, int arity);
Point bits_to_point(std::string_view bits);

class TruthTable {
 public:
  TruthTable(int arity, std::vector<std::uint8_t> outputs);

  static TruthTable from_function(int arity, const std::function<int(Point)>& fn);
  static TruthTable constant(int arity, int value);

  int arity() const { return arity_; }
  std::uint64_t size() const { return outputs_.size(); }
  int operator()(Point x) const { return outputs_[x]; }
  const std::vector<std::uint8_t>& outputs() const { return outputs_; }

  friend bool operator==(const TruthTable&, const TruthTable&) = default;

 private:
  int arity_;
  std::vector<std::uint8_t> outputs_;
};

/// A total relation: every input accepts at least one label in [0, alphabet).
class Relation {
 public:
  using LabelSet = std::uint64_t;

  Relation(int arity, int alphabet, std::vector<LabelSet> accepted);

  /// The graph {(x, g(x))} over the binary alphabet.
  static Relation from_function(const TruthTable& g);

  int arity() const { return arity_; }
  int alphabet() const { return alphabet_; }
  LabelSet accepted(Point x) const { return accepted_[x]; }
  bool accepts(Point x, Label r) const { return r >= 0 && r < alphabet_ && ((accepted_[x] >> r) & 1u); }
  const std::vector<LabelSet>& accepted_sets() const { return accepted_; }

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  int arity_;
  int alphabet_;
  std::vector<LabelSet> accepted_;
};

class Dist {
 public:
  Dist(int arity, std::vector<Rational> probs);

  static Dist uniform(int arity);
  static Dist point_mass(int arity, Point x);
  /// Normalizes nonnegative integer weights (not all zero).
  static Dist from_weights(int arity, std::span<const std::int64_t> weights);

  int arity() const { return arity_; }
  std::uint64_t size() const { return probs_.size(); }
  const Rational& operator[](Point x) const { return probs_[x]; }
  const std::vector<Rational>& probs() const { return probs_; }

  friend bool operator==(const Dist&, const Dist&) = default;

 private:
  int arity_;
  std::vector<Rational> probs_;
};

/// The set of points agreeing with a partial assignment. `mask` marks fixed
/// variables, `values` their bits (zero outside the mask).
class Subcube {
 public:
  explicit Subcube(int arity);
  Subcube(int arity, std::span<const std::pair<int, int>> assignment);

  static Subcube full(int arity) { return Subcube(arity); }

  int arity() const { return arity_; }
  Point mask() const { return mask_; }
  Point values() const { return values_; }
  int codim() const;
  bool is_fixed(int var) const { return (mask_ >> var) & 1u; }
  int value(int var) const { return point_bit(values_, var); }
  bool contains(Point x) const { return (x & mask_) == values_; }

  /// New subcube with `var` additionally fixed to `bit`; `var` must be free.
  Subcube fixed(int var, int bit) const;

  /// True when every variable fixed by `coarser` is fixed here to the same bit.
  bool refines(const Subcube& coarser) const;

  /// Base-3 index: digit j is 0 (free), 1 (fixed to 0) or 2 (fixed to 1).
  std::uint64_t ternary_index() const;

  template <class F>
  void for_each_point(F&& fn) const {
    const Point free = ~mask_ & static_cast<Point>(cube_size(arity_) - 1);
    Point sub = 0;
    do {
      fn(values_ | sub);
      sub = (sub - free) & free;
    } while (sub != 0);
  }

  friend bool operator==(const Subcube&, const Subcube&) = default;

 private:
  Subcube(int arity, Point mask, Point values) : arity_(arity), mask_(mask), values_(values) {}

  int arity_;
  Point mask_ = 0;
  Point values_ = 0;
};

std::string to_string(const Subcube& cube);

/// All 3^k subcubes of {0,1}^k in ternary-index order.
std::vector<Subcube> all_subcubes(int arity);

int eval_fn(const TruthTable& g, Point x);

/// Pr_{x~mu}[g(x) = b].
Rational preimage_mass(const Dist& mu, const TruthTable& g, int b);

/// mu conditioned on g(x) = b.
Dist restrict_dist(const Dist& mu, const TruthTable& g, int b);

Rational subcube_prob(const Dist& mu, const Subcube& cube);

/// Pr_mu[fine | coarse]; `fine` must refine `coarse`.
Rational cond_prob(const Dist& mu, const Subcube& fine, const Subcube& coarse);

/// |Pr[g=0 | C] - Pr[g=1 | C]| under mu.
Rational bias(const TruthTable& g, const Dist& mu, const Subcube& cube);

struct FullbiasCheck {
  Rational min_mass;   // min_b Pr_mu[g = b]
  Rational full_bias;  // bias of the whole cube
  bool min_mass_exceeds_eps = false;
  bool bias_below_bound = false;  // full_bias < 1 - 2 eps

  bool conclusion_holds() const { return min_mass_exceeds_eps && bias_below_bound; }
  /// The proposition only constrains instances with positive distributional complexity.
  bool consistent_with(int dist_complexity) const { return dist_complexity == 0 || conclusion_holds(); }
};

FullbiasCheck check_fullbias(const TruthTable& g, const Dist& mu, const Rational& eps);

}  // namespace qclab
