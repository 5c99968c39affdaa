#pragma once

// Per-node Boolean constraints. A variant is valid iff every node's new value
// satisfies every enabled constraint that the original value satisfied. Core
// constraints: positivity, integrality (1e-9 tolerance), proper fraction.
// Extended constraints: prime-factor count and scientific-digit count rules.

#include <vector>

#include "mwp/decimal.hpp"
#include "mwp/tree.hpp"

namespace mwp {

struct NodeConstraintProfile {
  bool is_positive = false;
  bool is_integer = false;
  bool is_proper_fraction = false;
  int prime_factor_count = 0;      // f(v); 0 when not an integer
  int scientific_digit_count = 0;  // s(v); significant digits, capped at 6
};

struct ConstraintConfig {
  bool core_enabled = true;
  bool extended_enabled = false;

  static ConstraintConfig core() { return {true, false}; }
  static ConstraintConfig extended() { return {true, true}; }
};

namespace constraint_detail {

// Prime factors counted with multiplicity. Trial division by 2, 3, then 6k+-1
// up to 1e6; an unresolved cofactor <= 1e12 is prime, a larger one counts as a
// single factor (can only under-count, which rejects rather than accepts).
inline int count_prime_factors(detail::u128 n) {
  if (n < 2) return 0;
  int count = 0;
  for (detail::u128 p : {detail::u128(2), detail::u128(3)}) {
    while (n % p == 0) {
      n /= p;
      ++count;
    }
  }
  for (detail::u128 p = 5; p <= 1000000 && p * p <= n; p += 6) {
    while (n % p == 0) {
      n /= p;
      ++count;
    }
    while (n % (p + 2) == 0) {
      n /= (p + 2);
      ++count;
    }
  }
  if (n > 1) ++count;
  return count;
}

}  // namespace constraint_detail

inline NodeConstraintProfile profile(const Decimal& value) {
  NodeConstraintProfile p;
  p.is_positive = value.is_positive();
  p.is_integer = value.is_integer_1e9();
  p.is_proper_fraction = value.is_proper_fraction();
  if (p.is_integer) {
    Decimal n = value.rounded_half_up().abs();
    if (n.coefficient_digits() + n.exponent() <= 38 && !n.is_zero()) {
      detail::u128 v = n.coefficient() * detail::pow10_u128(n.exponent());
      p.prime_factor_count = constraint_detail::count_prime_factors(v);
    } else if (!n.is_zero()) {
      p.prime_factor_count = constraint_detail::count_prime_factors(n.coefficient()) +
                             2 * n.exponent();  // each 10 contributes 2 and 5
    }
  }
  p.scientific_digit_count = value.is_zero() ? 0 : std::min(value.coefficient_digits(), 6);
  return p;
}

inline bool check_pair(const NodeConstraintProfile& original, const NodeConstraintProfile& variant,
                       const ConstraintConfig& config) {
  if (config.core_enabled) {
    if (original.is_positive && !variant.is_positive) return false;
    if (original.is_integer && !variant.is_integer) return false;
    if (original.is_proper_fraction && !variant.is_proper_fraction) return false;
  }
  if (config.extended_enabled) {
    if (original.prime_factor_count > variant.prime_factor_count + 1 &&
        variant.prime_factor_count < 3)
      return false;
    if (original.scientific_digit_count < variant.scientific_digit_count - 1) return false;
  }
  return true;
}

// Reusable checker with the original node profiles precomputed once.
class ConstraintChecker {
 public:
  ConstraintChecker(const ProblemTree& tree, ConstraintConfig config)
      : tree_(&tree), config_(config) {
    original_.reserve(tree.nodes.size());
    for (const auto& n : tree.nodes) original_.push_back(profile(n.value));
  }

  // False on any constraint violation or on evaluation failure (e.g. a variant
  // divisor hitting zero).
  bool check(std::span<const Decimal> assignment) const {
    std::vector<Decimal> values;
    try {
      values = evaluate_all(*tree_, assignment);
    } catch (const EvalError&) {
      return false;
    }
    for (size_t i = 0; i < values.size(); ++i)
      if (!check_pair(original_[i], profile(values[i]), config_)) return false;
    return true;
  }

 private:
  const ProblemTree* tree_;
  ConstraintConfig config_;
  std::vector<NodeConstraintProfile> original_;
};

inline bool check_tree(const ProblemTree& tree, std::span<const Decimal> assignment,
                       const ConstraintConfig& config) {
  return ConstraintChecker(tree, config).check(assignment);
}

}  // namespace mwp
