#pragma once

// Variant generation: decompose each variable leaf as a*10^b, draw new
// mantissas per method (M1 free, M2 same digit count, M3 Poisson around the
// mantissa), run the N-attempt accept/reject loop against the constraint
// checker, and render accepted assignments back into the problem text.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mwp/constraints.hpp"
#include "mwp/decimal.hpp"
#include "mwp/grounding.hpp"
#include "mwp/rng.hpp"
#include "mwp/tree.hpp"

namespace mwp {

enum class GenerationMethod { M1, M2, M3 };

inline const char* method_name(GenerationMethod m) {
  switch (m) {
    case GenerationMethod::M1: return "m1";
    case GenerationMethod::M2: return "m2";
    case GenerationMethod::M3: return "m3";
  }
  return "?";
}

inline std::optional<GenerationMethod> method_from_name(std::string_view s) {
  if (s == "m1" || s == "M1") return GenerationMethod::M1;
  if (s == "m2" || s == "M2") return GenerationMethod::M2;
  if (s == "m3" || s == "M3") return GenerationMethod::M3;
  return std::nullopt;
}

struct GenerationParams {
  int max_attempts = 30000;       // N
  int max_scientific_digits = 6;  // c
  int target_variants = 100;      // m
  uint64_t seed = 0;
};

struct Decomposition {
  long long mantissa = 0;  // a: not divisible by 10, at most c digits
  int exponent = 0;        // b
};

struct VariantRecord {
  std::string problem_id;
  std::vector<Decimal> assignment;  // one value per tree variable
  std::string rendered_text;
  Decimal answer;
  GenerationMethod method = GenerationMethod::M3;
};

namespace generate_detail {

inline int digits_ll(long long v) {
  int n = 0;
  do {
    ++n;
    v /= 10;
  } while (v != 0);
  return n;
}

inline long long pow10_ll(int k) {
  long long p = 1;
  for (int i = 0; i < k; ++i) p *= 10;
  return p;
}

inline Decimal scaled(long long mantissa, int exp) {
  Decimal d = Decimal::from_int(mantissa);
  if (mantissa == 0 || exp == 0) return d;
  return exp > 0 ? d * Decimal::from_int(10).pow_int(exp)
                 : d / Decimal::from_int(10).pow_int(-exp);
}

inline long long m1_upper(int c, bool divisor) {
  return divisor ? (long long)std::floor(std::pow(10.0, double(c) / 2.0))
                 : pow10_ll(c);
}

// digit count of the value as written: mantissa digits plus the positive
// exponent (1500 -> 4, 1.25 -> 3, 0.5 -> 1)
inline int written_digits(const Decomposition& d) {
  int base = digits_ll(d.mantissa < 0 ? -d.mantissa : d.mantissa);
  return d.exponent > 0 ? base + d.exponent : base;
}

}  // namespace generate_detail

inline Decomposition decompose(const Decimal& h, int c) {
  if (h.is_zero())
    throw std::invalid_argument("decompose: zero has no mantissa/exponent form");
  Decimal a = h;
  int exp = a.exponent();
  // Decimal is already normalized (no trailing zeros); reduce to c digits
  int extra = a.coefficient_digits() - c;
  detail::u128 coeff = a.coefficient();
  if (extra > 0) {
    coeff = detail::round_to_sig(coeff, c, exp);
    while (coeff % 10 == 0) {
      coeff /= 10;
      ++exp;
    }
  }
  Decomposition d;
  d.mantissa = (long long)coeff * (h.is_negative() ? -1 : 1);
  d.exponent = exp;
  return d;
}

inline Decimal draw_leaf(const Decimal& original, bool is_divisor, GenerationMethod method,
                         int c, Rng& rng) {
  Decomposition dec = decompose(original, c);
  long long a = dec.mantissa < 0 ? -dec.mantissa : dec.mantissa;
  long long sign = dec.mantissa < 0 ? -1 : 1;
  switch (method) {
    case GenerationMethod::M1: {
      long long hi = generate_detail::m1_upper(c, is_divisor);
      long long ap = (long long)rng.uniform_u64(1, (uint64_t)hi);
      return generate_detail::scaled(sign * ap, dec.exponent);
    }
    case GenerationMethod::M2: {
      int d = generate_detail::written_digits(dec);
      long long ap;
      if (d == 1) {
        ap = (long long)rng.uniform_u64(1, 99);
      } else {
        int dd = std::min(d, 17);
        ap = (long long)rng.uniform_u64((uint64_t)generate_detail::pow10_ll(dd - 1),
                                        (uint64_t)(generate_detail::pow10_ll(dd) - 1));
      }
      int b = dec.exponent > 0 ? 0 : dec.exponent;
      return generate_detail::scaled(sign * ap, b);
    }
    case GenerationMethod::M3: {
      long long ap;
      if (a >= 1 && a <= 9) {
        ap = (long long)rng.uniform_u64(1, 9);
      } else {
        do {
          ap = rng.poisson(double(a));
        } while (ap == 0);
      }
      return generate_detail::scaled(sign * ap, dec.exponent);
    }
  }
  return original;
}

// Membership test for the support-set analyses: could draw_leaf ever return
// `candidate` for this leaf? Mirrors the draw ranges exactly.
inline bool method_supports(const Decimal& original, bool is_divisor, GenerationMethod method,
                            int c, const Decimal& candidate) {
  if (original.is_zero() || candidate.is_zero()) return false;
  if (original.is_negative() != candidate.is_negative()) return false;
  Decomposition dec = decompose(original, c);
  auto mantissa_of = [](const Decimal& v, int exp) -> std::optional<long long> {
    // v must equal a' * 10^exp with integral a'
    Decimal shifted = generate_detail::scaled(1, -exp) * v.abs();
    if (shifted.exponent() < 0) return std::nullopt;
    if (shifted.coefficient_digits() + shifted.exponent() > 17) return std::nullopt;
    return shifted.to_int64();
  };
  switch (method) {
    case GenerationMethod::M1: {
      auto ap = mantissa_of(candidate, dec.exponent);
      return ap && *ap >= 1 && *ap <= generate_detail::m1_upper(c, is_divisor);
    }
    case GenerationMethod::M2: {
      int d = generate_detail::written_digits(dec);
      int b = dec.exponent > 0 ? 0 : dec.exponent;
      auto ap = mantissa_of(candidate, b);
      if (!ap) return false;
      if (d == 1) return *ap >= 1 && *ap <= 99;
      int dd = std::min(d, 17);
      return *ap >= generate_detail::pow10_ll(dd - 1) && *ap <= generate_detail::pow10_ll(dd) - 1;
    }
    case GenerationMethod::M3: {
      long long a = dec.mantissa < 0 ? -dec.mantissa : dec.mantissa;
      auto ap = mantissa_of(candidate, dec.exponent);
      if (!ap || *ap < 1) return false;
      if (a >= 1 && a <= 9) return *ap <= 9;
      return true;  // Poisson support: every positive integer
    }
  }
  return false;
}

inline std::vector<VariantRecord> generate(const Problem& problem, const ProblemTree& tree,
                                           const Grounding& grounding, GenerationMethod method,
                                           const GenerationParams& params,
                                           const ConstraintConfig& config) {
  std::vector<VariantRecord> out;
  if (grounding.status != GroundingStatus::Grounded) return out;
  size_t nvars = tree.variables.size();
  if (nvars == 0) return out;

  std::vector<Decimal> original(nvars);
  std::vector<bool> divisor(nvars);
  std::vector<bool> perturbable(nvars);
  for (size_t i = 0; i < nvars; ++i) {
    const TreeNode& leaf = tree.node(tree.variables[i]);
    original[i] = leaf.literal;
    divisor[i] = leaf.is_divisor;
    perturbable[i] = !leaf.literal.is_zero();
  }

  ConstraintChecker checker(tree, config);
  Rng rng(params.seed);
  std::set<std::string> seen;
  std::string original_key;
  for (const auto& v : original) {
    original_key += v.to_string();
    original_key.push_back(',');
  }

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    if (int(out.size()) >= params.target_variants) break;
    std::vector<Decimal> assignment(nvars);
    for (size_t i = 0; i < nvars; ++i)
      assignment[i] = perturbable[i]
                          ? draw_leaf(original[i], divisor[i], method,
                                      params.max_scientific_digits, rng)
                          : original[i];
    std::string key;
    for (const auto& v : assignment) {
      key += v.to_string();
      key.push_back(',');
    }
    if (key == original_key || seen.count(key)) continue;
    if (!checker.check(assignment)) continue;
    seen.insert(key);
    VariantRecord rec;
    rec.problem_id = problem.id;
    rec.assignment = assignment;
    rec.rendered_text = render_question(problem.text, grounding, tree, assignment);
    rec.answer = evaluate(tree, assignment);
    rec.method = method;
    out.push_back(std::move(rec));
  }
  return out;
}

// Brute-force support nesting check for small trees: enumerates candidate
// mantissas per leaf and verifies M3 membership implies M2 implies M1.
inline bool method_support_nesting(const ProblemTree& tree, int c, long long enumerate_to) {
  for (int leaf_id : tree.variables) {
    const TreeNode& leaf = tree.node(leaf_id);
    if (leaf.literal.is_zero()) continue;
    for (long long v = 1; v <= enumerate_to; ++v) {
      Decimal cand = Decimal::from_int(v);
      bool m3 = method_supports(leaf.literal, leaf.is_divisor, GenerationMethod::M3, c, cand);
      bool m2 = method_supports(leaf.literal, leaf.is_divisor, GenerationMethod::M2, c, cand);
      bool m1 = method_supports(leaf.literal, leaf.is_divisor, GenerationMethod::M1, c, cand);
      if (m3 && !m2) return false;
      if (m2 && !m1) return false;
    }
  }
  return true;
}

}  // namespace mwp
