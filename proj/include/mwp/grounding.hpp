#pragma once

// Grounding: associate numeric occurrences in the problem text with tree
// leaves. Distinct values pair positionally; duplicated values go through the
// three-scenario strategy (discard when the code side is heavier or lighter,
// otherwise enumerate one-to-one correspondences, merge the answer-equivalent
// ones under distinguishing assignments, and let an oracle arbitrate when more
// than one equivalence class survives).

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mwp/decimal.hpp"
#include "mwp/rng.hpp"
#include "mwp/tree.hpp"

namespace mwp {

struct TextNumber {
  std::string surface;   // as written: "$56347", "1.25", "50%", "1,500"
  Decimal value;         // decoration stripped; percent NOT divided
  size_t begin = 0, end = 0;  // [begin, end) offsets in the text
  int occurrence_index = 0;   // ordinal among equal-valued occurrences
};

// All maximal numeric tokens, left to right. Currency prefix and percent
// suffix stay in the surface; "1,500" is accepted as 1500.
inline std::vector<TextNumber> extract_text_numbers(const std::string& text) {
  std::vector<TextNumber> out;
  std::map<std::string, int> value_counts;
  size_t i = 0;
  auto is_digit = [&](size_t p) { return p < text.size() && text[p] >= '0' && text[p] <= '9'; };
  while (i < text.size()) {
    size_t start = i;
    bool currency = false;
    if (text[i] == '$' && is_digit(i + 1)) {
      currency = true;
      ++i;
    }
    if (!is_digit(i)) {
      i = start + 1;
      continue;
    }
    size_t num_begin = i;
    while (is_digit(i)) ++i;
    // thousands groups: strictly ",ddd"
    while (i < text.size() && text[i] == ',' && is_digit(i + 1) && is_digit(i + 2) &&
           is_digit(i + 3) && !is_digit(i + 4)) {
      i += 4;
    }
    if (i < text.size() && text[i] == '.' && is_digit(i + 1)) {
      ++i;
      while (is_digit(i)) ++i;
    }
    bool percent = i < text.size() && text[i] == '%';
    if (percent) ++i;
    TextNumber tn;
    tn.begin = currency ? start : num_begin;
    tn.end = i;
    tn.surface = text.substr(tn.begin, tn.end - tn.begin);
    std::string digits;
    for (size_t p = num_begin; p < (percent ? i - 1 : i); ++p)
      if (text[p] != ',') digits.push_back(text[p]);
    tn.value = Decimal::parse(digits);
    tn.occurrence_index = value_counts[tn.value.to_string()]++;
    out.push_back(std::move(tn));
  }
  return out;
}

enum class MatchForm { AsIs, PercentOver100, OnePlusPercentOver100 };

struct GroundingPair {
  int text_index = -1;  // index into text_numbers
  int leaf_id = -1;
  MatchForm form = MatchForm::AsIs;
};

enum class GroundingStatus { Grounded, Discarded };

struct Grounding {
  std::vector<TextNumber> text_numbers;
  std::vector<GroundingPair> pairs;
  std::vector<int> constant_leaves;  // leaves with no text counterpart
  GroundingStatus status = GroundingStatus::Discarded;
  std::string detail;
};

// Answer oracle for ambiguous correspondences. Transport failures must throw;
// a clean "no answer" is nullopt.
using GroundingOracle = std::function<std::optional<Decimal>(const std::string& question)>;

namespace grounding_detail {

inline Decimal form_to_leaf_value(const Decimal& text_value, MatchForm form) {
  static const Decimal hundred = Decimal::from_int(100);
  switch (form) {
    case MatchForm::AsIs: return text_value;
    case MatchForm::PercentOver100: return text_value / hundred;
    case MatchForm::OnePlusPercentOver100: return Decimal::from_int(1) + text_value / hundred;
  }
  return text_value;
}

inline Decimal form_from_leaf_value(const Decimal& leaf_value, MatchForm form) {
  static const Decimal hundred = Decimal::from_int(100);
  switch (form) {
    case MatchForm::AsIs: return leaf_value;
    case MatchForm::PercentOver100: return leaf_value * hundred;
    case MatchForm::OnePlusPercentOver100: return (leaf_value - Decimal::from_int(1)) * hundred;
  }
  return leaf_value;
}

// New surface for a value at a grounded position: keep currency/percent
// decoration and the original decimal-place count for non-integers; integers
// render plain with no separators.
inline std::string render_surface(const TextNumber& original, MatchForm form,
                                  const Decimal& leaf_value) {
  Decimal shown = form_from_leaf_value(leaf_value, form);
  bool currency = !original.surface.empty() && original.surface.front() == '$';
  bool percent = !original.surface.empty() && original.surface.back() == '%';
  std::string body;
  if (shown.is_integer_1e9() && shown.decimal_places() == 0) {
    body = shown.to_string();
  } else {
    size_t dot = original.surface.find('.');
    int orig_places = 0;
    if (dot != std::string::npos) {
      size_t fe = dot + 1;
      while (fe < original.surface.size() && std::isdigit((unsigned char)original.surface[fe])) ++fe;
      orig_places = int(fe - dot - 1);
    }
    int places = std::max(orig_places, shown.decimal_places());
    body = shown.to_string_fixed(places);
  }
  std::string out;
  if (currency) out.push_back('$');
  out += body;
  if (percent) out.push_back('%');
  return out;
}

}  // namespace grounding_detail

// Substitute per-leaf values into the text at the grounded spans. Spans not
// grounded keep their original surface.
inline std::string render_question(const std::string& text, const Grounding& grounding,
                                   const ProblemTree& tree,
                                   std::span<const Decimal> assignment) {
  std::map<int, Decimal> leaf_value;
  for (size_t i = 0; i < tree.variables.size() && i < assignment.size(); ++i)
    leaf_value.emplace(tree.variables[i], assignment[i]);
  // pairs ordered by text position
  std::vector<GroundingPair> pairs = grounding.pairs;
  std::sort(pairs.begin(), pairs.end(),
            [](const GroundingPair& a, const GroundingPair& b) { return a.text_index < b.text_index; });
  std::string out;
  size_t cursor = 0;
  for (const auto& p : pairs) {
    const TextNumber& tn = grounding.text_numbers[size_t(p.text_index)];
    auto it = leaf_value.find(p.leaf_id);
    if (it == leaf_value.end()) continue;
    out.append(text, cursor, tn.begin - cursor);
    out += grounding_detail::render_surface(tn, p.form, it->second);
    cursor = tn.end;
  }
  out.append(text, cursor, text.size() - cursor);
  return out;
}

inline Grounding ground(const Problem& problem, const ProblemTree& tree,
                        const GroundingOracle& oracle = nullptr, uint64_t seed = 0) {
  Grounding g;
  g.text_numbers = extract_text_numbers(problem.text);

  // perturbable candidates: nonzero leaves
  std::vector<int> candidate_leaves;
  for (int id : tree.leaves)
    if (!tree.node(id).literal.is_zero()) candidate_leaves.push_back(id);

  std::set<std::string> leaf_value_keys;
  for (int id : candidate_leaves) leaf_value_keys.insert(tree.node(id).literal.to_string());

  // effective matched value per text number (percent tokens may ground via a
  // derived form; as-written value takes priority)
  struct Effective {
    Decimal value;
    MatchForm form;
  };
  std::vector<Effective> eff(g.text_numbers.size());
  for (size_t i = 0; i < g.text_numbers.size(); ++i) {
    const TextNumber& tn = g.text_numbers[i];
    eff[i] = {tn.value, MatchForm::AsIs};
    bool percent = !tn.surface.empty() && tn.surface.back() == '%';
    if (percent && !leaf_value_keys.count(tn.value.to_string())) {
      Decimal over = grounding_detail::form_to_leaf_value(tn.value, MatchForm::PercentOver100);
      Decimal one_plus =
          grounding_detail::form_to_leaf_value(tn.value, MatchForm::OnePlusPercentOver100);
      if (leaf_value_keys.count(over.to_string()))
        eff[i] = {over, MatchForm::PercentOver100};
      else if (leaf_value_keys.count(one_plus.to_string()))
        eff[i] = {one_plus, MatchForm::OnePlusPercentOver100};
    }
  }

  // counts per value
  std::map<std::string, std::vector<int>> text_by_value;   // value -> text indices
  std::map<std::string, std::vector<int>> leaves_by_value; // value -> leaf ids
  for (size_t i = 0; i < g.text_numbers.size(); ++i)
    text_by_value[eff[i].value.to_string()].push_back(int(i));
  for (int id : candidate_leaves)
    leaves_by_value[tree.node(id).literal.to_string()].push_back(id);

  for (auto& [value, text_idx] : text_by_value) {
    auto it = leaves_by_value.find(value);
    size_t cq = text_idx.size();
    size_t cc = it == leaves_by_value.end() ? 0 : it->second.size();
    if (cc == 0) continue;  // number mentioned but not computed with
    if (cq < cc) {
      g.status = GroundingStatus::Discarded;
      g.detail = "code-heavy duplicate for value " + value;
      return g;
    }
    if (cq > cc) {
      g.status = GroundingStatus::Discarded;
      g.detail = "text-heavy duplicate for value " + value;
      return g;
    }
  }

  // base pairs for unambiguous values; permutation groups for duplicated ones
  std::vector<GroundingPair> fixed;
  struct AmbiguousGroup {
    std::vector<int> text_idx;
    std::vector<int> leaf_ids;
  };
  std::vector<AmbiguousGroup> groups;
  for (auto& [value, text_idx] : text_by_value) {
    auto it = leaves_by_value.find(value);
    if (it == leaves_by_value.end()) continue;
    if (text_idx.size() == 1) {
      fixed.push_back({text_idx[0], it->second[0], eff[size_t(text_idx[0])].form});
    } else {
      groups.push_back({text_idx, it->second});
    }
  }

  // leaves with no text counterpart are constants (zero leaves included)
  std::set<int> grounded_leaves;
  for (const auto& p : fixed) grounded_leaves.insert(p.leaf_id);
  for (const auto& grp : groups)
    for (int id : grp.leaf_ids) grounded_leaves.insert(id);
  for (int id : tree.leaves)
    if (!grounded_leaves.count(id)) g.constant_leaves.push_back(id);

  auto finish = [&](const std::vector<GroundingPair>& pairs) {
    g.pairs = pairs;
    std::sort(g.pairs.begin(), g.pairs.end(),
              [](const GroundingPair& a, const GroundingPair& b) { return a.text_index < b.text_index; });
    g.status = GroundingStatus::Grounded;
    g.detail = "";
    return g;
  };

  if (groups.empty()) return finish(fixed);

  // enumerate the product of per-group permutations
  size_t total = 1;
  for (const auto& grp : groups) {
    size_t f = 1;
    for (size_t k = 2; k <= grp.text_idx.size(); ++k) f *= k;
    total *= f;
    if (total > 5040) {
      g.status = GroundingStatus::Discarded;
      g.detail = "too many candidate correspondences";
      return g;
    }
  }
  std::vector<std::vector<GroundingPair>> correspondences;
  std::vector<std::vector<int>> perms(groups.size());
  std::function<void(size_t)> expand = [&](size_t gi) {
    if (gi == groups.size()) {
      std::vector<GroundingPair> pairs = fixed;
      for (size_t k = 0; k < groups.size(); ++k) {
        const auto& grp = groups[k];
        for (size_t j = 0; j < grp.text_idx.size(); ++j) {
          int ti = grp.text_idx[j];
          pairs.push_back({ti, grp.leaf_ids[size_t(perms[k][j])], eff[size_t(ti)].form});
        }
      }
      correspondences.push_back(std::move(pairs));
      return;
    }
    std::vector<int> idx(groups[gi].leaf_ids.size());
    for (size_t j = 0; j < idx.size(); ++j) idx[j] = int(j);
    std::sort(idx.begin(), idx.end());
    do {
      perms[gi] = idx;
      expand(gi + 1);
    } while (std::next_permutation(idx.begin(), idx.end()));
  };
  expand(0);

  // distinguishing assignments: distinct primes above every original value
  uint64_t max_val = 2;
  for (int id : tree.leaves) {
    Decimal a = tree.node(id).literal.abs().truncated();
    long long v = a.coefficient_digits() + a.exponent() > 12 ? 0 : a.to_int64();
    if (v > 0 && uint64_t(v) > max_val) max_val = uint64_t(v);
  }
  for (const auto& tn : g.text_numbers) {
    Decimal a = tn.value.abs().truncated();
    long long v = a.coefficient_digits() + a.exponent() > 12 ? 0 : a.to_int64();
    if (v > 0 && uint64_t(v) > max_val) max_val = uint64_t(v);
  }

  constexpr int kDraws = 5;
  Rng rng(mix_seed(seed, problem.id));
  // one fresh value per paired text position, per draw
  std::vector<std::map<int, Decimal>> draw_values(kDraws);
  for (int d = 0; d < kDraws; ++d) {
    std::set<uint64_t> used;
    for (const auto& p : correspondences[0]) {  // text positions same across correspondences
      uint64_t base = max_val + rng.uniform_u64(1, 4 * std::max<uint64_t>(16, max_val));
      uint64_t prime = next_prime_after(base);
      while (used.count(prime)) prime = next_prime_after(prime);
      used.insert(prime);
      draw_values[d].emplace(p.text_index, Decimal::from_int((long long)prime));
    }
  }

  auto answer_for = [&](const std::vector<GroundingPair>& pairs, int d) -> std::string {
    std::vector<Decimal> assignment(tree.variables.size());
    std::map<int, const GroundingPair*> by_leaf;
    for (const auto& p : pairs) by_leaf[p.leaf_id] = &p;
    for (size_t i = 0; i < tree.variables.size(); ++i) {
      int leaf = tree.variables[i];
      auto it = by_leaf.find(leaf);
      if (it == by_leaf.end()) {
        assignment[i] = tree.node(leaf).literal;
      } else {
        assignment[i] = grounding_detail::form_to_leaf_value(
            draw_values[size_t(d)].at(it->second->text_index), it->second->form);
      }
    }
    try {
      return evaluate(tree, assignment).to_string();
    } catch (const EvalError& e) {
      return std::string("!error:") + e.what();
    }
  };

  // equivalence classes: equal answers on every draw
  std::map<std::string, std::vector<size_t>> classes;
  for (size_t ci = 0; ci < correspondences.size(); ++ci) {
    std::string key;
    for (int d = 0; d < kDraws; ++d) {
      key += answer_for(correspondences[ci], d);
      key.push_back('|');
    }
    classes[key].push_back(ci);
  }
  if (classes.size() == 1) return finish(correspondences[0]);

  if (!oracle) {
    g.status = GroundingStatus::Discarded;
    g.detail = "ambiguous correspondence and no oracle";
    return g;
  }

  // pick a draw where all class answers are pairwise distinct
  std::vector<size_t> reps;
  for (auto& [key, members] : classes) reps.push_back(members.front());
  int chosen_draw = -1;
  for (int d = 0; d < kDraws && chosen_draw < 0; ++d) {
    std::set<std::string> seen;
    bool ok = true;
    for (size_t rep : reps) {
      std::string a = answer_for(correspondences[rep], d);
      if (a.rfind("!error:", 0) == 0 || !seen.insert(a).second) {
        ok = false;
        break;
      }
    }
    if (ok) chosen_draw = d;
  }
  if (chosen_draw < 0) {
    g.status = GroundingStatus::Discarded;
    g.detail = "no distinguishing assignment found";
    return g;
  }

  // render the distinguishing question and let the oracle arbitrate
  Grounding probe = g;
  probe.pairs = correspondences[reps[0]];  // spans/forms identical across correspondences
  std::sort(probe.pairs.begin(), probe.pairs.end(),
            [](const GroundingPair& a, const GroundingPair& b) { return a.text_index < b.text_index; });
  std::vector<Decimal> probe_assignment;
  {
    std::map<int, const GroundingPair*> by_leaf;
    for (const auto& p : probe.pairs) by_leaf[p.leaf_id] = &p;
    // render_question substitutes variable leaves; feed it text-position values
    probe_assignment.resize(tree.variables.size());
    for (size_t i = 0; i < tree.variables.size(); ++i) {
      int leaf = tree.variables[i];
      auto it = by_leaf.find(leaf);
      probe_assignment[i] =
          it == by_leaf.end()
              ? tree.node(leaf).literal
              : grounding_detail::form_to_leaf_value(
                    draw_values[size_t(chosen_draw)].at(it->second->text_index), it->second->form);
    }
  }
  // pre-grounding, tree.variables still lists every leaf, so rendering works
  std::string question = render_question(problem.text, probe, tree, probe_assignment);
  std::optional<Decimal> oracle_answer = oracle(question);
  if (!oracle_answer) {
    g.status = GroundingStatus::Discarded;
    g.detail = "oracle returned no answer";
    return g;
  }
  std::vector<size_t> matching;
  for (size_t rep : reps) {
    Decimal a = Decimal::parse(answer_for(correspondences[rep], chosen_draw));
    if (answers_match(*oracle_answer, a)) matching.push_back(rep);
  }
  if (matching.size() != 1) {
    g.status = GroundingStatus::Discarded;
    g.detail = "no correspondence matches the oracle answer";
    return g;
  }
  return finish(correspondences[matching[0]]);
}

// Repartition the tree's leaves per the grounding: paired leaves become the
// variables (source order preserved), everything else a constant.
inline void apply_grounding(ProblemTree& tree, const Grounding& grounding) {
  std::set<int> grounded;
  for (const auto& p : grounding.pairs) grounded.insert(p.leaf_id);
  tree.variables.clear();
  tree.constants.clear();
  for (int id : tree.leaves) {
    if (grounded.count(id)) tree.variables.push_back(id);
    else tree.constants.push_back(id);
  }
}

}  // namespace mwp
