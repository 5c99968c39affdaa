#pragma once

// Attack metrics: OA / AA / ASR per campaign, plus the cross-model analyses
// (universal attacks over model prefixes, pairwise transferability, targeted
// "efficient attack" plans, incorrect-variant distributions). Everything here
// is pure aggregation over immutable outcome logs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwp {

struct VariantOutcome {
  int variant_index = 0;
  bool correct = false;
};

struct ProblemOutcome {
  bool original_correct = false;
  std::vector<VariantOutcome> variants;
};

struct CampaignResult {
  std::string model;
  std::map<std::string, ProblemOutcome> problems;  // keyed by problem id
};

struct AttackReport {
  double oa_pct = 0.0;
  double aa_pct = 0.0;
  double asr_pct = 0.0;
  bool asr_defined = false;  // false when OA == 0
  std::map<std::string, bool> i_xy;
  std::map<std::string, double> incorrect_variant_pct;
  double mean_incorrect_variant_pct = 0.0;
  int problems_total = 0;
  int problems_with_variants = 0;
};

// Table rendering: OA/AA/ASR print as integers with one decimal (half-up);
// rate-style figures print at one decimal.
inline double round_half_up_int(double pct) { return std::floor(pct + 0.5); }
inline double round_half_up_1dp(double pct) { return std::floor(pct * 10.0 + 0.5) / 10.0; }

inline std::string format_pct_table(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round_half_up_int(pct));
  return buf;
}

inline std::string format_pct_1dp(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round_half_up_1dp(pct));
  return buf;
}

inline AttackReport score(const CampaignResult& campaign) {
  AttackReport r;
  r.problems_total = int(campaign.problems.size());
  if (r.problems_total == 0) return r;
  int originals_correct = 0;
  int ixy_sum = 0;
  double incorrect_pct_sum = 0.0;
  for (const auto& [id, outcome] : campaign.problems) {
    if (outcome.original_correct) ++originals_correct;
    bool all_variants_correct = true;
    int wrong = 0;
    for (const auto& v : outcome.variants) {
      if (!v.correct) {
        all_variants_correct = false;
        ++wrong;
      }
    }
    r.i_xy[id] = all_variants_correct;
    if (!outcome.variants.empty()) {
      ++r.problems_with_variants;
      if (all_variants_correct) ++ixy_sum;
      double pct = 100.0 * double(wrong) / double(outcome.variants.size());
      r.incorrect_variant_pct[id] = pct;
      incorrect_pct_sum += pct;
    }
  }
  r.oa_pct = 100.0 * double(originals_correct) / double(r.problems_total);
  if (r.problems_with_variants > 0) {
    r.aa_pct = 100.0 * double(ixy_sum) / double(r.problems_with_variants);
    r.mean_incorrect_variant_pct = incorrect_pct_sum / double(r.problems_with_variants);
  }
  if (r.oa_pct > 0.0) {
    r.asr_pct = 100.0 * (r.oa_pct - r.aa_pct) / r.oa_pct;
    r.asr_defined = true;
  }
  return r;
}

namespace metrics_detail {

using AdvSet = std::set<std::pair<std::string, int>>;  // (problem id, variant index)

inline AdvSet adversarial_set(const CampaignResult& c) {
  AdvSet s;
  for (const auto& [id, outcome] : c.problems)
    for (const auto& v : outcome.variants)
      if (!v.correct) s.emplace(id, v.variant_index);
  return s;
}

inline void require_shared_universe(const std::vector<CampaignResult>& campaigns) {
  if (campaigns.empty()) return;
  auto universe = [](const CampaignResult& c) {
    std::set<std::pair<std::string, int>> u;
    for (const auto& [id, outcome] : c.problems)
      for (const auto& v : outcome.variants) u.emplace(id, v.variant_index);
    return u;
  };
  auto first = universe(campaigns.front());
  for (size_t i = 1; i < campaigns.size(); ++i)
    if (universe(campaigns[i]) != first)
      throw std::invalid_argument("campaigns cover different variant universes");
}

}  // namespace metrics_detail

// Shared adversarial-variant percentage for each prefix of the model ordering:
// |intersection of the first k adversarial sets| / |first model's set|.
inline std::vector<std::optional<double>> universal_attacks(
    const std::vector<CampaignResult>& campaigns) {
  metrics_detail::require_shared_universe(campaigns);
  std::vector<std::optional<double>> out;
  metrics_detail::AdvSet shared;
  size_t base = 0;
  for (size_t k = 0; k < campaigns.size(); ++k) {
    auto adv = metrics_detail::adversarial_set(campaigns[k]);
    if (k == 0) {
      shared = adv;
      base = shared.size();
    } else {
      metrics_detail::AdvSet next;
      for (const auto& e : shared)
        if (adv.count(e)) next.insert(e);
      shared = std::move(next);
    }
    if (base == 0) out.push_back(std::nullopt);
    else out.push_back(100.0 * double(shared.size()) / double(base));
  }
  return out;
}

// |adv(A) ∩ adv(B)| / |adv(B)|, as a percentage.
inline std::optional<double> transferability(const CampaignResult& a, const CampaignResult& b) {
  metrics_detail::require_shared_universe({a, b});
  auto adv_a = metrics_detail::adversarial_set(a);
  auto adv_b = metrics_detail::adversarial_set(b);
  if (adv_b.empty()) return std::nullopt;
  size_t common = 0;
  for (const auto& e : adv_b)
    if (adv_a.count(e)) ++common;
  return 100.0 * double(common) / double(adv_b.size());
}

inline std::vector<std::vector<std::optional<double>>> transfer_matrix(
    const std::vector<CampaignResult>& campaigns) {
  std::vector<std::vector<std::optional<double>>> m(campaigns.size());
  for (size_t i = 0; i < campaigns.size(); ++i)
    for (size_t j = 0; j < campaigns.size(); ++j)
      m[i].push_back(transferability(campaigns[i], campaigns[j]));
  return m;
}

struct EfficientAttackPlan {
  struct Entry {
    std::string problem_id;
    std::vector<int> failing_variants;
  };
  std::vector<Entry> entries;
  long long plan_requests = 0;        // failing variants forwarded to the target
  long long full_sweep_requests = 0;  // every variant outcome in the campaign
  double request_reduction_pct = 0.0;
};

// Top-k problems by the source model's incorrect-variant count (ties by id).
inline EfficientAttackPlan efficient_attack_plan(const CampaignResult& source, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  EfficientAttackPlan plan;
  std::vector<std::pair<std::string, std::vector<int>>> ranked;
  for (const auto& [id, outcome] : source.problems) {
    plan.full_sweep_requests += (long long)outcome.variants.size();
    std::vector<int> failing;
    for (const auto& v : outcome.variants)
      if (!v.correct) failing.push_back(v.variant_index);
    if (!failing.empty()) ranked.emplace_back(id, std::move(failing));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.size() != b.second.size()) return a.second.size() > b.second.size();
    return a.first < b.first;
  });
  for (int i = 0; i < k && i < int(ranked.size()); ++i) {
    plan.plan_requests += (long long)ranked[size_t(i)].second.size();
    plan.entries.push_back({ranked[size_t(i)].first, std::move(ranked[size_t(i)].second)});
  }
  if (plan.full_sweep_requests > 0)
    plan.request_reduction_pct = 100.0 *
                                 double(plan.full_sweep_requests - plan.plan_requests) /
                                 double(plan.full_sweep_requests);
  return plan;
}

struct VariantDistribution {
  std::array<int, 10> decile_counts{};  // [0,10), [10,20), ..., [90,100]
  double mean_pct = 0.0;
};

inline VariantDistribution incorrect_variant_distribution(const CampaignResult& campaign) {
  VariantDistribution d;
  AttackReport r = score(campaign);
  for (const auto& [id, pct] : r.incorrect_variant_pct) {
    int bucket = std::min(9, int(pct / 10.0));
    ++d.decile_counts[size_t(bucket)];
  }
  d.mean_pct = r.mean_incorrect_variant_pct;
  return d;
}

}  // namespace mwp
