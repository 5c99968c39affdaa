#pragma once

// Problem features over perturbed trees and a from-scratch logistic regression
// (batch gradient descent, internally standardized features) for the
// per-model correctness analysis.

#include <cmath>
#include <string>
#include <vector>

#include "mwp/generate.hpp"
#include "mwp/tree.hpp"

namespace mwp {

struct FeatureConfig {
  int digits_per_token = 1;  // 3 approximates tokenizers that group digits
};

// Registry; extraction emits values in exactly this order.
inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "Addition Count",
      "Divide Count",
      "Minus Count",
      "Multiply Count",
      "Constant Count",
      "Variable [8, 32)",
      "Answer [2, 8)",
      "Answer [8, 32)",
      "Answer [32, 128)",
      "Answer [128, 512)",
      "Answer [512, 2048)",
      "Answer [2048, 8192)",
      "Convert to Int",
      "Operation Count",
      "Variable Count",
      "Constant",
      "Node Count",
      "Answer Token Count",
  };
  return names;
}

struct FeatureVector {
  std::vector<double> values;  // aligned with feature_names()
};

inline FeatureVector extract_features(const ProblemTree& tree, const VariantRecord& variant,
                                      const FeatureConfig& config = {}) {
  OpCounts ops = count_ops(tree);
  double answer = variant.answer.to_double();

  bool variable_8_32 = false;
  for (const auto& v : variant.assignment) {
    double x = v.to_double();
    if (x >= 8.0 && x < 32.0) variable_8_32 = true;
  }

  // one-hot power-of-4 answer buckets
  std::vector<double> buckets(6, 0.0);
  double lo = 2.0;
  for (size_t i = 0; i < buckets.size(); ++i, lo *= 4.0)
    if (answer >= lo && answer < lo * 4.0) buckets[i] = 1.0;

  int digit_chars = 0;
  for (char c : variant.answer.to_string())
    if (c >= '0' && c <= '9') ++digit_chars;
  int token_count = (digit_chars + config.digits_per_token - 1) / config.digits_per_token;

  FeatureVector f;
  f.values = {
      double(ops.add),
      double(ops.div),
      double(ops.sub),
      double(ops.mul),
      double(tree.constants.size()),
      variable_8_32 ? 1.0 : 0.0,
      buckets[0],
      buckets[1],
      buckets[2],
      buckets[3],
      buckets[4],
      buckets[5],
      ops.trunc > 0 ? 1.0 : 0.0,
      double(ops.total()),
      double(tree.variables.size()),
      tree.constants.empty() ? 0.0 : 1.0,
      double(tree.nodes.size()),
      double(token_count),
  };
  return f;
}

struct FitParams {
  double learning_rate = 0.1;
  int max_iterations = 5000;
  double grad_tolerance = 1e-6;
  bool standardize = true;
};

struct RegressionModel {
  std::vector<double> weights;  // in standardized feature space
  double bias = 0.0;
  std::vector<double> feature_mean, feature_std;
  std::vector<int> degenerate_features;  // constant columns, weight pinned at 0
  int iterations = 0;
  double final_loss = 0.0;
  double learning_rate = 0.0;
  bool converged = false;
  std::vector<double> loss_history;  // one entry per iteration
};

namespace features_detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// numerically stable -[y log p + (1-y) log(1-p)] with p = sigmoid(z)
inline double logistic_term(double z, double y) {
  double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - y * z;
}

}  // namespace features_detail

// Mean logistic loss over rows of X (one weight per column, plus bias).
inline double logistic_loss(const std::vector<std::vector<double>>& X,
                            const std::vector<int>& y, const std::vector<double>& w,
                            double bias) {
  double total = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    double z = bias;
    for (size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
    total += features_detail::logistic_term(z, double(y[i]));
  }
  return total / double(X.size());
}

// Analytic gradient of logistic_loss; last element is d/d(bias).
inline std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& X,
                                             const std::vector<int>& y,
                                             const std::vector<double>& w, double bias) {
  std::vector<double> g(w.size() + 1, 0.0);
  for (size_t i = 0; i < X.size(); ++i) {
    double z = bias;
    for (size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
    double err = features_detail::sigmoid(z) - double(y[i]);
    for (size_t j = 0; j < w.size(); ++j) g[j] += err * X[i][j];
    g[w.size()] += err;
  }
  for (auto& v : g) v /= double(X.size());
  return g;
}

inline RegressionModel fit(const std::vector<FeatureVector>& features,
                           const std::vector<int>& labels, const FitParams& params = {}) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("fit: empty or mismatched dataset");
  size_t n = features.size();
  size_t p = features[0].values.size();

  RegressionModel model;
  model.learning_rate = params.learning_rate;
  model.feature_mean.assign(p, 0.0);
  model.feature_std.assign(p, 1.0);

  std::vector<std::vector<double>> X(n, std::vector<double>(p));
  for (size_t i = 0; i < n; ++i) X[i] = features[i].values;

  if (params.standardize) {
    for (size_t j = 0; j < p; ++j) {
      double mean = 0.0;
      for (size_t i = 0; i < n; ++i) mean += X[i][j];
      mean /= double(n);
      double var = 0.0;
      for (size_t i = 0; i < n; ++i) var += (X[i][j] - mean) * (X[i][j] - mean);
      var /= double(n);
      model.feature_mean[j] = mean;
      if (var <= 0.0) {
        model.degenerate_features.push_back(int(j));
        model.feature_std[j] = 1.0;
        for (size_t i = 0; i < n; ++i) X[i][j] = 0.0;  // weight stays 0
      } else {
        model.feature_std[j] = std::sqrt(var);
        for (size_t i = 0; i < n; ++i) X[i][j] = (X[i][j] - mean) / model.feature_std[j];
      }
    }
  }

  std::vector<double> w(p, 0.0);
  double bias = 0.0;
  int iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    std::vector<double> g = logistic_gradient(X, labels, w, bias);
    for (int j : model.degenerate_features) g[size_t(j)] = 0.0;
    double norm = 0.0;
    for (double v : g) norm += v * v;
    norm = std::sqrt(norm);
    model.loss_history.push_back(logistic_loss(X, labels, w, bias));
    if (norm <= params.grad_tolerance) {
      model.converged = true;
      break;
    }
    for (size_t j = 0; j < p; ++j) w[j] -= params.learning_rate * g[j];
    bias -= params.learning_rate * g[p];
  }
  model.weights = std::move(w);
  model.bias = bias;
  model.iterations = iter;
  model.final_loss = logistic_loss(X, labels, model.weights, bias);
  return model;
}

struct CoefficientEntry {
  std::string name;
  double weight = 0.0;
  bool flagged_positive = false;
  bool flagged_negative = false;
};

// Features sorted by weight, top-2 positive and top-2 negative flagged.
inline std::vector<CoefficientEntry> coefficient_report(const RegressionModel& model,
                                                        const std::vector<std::string>& names) {
  std::vector<CoefficientEntry> entries;
  for (size_t j = 0; j < model.weights.size(); ++j)
    entries.push_back({j < names.size() ? names[j] : "feature_" + std::to_string(j),
                       model.weights[j], false, false});
  std::sort(entries.begin(), entries.end(),
            [](const CoefficientEntry& a, const CoefficientEntry& b) { return a.weight > b.weight; });
  int flagged = 0;
  for (size_t i = 0; i < entries.size() && flagged < 2; ++i)
    if (entries[i].weight > 0.0) {
      entries[i].flagged_positive = true;
      ++flagged;
    }
  flagged = 0;
  for (size_t i = entries.size(); i-- > 0 && flagged < 2;)
    if (entries[i].weight < 0.0) {
      entries[i].flagged_negative = true;
      ++flagged;
    }
  return entries;
}

}  // namespace mwp
