#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "golden.hpp"
#include "mwp/features.hpp"

using namespace mwp;

namespace {

size_t fidx(const std::string& name) {
  const auto& names = feature_names();
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::logic_error("unknown feature " + name);
}

VariantRecord make_variant(const ProblemTree& tree, std::vector<const char*> values) {
  VariantRecord v;
  v.problem_id = "t";
  for (auto* s : values) v.assignment.push_back(Decimal::parse(s));
  v.answer = evaluate(tree, v.assignment);
  v.method = GenerationMethod::M3;
  return v;
}

}  // namespace

TEST_CASE("feature extraction on the worked problems") {
  ProblemTree mary = build_tree(parse_script(golden::mary_credit().code));
  VariantRecord m3 = make_variant(mary, {"80", "12", "19"});
  REQUIRE(m3.answer.to_string() == "49");
  FeatureVector f = extract_features(mary, m3);
  CHECK(f.values[fidx("Minus Count")] == 2.0);
  CHECK(f.values[fidx("Divide Count")] == 0.0);
  CHECK(f.values[fidx("Answer [32, 128)")] == 1.0);
  CHECK(f.values[fidx("Answer [2, 8)")] == 0.0);
  CHECK(f.values[fidx("Answer [2048, 8192)")] == 0.0);
  CHECK(f.values[fidx("Variable Count")] == 3.0);
  CHECK(f.values[fidx("Constant Count")] == 0.0);
  CHECK(f.values[fidx("Constant")] == 0.0);
  CHECK(f.values[fidx("Variable [8, 32)")] == 1.0);  // 12 and 19
  CHECK(f.values[fidx("Operation Count")] == 2.0);
  CHECK(f.values[fidx("Answer Token Count")] == 2.0);  // "49", 1 digit per token

  ProblemTree sled = build_tree(parse_script(golden::sledding().code));
  VariantRecord id4 = make_variant(sled, {"630", "90", "800", "40"});
  FeatureVector g = extract_features(sled, id4);
  CHECK(g.values[fidx("Divide Count")] == 2.0);
  CHECK(g.values[fidx("Convert to Int")] == 1.0);
  CHECK(g.values[fidx("Node Count")] == double(sled.nodes.size()));

  // answer below 2: no bucket set
  ProblemTree one = build_tree(parse_script("print(1)"));
  VariantRecord v1 = make_variant(one, {"1.5"});
  FeatureVector h = extract_features(one, v1);
  for (const char* b : {"Answer [2, 8)", "Answer [8, 32)", "Answer [32, 128)",
                        "Answer [128, 512)", "Answer [512, 2048)", "Answer [2048, 8192)"})
    CHECK(h.values[fidx(b)] == 0.0);
}

TEST_CASE("answer token grouping") {
  ProblemTree t = build_tree(parse_script("print(162)"));
  VariantRecord v = make_variant(t, {"162"});
  FeatureConfig one;
  one.digits_per_token = 1;
  FeatureConfig three;
  three.digits_per_token = 3;
  CHECK(extract_features(t, v, one).values[fidx("Answer Token Count")] == 3.0);
  CHECK(extract_features(t, v, three).values[fidx("Answer Token Count")] == 1.0);
}

TEST_CASE("structural features are invariant across variants") {
  ProblemTree mary = build_tree(parse_script(golden::mary_credit().code));
  FeatureVector a = extract_features(mary, make_variant(mary, {"80", "12", "19"}));
  FeatureVector b = extract_features(mary, make_variant(mary, {"432", "91", "76"}));
  for (const char* structural :
       {"Addition Count", "Divide Count", "Minus Count", "Multiply Count", "Constant Count",
        "Convert to Int", "Operation Count", "Variable Count", "Constant", "Node Count"})
    CHECK(a.values[fidx(structural)] == b.values[fidx(structural)]);
  // value-dependent features differ
  CHECK(a.values[fidx("Answer [32, 128)")] != b.values[fidx("Answer [32, 128)")]);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(17);
  auto urand = [&] { return double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  const size_t n = 60, p = 5;
  std::vector<std::vector<double>> X(n, std::vector<double>(p));
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < p; ++j) X[i][j] = 3.0 * urand();
    y[i] = rng() & 1;
  }
  const double h = 1e-6;
  for (int point = 0; point < 100; ++point) {
    std::vector<double> w(p);
    for (auto& x : w) x = urand();
    double b = urand();
    std::vector<double> g = logistic_gradient(X, y, w, b);
    for (size_t j = 0; j <= p; ++j) {
      auto loss_at = [&](double delta) {
        std::vector<double> w2 = w;
        double b2 = b;
        if (j < p) w2[j] += delta;
        else b2 += delta;
        return logistic_loss(X, y, w2, b2);
      };
      double fd = (loss_at(h) - loss_at(-h)) / (2 * h);
      double denom = std::max(std::abs(fd), 1e-8);
      CHECK(std::abs(g[j] - fd) / denom < 1e-6);
    }
  }
}

TEST_CASE("loss is non-increasing under the default step size") {
  std::mt19937_64 rng(18);
  const size_t n = 400;
  std::vector<FeatureVector> rows(n);
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    rows[i].values.resize(6);
    for (auto& v : rows[i].values) v = double(rng() % 100) / 10.0;
    double s = rows[i].values[0] - rows[i].values[1];
    y[i] = s + double(rng() % 10) > 5.0 ? 1 : 0;
  }
  FitParams params;
  params.max_iterations = 300;
  RegressionModel m = fit(rows, y, params);
  REQUIRE(m.loss_history.size() > 2);
  for (size_t i = 1; i < m.loss_history.size(); ++i)
    CHECK(m.loss_history[i] <= m.loss_history[i - 1] + 1e-12);
}

TEST_CASE("separable single feature gets the separating sign") {
  std::vector<FeatureVector> rows;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({{i < 10 ? 1.0 : -1.0}});
    y.push_back(i < 10 ? 1 : 0);
  }
  FitParams params;
  params.max_iterations = 500;
  RegressionModel m = fit(rows, y, params);
  CHECK(m.weights[0] > 0.5);
}

TEST_CASE("null labels drive standardized weights toward zero") {
  std::mt19937_64 rng(19);
  const size_t n = 10000;
  const size_t p = 16;
  std::vector<FeatureVector> rows(n);
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    rows[i].values.resize(p);
    for (auto& v : rows[i].values) v = double(rng() % 1000);
    y[i] = rng() & 1;  // independent of features
  }
  FitParams params;
  params.max_iterations = 2000;
  RegressionModel m = fit(rows, y, params);
  for (double w : m.weights) CHECK(std::abs(w) < 0.05);
}

TEST_CASE("two-cell dataset matches the hand-solved optimum") {
  // x=1 rows with labels (1,1,0): p=2/3; x=0 rows with labels (1,0): p=1/2
  // saturated solution: bias = logit(1/2) = 0, weight = logit(2/3) = ln 2
  std::vector<FeatureVector> rows = {{{1.0}}, {{1.0}}, {{1.0}}, {{0.0}}, {{0.0}}};
  std::vector<int> y = {1, 1, 0, 1, 0};
  FitParams params;
  params.standardize = false;
  params.learning_rate = 0.5;
  params.max_iterations = 200000;
  params.grad_tolerance = 1e-10;
  RegressionModel m = fit(rows, y, params);
  CHECK(std::abs(m.weights[0] - std::log(2.0)) < 1e-4);
  CHECK(std::abs(m.bias) < 1e-4);
}

TEST_CASE("degenerate constant features are pinned to zero") {
  std::vector<FeatureVector> rows;
  std::vector<int> y;
  std::mt19937_64 rng(20);
  for (int i = 0; i < 200; ++i) {
    double x = double(rng() % 100);
    rows.push_back({{x, 7.0}});  // second column constant
    y.push_back(x > 50 ? 1 : 0);
  }
  RegressionModel m = fit(rows, y);
  REQUIRE(m.degenerate_features == std::vector<int>{1});
  CHECK(m.weights[1] == 0.0);
  CHECK(std::abs(m.weights[0]) > 0.1);
}

TEST_CASE("coefficient report flags") {
  RegressionModel m;
  m.weights = {0.3, -0.2, 0.1};
  auto entries = coefficient_report(m, {"a", "b", "c"});
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].name == "a");
  CHECK(entries[0].flagged_positive);
  CHECK(entries[1].name == "c");
  CHECK(entries[1].flagged_positive);
  CHECK(entries[2].name == "b");
  CHECK(entries[2].flagged_negative);
  int pos = 0, neg = 0;
  for (const auto& e : entries) {
    pos += e.flagged_positive;
    neg += e.flagged_negative;
  }
  CHECK(pos == 2);
  CHECK(neg == 1);  // only one negative weight exists

  RegressionModel zero;
  zero.weights = {0.0, 0.0};
  for (const auto& e : coefficient_report(zero, {"a", "b"})) {
    CHECK_FALSE(e.flagged_positive);
    CHECK_FALSE(e.flagged_negative);
  }
}

TEST_CASE("published coefficient column reproduces its flags") {
  // metamath-7b column of the coefficient table
  RegressionModel m;
  m.weights = {-0.0032, -0.0648, -0.0187, -0.0328, 0.0923, 0.0011, 0.2215, 0.2437,
               0.2610, 0.2267, 0.0076, -0.1987, 0.2400, -0.1196, 0.0722, 0.2840};
  std::vector<std::string> names(feature_names().begin(), feature_names().begin() + 16);
  auto entries = coefficient_report(m, names);
  CHECK(entries.front().name == "Constant");
  CHECK(entries.front().weight == 0.2840);
  CHECK(entries.front().flagged_positive);
  CHECK(entries.back().name == "Answer [2048, 8192)");
  CHECK(entries.back().weight == -0.1987);
  CHECK(entries.back().flagged_negative);
}
