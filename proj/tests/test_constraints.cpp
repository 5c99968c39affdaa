#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "constraint_oracle.hpp"
#include "golden.hpp"
#include "mwp/constraints.hpp"
#include "random_trees.hpp"

using namespace mwp;

TEST_CASE("profile fields") {
  NodeConstraintProfile p64 = profile(Decimal::parse("64"));
  CHECK(p64.is_positive);
  CHECK(p64.is_integer);
  CHECK_FALSE(p64.is_proper_fraction);
  CHECK(p64.prime_factor_count == 6);
  CHECK(p64.scientific_digit_count == 2);

  NodeConstraintProfile ph = profile(Decimal::parse("0.5"));
  CHECK(ph.is_positive);
  CHECK_FALSE(ph.is_integer);
  CHECK(ph.is_proper_fraction);
  CHECK(ph.prime_factor_count == 0);  // zero when not an integer

  CHECK(profile(Decimal::parse("150000")).scientific_digit_count == 2);
  CHECK(profile(Decimal::parse("172568")).scientific_digit_count == 6);
  CHECK(profile(Decimal::parse("1.25")).scientific_digit_count == 3);
  CHECK(profile(Decimal::parse("1725683")).scientific_digit_count == 6);  // capped
  CHECK(profile(Decimal::parse("1")).prime_factor_count == 0);
  CHECK(profile(Decimal()).prime_factor_count == 0);
  CHECK(profile(Decimal::parse("-12")).prime_factor_count == 3);
  CHECK(profile(Decimal::parse("1500")).prime_factor_count == 6);
  // integer within tolerance: factors of the rounded value
  CHECK(profile(Decimal::parse("62.0000000001")).prime_factor_count == 2);
}

TEST_CASE("core pair checks are one-way implications") {
  ConstraintConfig core = ConstraintConfig::core();
  auto p = [](const char* s) { return profile(Decimal::parse(s)); };
  CHECK_FALSE(check_pair(p("6"), p("2.5"), core));   // integer violated
  CHECK(check_pair(p("-3"), p("7"), core));          // vacuous positivity
  CHECK(check_pair(p("2.5"), p("6"), core));         // gaining integrality is fine
  CHECK_FALSE(check_pair(p("5"), p("-2"), core));    // positivity violated
  CHECK_FALSE(check_pair(p("0.5"), p("1.5"), core)); // proper fraction violated
  CHECK(check_pair(p("0.5"), p("0.7"), core));
}

TEST_CASE("extended pair rules") {
  ConstraintConfig ext = ConstraintConfig::extended();
  auto p = [](const char* s) { return profile(Decimal::parse(s)); };
  CHECK(check_pair(p("64"), p("48"), ext));        // f=6 vs f=5 >= 3
  CHECK_FALSE(check_pair(p("64"), p("2"), ext));   // f=6 vs f=1
  CHECK(check_pair(p("7"), p("64"), ext));         // more factors is fine
  CHECK_FALSE(check_pair(p("150000"), p("172568"), ext));  // s=2 vs s=6
  CHECK(check_pair(p("150000"), p("140000"), ext));        // s=2 vs s=2
  CHECK(check_pair(p("172568"), p("150000"), ext));        // fewer digits is fine
}

TEST_CASE("check_tree on the worked credit problem") {
  ProblemTree tree = build_tree(parse_script(golden::mary_credit().code));
  ConstraintConfig core = ConstraintConfig::core();
  auto vec = [](std::initializer_list<const char*> xs) {
    std::vector<Decimal> v;
    for (auto* x : xs) v.push_back(Decimal::parse(x));
    return v;
  };
  CHECK(check_tree(tree, vec({"80", "12", "19"}), core));
  CHECK(check_tree(tree, vec({"432", "91", "76"}), core));
  CHECK(check_tree(tree, vec({"56347", "54731", "1566"}), core));
  // 100 - 15 - 90 goes negative at the root
  CHECK_FALSE(check_tree(tree, vec({"100", "15", "90"}), core));
  // identity always passes
  CHECK(check_tree(tree, vec({"100", "15", "23"}), core));
}

TEST_CASE("half-as-many female students example") {
  // 6 male, half as many female; male=5 makes 2.5 students
  ProblemTree tree = build_tree(parse_script("male = 6\nfemale = male / 2\nprint(male + female)"));
  ProblemTree grounded = tree;
  grounded.variables = {tree.leaves[0]};
  grounded.constants = {tree.leaves[1]};
  ConstraintConfig core = ConstraintConfig::core();
  CHECK_FALSE(check_tree(grounded, std::vector<Decimal>{Decimal::parse("5")}, core));
  CHECK(check_tree(grounded, std::vector<Decimal>{Decimal::parse("8")}, core));
}

TEST_CASE("division by zero in a variant is a rejection, not an error") {
  ProblemTree tree = build_tree(parse_script("x = 10 / 2\nprint(x)"));
  std::vector<Decimal> zero_div = {Decimal::parse("10"), Decimal()};
  CHECK_FALSE(check_tree(tree, zero_div, ConstraintConfig::core()));
}

TEST_CASE("check_pair is reflexive") {
  std::mt19937_64 rng(31);
  ConstraintConfig ext = ConstraintConfig::extended();
  for (int i = 0; i < 500; ++i) {
    long long num = (long long)(rng() % 2000001) - 1000000;
    long long den = 1 + (long long)(rng() % 97);
    Decimal v = Decimal::from_int(num) / Decimal::from_int(den);
    NodeConstraintProfile p = profile(v);
    CHECK(check_pair(p, p, ext));
    CHECK(check_pair(p, p, ConstraintConfig::core()));
  }
}

TEST_CASE("extended acceptance implies core acceptance") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 300; ++i) {
    testgen::RandomTree rt = testgen::random_tree(rng);
    auto assignment = testgen::random_assignment(rng, rt.tree);
    bool ext = check_tree(rt.tree, assignment, ConstraintConfig::extended());
    bool core = check_tree(rt.tree, assignment, ConstraintConfig::core());
    if (ext) CHECK(core);
  }
}

TEST_CASE("check_tree agrees with the brute-force oracle") {
  std::mt19937_64 rng(33);
  int accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    testgen::RandomTree rt = testgen::random_tree(rng);
    auto assignment = testgen::random_assignment(rng, rt.tree);
    bool mine = check_tree(rt.tree, assignment, ConstraintConfig::extended());
    bool oracle_says = oracle::tree_ok(rt.tree, assignment, true);
    REQUIRE(mine == oracle_says);
    bool mine_core = check_tree(rt.tree, assignment, ConstraintConfig::core());
    bool oracle_core = oracle::tree_ok(rt.tree, assignment, false);
    REQUIRE(mine_core == oracle_core);
    if (mine) ++accepted;
  }
  CHECK(accepted > 0);  // the comparison exercises both outcomes
}
