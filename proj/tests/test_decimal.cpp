#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mwp/decimal.hpp"

using mwp::Decimal;

TEST_CASE("parse and to_string round exact values") {
  CHECK(Decimal::parse("630").to_string() == "630");
  CHECK(Decimal::parse("1.25").to_string() == "1.25");
  CHECK(Decimal::parse("0.5").to_string() == "0.5");
  CHECK(Decimal::parse("-3").to_string() == "-3");
  CHECK(Decimal::parse("0").to_string() == "0");
  CHECK(Decimal::parse("00.50").to_string() == "0.5");
  CHECK(Decimal::parse("1500").to_string() == "1500");
  CHECK_THROWS_AS(Decimal::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Decimal::parse("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(Decimal::parse("abc"), std::invalid_argument);
}

TEST_CASE("exact arithmetic") {
  auto d = [](const char* s) { return Decimal::parse(s); };
  CHECK((d("100") - d("15") - d("23")).to_string() == "62");
  CHECK((d("0.1") + d("0.2")).to_string() == "0.3");
  CHECK((d("1.25") * d("4")).to_string() == "5");
  CHECK((d("630") / d("90")).to_string() == "7");
  CHECK((d("800") / d("40")).to_string() == "20");
  CHECK((d("56347") - d("54731") - d("1566")).to_string() == "50");
  CHECK((d("-5") * d("-4")).to_string() == "20");
  CHECK((d("5") - d("8")).to_string() == "-3");
}

TEST_CASE("division falls back to 12 significant digits") {
  Decimal q = Decimal::parse("1") / Decimal::parse("3");
  CHECK(q.to_string() == "0.333333333333");
  Decimal q2 = Decimal::parse("2") / Decimal::parse("3");
  CHECK(q2.to_string() == "0.666666666667");
  // terminating quotients stay exact
  CHECK((Decimal::parse("1") / Decimal::parse("8")).to_string() == "0.125");
  CHECK_THROWS_AS(Decimal::parse("1") / Decimal(), mwp::EvalError);
}

TEST_CASE("truncate and round-half-up") {
  auto d = [](const char* s) { return Decimal::parse(s); };
  CHECK(d("13.7").truncated().to_string() == "13");
  CHECK(d("-13.7").truncated().to_string() == "-13");
  CHECK(d("13.5").rounded_half_up().to_string() == "14");
  CHECK(d("12.5").rounded_half_up().to_string() == "13");
  CHECK(d("12.4").rounded_half_up().to_string() == "12");
  CHECK(d("-2.5").rounded_half_up().to_string() == "-3");
  CHECK(d("0.0003").truncated().to_string() == "0");
  CHECK(d("0.0003").rounded_half_up().to_string() == "0");
  CHECK(d("0.9").rounded_half_up().to_string() == "1");
}

TEST_CASE("integer test with 1e-9 tolerance") {
  CHECK(Decimal::parse("62").is_integer_1e9());
  CHECK(Decimal::parse("62.0000000001").is_integer_1e9());
  CHECK(Decimal::parse("61.9999999999").is_integer_1e9());
  CHECK_FALSE(Decimal::parse("62.000000002").is_integer_1e9());
  CHECK_FALSE(Decimal::parse("2.5").is_integer_1e9());
  CHECK(Decimal::parse("0.0000000001").is_integer_1e9());
  CHECK_FALSE(Decimal::parse("0.5").is_integer_1e9());
  CHECK((Decimal::parse("2") / Decimal::parse("3") * Decimal::parse("3")).is_integer_1e9());
}

TEST_CASE("proper fraction bounds are strict") {
  CHECK(Decimal::parse("0.5").is_proper_fraction());
  CHECK(Decimal::parse("0.999").is_proper_fraction());
  CHECK_FALSE(Decimal::parse("1").is_proper_fraction());
  CHECK_FALSE(Decimal::parse("0").is_proper_fraction());
  CHECK_FALSE(Decimal::parse("-0.5").is_proper_fraction());
  CHECK_FALSE(Decimal::parse("1.5").is_proper_fraction());
}

TEST_CASE("integer powers") {
  auto d = [](const char* s) { return Decimal::parse(s); };
  CHECK(d("2").pow_int(10).to_string() == "1024");
  CHECK(d("1.5").pow_int(2).to_string() == "2.25");
  CHECK(d("2").pow_int(-2).to_string() == "0.25");
  CHECK(d("7").pow_int(0).to_string() == "1");
  CHECK_THROWS_AS(d("2").pow_int(100), mwp::EvalError);
}

TEST_CASE("comparisons") {
  auto d = [](const char* s) { return Decimal::parse(s); };
  CHECK(d("1.5") > d("1.25"));
  CHECK(d("-2") < d("0.1"));
  CHECK(d("100") == d("100.0"));
  CHECK(d("0.3") == d("0.1") + d("0.2"));
  CHECK(d("1000000") > d("999999.999999"));
}

TEST_CASE("fixed-place formatting") {
  CHECK(Decimal::parse("4.73").to_string_fixed(2) == "4.73");
  CHECK(Decimal::parse("4.7").to_string_fixed(2) == "4.70");
  CHECK(Decimal::parse("4.735").to_string_fixed(2) == "4.74");
  CHECK(Decimal::parse("5").to_string_fixed(0) == "5");
  CHECK(Decimal::parse("-1.005").to_string_fixed(2) == "-1.01");
}

TEST_CASE("answer tolerance helper") {
  using mwp::answers_match;
  CHECK(answers_match(Decimal::parse("62.0000000001"), Decimal::parse("62")));
  CHECK(answers_match(Decimal::parse("62"), Decimal::parse("62")));
  CHECK_FALSE(answers_match(Decimal::parse("62.1"), Decimal::parse("62")));
  // relative tolerance for large magnitudes
  CHECK(answers_match(Decimal::parse("1000000.5"), Decimal::parse("1000000")));
  CHECK_FALSE(answers_match(Decimal::parse("6"), Decimal::parse("5")));
}

TEST_CASE("randomized arithmetic agrees with double arithmetic") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    long long a = (long long)(rng() % 100000) - 50000;
    long long b = (long long)(rng() % 100000) - 50000;
    Decimal da = Decimal::from_int(a), db = Decimal::from_int(b);
    CHECK((da + db).to_double() == double(a + b));
    CHECK((da - db).to_double() == double(a - b));
    CHECK((da * db).to_double() == Catch::Approx(double(a) * double(b)));
    if (b != 0)
      CHECK((da / db).to_double() == Catch::Approx(double(a) / double(b)).epsilon(1e-9));
  }
}
