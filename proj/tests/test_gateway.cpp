#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "mwp/gateway.hpp"

using namespace mwp;

TEST_CASE("prompt templates instantiate byte-exactly") {
  std::string cot = render_prompt("2+2?", PromptTemplate::ZeroShotCoT);
  CHECK(cot ==
        "Solve a math problem. The solution ends with \"the answer is (a number)\" like "
        "\"the answer is 1\".\n\nQuestion: 2+2?\n\nAnswer: Let's think step by step.");

  std::string code = render_prompt("2+2?", PromptTemplate::CodeGen, "4");
  CHECK(code.find("Do not use if-else statements, floor divisions, and loops") !=
        std::string::npos);
  CHECK(code.find("Given problem: 2+2?") != std::string::npos);
  CHECK(code.find("Answer: 4") != std::string::npos);
  CHECK(code.rfind("Python script:") == code.size() - 14);

  // empty question slots in without error
  CHECK(render_prompt("", PromptTemplate::ZeroShotCoT).find("Question: \n") !=
        std::string::npos);
}

TEST_CASE("answer extraction") {
  auto ex = [](const char* s) { return extract_answer(s); };
  CHECK(ex("so the answer is 62.")->to_string() == "62");
  CHECK(ex("The Answer Is $1,000")->to_string() == "1000");
  CHECK(ex("the answer is -3.5, final")->to_string() == "-3.5");
  CHECK_FALSE(ex("I cannot solve this.").has_value());
  CHECK_FALSE(ex("").has_value());
  // fallback: last standalone number
  CHECK(ex("It could be 4, but more likely 7")->to_string() == "7");
  // last occurrence of the phrase wins
  CHECK(ex("the answer is 5. Wait, the answer is 6.")->to_string() == "6");
  // idempotent / pure
  std::string r = "steps... the answer is 42.";
  CHECK(*ex(r.c_str()) == *ex(r.c_str()));
}

TEST_CASE("perfect solver mock answers with the hint") {
  ModelSpec spec;
  spec.name = "mock-perfect";
  spec.transport = MockProfile{};
  ModelClient client(spec);
  MockHint hint{"p1", 3, Decimal::parse("162")};
  QueryRecord rec = client.ask("whatever", hint);
  REQUIRE(rec.extracted_answer.has_value());
  CHECK(rec.extracted_answer->to_string() == "162");
  CHECK(rec.problem_id == "p1");
  CHECK(rec.variant_index == 3);
  // no hint: the mock cannot answer
  QueryRecord blank = client.ask("whatever");
  CHECK_FALSE(blank.extracted_answer.has_value());
}

TEST_CASE("wrong answers stay outside the tolerance even at scale") {
  for (const char* v : {"1", "62", "1000000", "200411", "0.5", "-40"}) {
    Decimal truth = Decimal::parse(v);
    Decimal wrong = gateway_detail::wrong_answer(truth);
    CHECK_FALSE(answers_match(wrong, truth));
  }
}

TEST_CASE("fixed accuracy mock hits its rate deterministically") {
  ModelSpec spec;
  spec.name = "mock-flaky";
  MockProfile profile;
  profile.kind = MockProfile::Kind::FixedAccuracy;
  profile.accuracy = 0.5;
  profile.seed = 77;
  spec.transport = profile;
  ModelClient client(spec);
  int correct = 0;
  const int n = 10000;
  Decimal truth = Decimal::parse("62");
  for (int i = 0; i < n; ++i) {
    MockHint hint{"p" + std::to_string(i / 100), i % 100, truth};
    QueryRecord rec = client.ask("q", hint);
    REQUIRE(rec.extracted_answer.has_value());
    if (answers_match(*rec.extracted_answer, truth)) ++correct;
  }
  double rate = double(correct) / n;
  CHECK(rate > 0.48);
  CHECK(rate < 0.52);
  // deterministic per (problem, variant, seed)
  MockHint h{"p1", 4, truth};
  CHECK(client.ask("q", h).raw_response == client.ask("q", h).raw_response);
}

TEST_CASE("predicate mock fails exactly the designated variant") {
  ModelSpec spec;
  spec.name = "mock-first";
  MockProfile profile;
  profile.kind = MockProfile::Kind::FailOnPredicate;
  profile.predicate_name = "first_variant";
  spec.transport = profile;
  ModelClient client(spec);
  Decimal truth = Decimal::parse("10");
  auto correct_at = [&](int idx) {
    QueryRecord rec = client.ask("q", MockHint{"p", idx, truth});
    return answers_match(*rec.extracted_answer, truth);
  };
  CHECK(correct_at(-1));  // original
  CHECK_FALSE(correct_at(0));
  CHECK(correct_at(1));
  CHECK(correct_at(7));
}

TEST_CASE("in-flight requests never exceed max_concurrency") {
  std::atomic<int> in_flight{0};
  std::atomic<int> high_water{0};
  ModelSpec spec;
  spec.name = "mock-limited";
  spec.max_concurrency = 3;
  MockProfile profile;
  profile.kind = MockProfile::Kind::FailOnPredicate;
  profile.predicate = [&](const MockHint&) {
    int now = ++in_flight;
    int hw = high_water.load();
    while (now > hw && !high_water.compare_exchange_weak(hw, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    return false;
  };
  spec.transport = profile;
  ModelClient client(spec);
  std::vector<std::thread> threads;
  for (int i = 0; i < 24; ++i)
    threads.emplace_back([&, i] {
      client.ask("q", MockHint{"p", i, Decimal::parse("1")});
    });
  for (auto& t : threads) t.join();
  CHECK(high_water.load() <= 3);
  CHECK(high_water.load() >= 2);  // the pool actually ran concurrently
}

TEST_CASE("http transport against a local chat endpoint") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (req.has_header("Authorization")) seen_auth = req.get_header_value("Authorization");
    nlohmann::json body = nlohmann::json::parse(req.body);
    REQUIRE(body["model"] == "test-model");
    REQUIRE(body["messages"][0]["role"] == "user");
    nlohmann::json reply = {
        {"choices",
         {{{"message", {{"role", "assistant"}, {"content", "the answer is 42."}}},
           {"finish_reason", "stop"}}}},
        {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 5}}},
    };
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  setenv("MWP_TEST_TOKEN", "sekrit", 1);
  ModelSpec spec;
  spec.name = "remote";
  HttpChatTransport http;
  http.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  http.model_id = "test-model";
  http.auth_env = "MWP_TEST_TOKEN";
  spec.transport = http;
  spec.retry.max_retries = 1;
  spec.retry.backoff_base_ms = 10;
  ModelClient client(spec);

  QueryRecord rec = client.ask("prompt");
  CHECK(rec.raw_response == "the answer is 42.");
  REQUIRE(rec.extracted_answer.has_value());
  CHECK(rec.extracted_answer->to_string() == "42");
  CHECK(rec.prompt_tokens == 12);
  CHECK(rec.completion_tokens == 5);
  CHECK(seen_auth == "Bearer sekrit");
  CHECK(hits == 1);

  server.stop();
  server_thread.join();
}

TEST_CASE("http retry and failure classification") {
  httplib::Server server;
  std::atomic<int> hits{0};
  int fail_first = 0;  // set per section
  int status_code = 200;
  server.Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    int n = ++hits;
    if (n <= fail_first) {
      res.status = status_code;
      res.set_content("slow down", "text/plain");
      return;
    }
    nlohmann::json reply = {
        {"choices",
         {{{"message", {{"role", "assistant"}, {"content", "the answer is 7"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  auto make_client = [&](int retries) {
    ModelSpec spec;
    spec.name = "remote";
    HttpChatTransport http;
    http.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/chat";
    http.model_id = "m";
    spec.transport = http;
    spec.retry.max_retries = retries;
    spec.retry.backoff_base_ms = 5;
    return ModelSpec(spec);
  };

  SECTION("rate limit retried until success") {
    hits = 0;
    fail_first = 2;
    status_code = 429;
    ModelClient client(make_client(3));
    QueryRecord rec = client.ask("p");
    CHECK(rec.extracted_answer->to_string() == "7");
    CHECK(hits == 3);
  }

  SECTION("server errors exhaust retries") {
    hits = 0;
    fail_first = 1000;
    status_code = 503;
    ModelClient client(make_client(2));
    CHECK_THROWS_AS(client.ask("p"), GatewayError);
    CHECK(hits == 3);  // 1 + 2 retries
  }

  SECTION("auth failures are not retried") {
    hits = 0;
    fail_first = 1000;
    status_code = 401;
    ModelClient client(make_client(3));
    try {
      client.ask("p");
      FAIL("expected GatewayError");
    } catch (const GatewayError& e) {
      CHECK(e.kind() == GatewayErrorKind::AuthFailure);
    }
    CHECK(hits == 1);
  }

  SECTION("unparsable body is a malformed response") {
    hits = 0;
    fail_first = 1000;
    status_code = 200;  // handler returns "slow down" as text
    ModelClient client(make_client(0));
    try {
      client.ask("p");
      FAIL("expected GatewayError");
    } catch (const GatewayError& e) {
      CHECK(e.kind() == GatewayErrorKind::MalformedResponse);
    }
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("unreachable endpoint times out after retries") {
  ModelSpec spec;
  spec.name = "remote";
  HttpChatTransport http;
  http.endpoint = "http://127.0.0.1:9/unreachable";  // discard port, nothing listens
  http.model_id = "m";
  spec.transport = http;
  spec.retry.max_retries = 1;
  spec.retry.backoff_base_ms = 5;
  spec.request_timeout_ms = 200;
  ModelClient client(spec);
  try {
    client.ask("p");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::Timeout);
  }
}
