#pragma once

// Uniform client over answer-producing models: chat-completion HTTP endpoints
// for real campaigns, deterministic mock transports for offline runs and
// tests. Retries with exponential backoff honor per-model concurrency limits.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include "mwp/decimal.hpp"
#include "mwp/prompts.hpp"
#include "mwp/rng.hpp"

namespace mwp {

enum class GatewayErrorKind { Timeout, RateLimited, AuthFailure, MalformedResponse };

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  GatewayErrorKind kind() const { return kind_; }

 private:
  GatewayErrorKind kind_;
};

// Ground-truth context handed to mock transports only; HTTP ignores it.
struct MockHint {
  std::string problem_id;
  int variant_index = -1;
  std::optional<Decimal> true_answer;
};

struct MockProfile {
  enum class Kind { PerfectSolver, FailOnPredicate, FixedAccuracy };
  Kind kind = Kind::PerfectSolver;
  double accuracy = 1.0;  // FixedAccuracy
  uint64_t seed = 0;      // FixedAccuracy
  std::string predicate_name;  // FailOnPredicate: named predicate (config-friendly)
  std::function<bool(const MockHint&)> predicate;  // overrides predicate_name if set
};

// Registry of named failure predicates usable from config files.
inline std::function<bool(const MockHint&)> mock_predicate(const std::string& name) {
  if (name == "first_variant")
    return [](const MockHint& h) { return h.variant_index == 0; };
  if (name == "variants")  // every variant fails, originals pass
    return [](const MockHint& h) { return h.variant_index >= 0; };
  if (name == "all") return [](const MockHint&) { return true; };
  if (name == "none") return [](const MockHint&) { return false; };
  throw std::invalid_argument("unknown mock predicate: " + name);
}

struct HttpChatTransport {
  std::string endpoint;   // e.g. https://host[:port]/v1/chat/completions
  std::string auth_env;   // environment variable holding the bearer token
  std::string model_id;
};

struct RetryPolicy {
  int max_retries = 3;
  int backoff_base_ms = 500;
};

struct ModelSpec {
  std::string name;
  std::variant<HttpChatTransport, MockProfile> transport = MockProfile{};
  int max_concurrency = 1;
  int request_timeout_ms = 30000;
  RetryPolicy retry;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

struct QueryRecord {
  std::string problem_id;
  int variant_index = -1;  // -1 = original problem
  std::string model;
  std::string prompt;
  std::string raw_response;
  std::optional<Decimal> extracted_answer;
  long long latency_ms = 0;
  long long prompt_tokens = -1;
  long long completion_tokens = -1;
  bool truncated = false;
};

namespace gateway_detail {

// Wrong on purpose: offset keeps the reply outside the 1e-6 relative answer
// tolerance even for very large answers.
inline Decimal wrong_answer(const Decimal& truth) {
  return truth + Decimal::from_int(1) + truth.abs().truncated() * Decimal::parse("0.5");
}

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}
  void acquire() {
    std::unique_lock<std::mutex> lk(m_);
    cv_.wait(lk, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lk(m_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  int count_;
};

struct SemaphoreGuard {
  explicit SemaphoreGuard(Semaphore& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  Semaphore& s_;
};

}  // namespace gateway_detail

class ModelClient {
 public:
  explicit ModelClient(ModelSpec spec)
      : spec_(std::move(spec)),
        semaphore_(std::make_unique<gateway_detail::Semaphore>(
            std::max(1, spec_.max_concurrency))) {}

  const ModelSpec& spec() const { return spec_; }

  QueryRecord ask(const std::string& prompt, const MockHint& hint = {}) const {
    gateway_detail::SemaphoreGuard guard(*semaphore_);
    QueryRecord rec;
    rec.problem_id = hint.problem_id;
    rec.variant_index = hint.variant_index;
    rec.model = spec_.name;
    rec.prompt = prompt;
    auto start = std::chrono::steady_clock::now();
    if (const auto* mock = std::get_if<MockProfile>(&spec_.transport)) {
      rec.raw_response = mock_response(*mock, hint);
    } else {
      rec.raw_response = http_ask(std::get<HttpChatTransport>(spec_.transport), prompt, rec);
    }
    rec.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    rec.extracted_answer = extract_answer(rec.raw_response);
    return rec;
  }

 private:
  std::string mock_response(const MockProfile& mock, const MockHint& hint) const {
    if (!hint.true_answer) return "I cannot solve this.";
    bool correct = true;
    switch (mock.kind) {
      case MockProfile::Kind::PerfectSolver:
        break;
      case MockProfile::Kind::FailOnPredicate: {
        auto pred = mock.predicate ? mock.predicate : mock_predicate(mock.predicate_name);
        correct = !pred(hint);
        break;
      }
      case MockProfile::Kind::FixedAccuracy: {
        uint64_t h = mix_seed(mock.seed,
                              hint.problem_id + "#" + std::to_string(hint.variant_index));
        double u = double(h >> 11) * 0x1.0p-53;
        correct = u < mock.accuracy;
        break;
      }
    }
    Decimal shown = correct ? *hint.true_answer
                            : gateway_detail::wrong_answer(*hint.true_answer);
    return "Step by step, the answer is " + shown.to_string() + ".";
  }

  std::string http_ask(const HttpChatTransport& http, const std::string& prompt,
                       QueryRecord& rec) const;

  ModelSpec spec_;
  mutable std::unique_ptr<gateway_detail::Semaphore> semaphore_;
};

inline QueryRecord ask(const ModelSpec& spec, const std::string& prompt,
                       const MockHint& hint = {}) {
  return ModelClient(spec).ask(prompt, hint);
}

}  // namespace mwp

#include "mwp/gateway_http.hpp"
