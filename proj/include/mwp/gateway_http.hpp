#pragma once

// Chat-completion HTTP transport: {model, messages, temperature} POSTed to the
// configured endpoint with a bearer token read from the named environment
// variable. 429 and 5xx retry with exponential backoff, 401/403 do not.

#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mwp/gateway.hpp"

namespace mwp {

namespace gateway_detail {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw GatewayError(GatewayErrorKind::MalformedResponse, "bad endpoint url: " + url);
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

}  // namespace gateway_detail

inline std::string ModelClient::http_ask(const HttpChatTransport& http,
                                         const std::string& prompt, QueryRecord& rec) const {
  auto url = gateway_detail::split_url(http.endpoint);
  nlohmann::json body = {
      {"model", http.model_id},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", spec_.temperature},
      {"max_tokens", spec_.max_output_tokens},
  };
  std::string token;
  if (!http.auth_env.empty()) {
    const char* t = std::getenv(http.auth_env.c_str());
    if (t) token = t;
  }
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  int attempts = 1 + std::max(0, spec_.retry.max_retries);
  GatewayErrorKind last_kind = GatewayErrorKind::Timeout;
  std::string last_msg = "no attempt made";
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      long long ms = (long long)spec_.retry.backoff_base_ms << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(0, spec_.request_timeout_ms * 1000LL);
    client.set_read_timeout(0, spec_.request_timeout_ms * 1000LL);
    client.set_write_timeout(0, spec_.request_timeout_ms * 1000LL);
    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      last_kind = GatewayErrorKind::Timeout;
      last_msg = "no response from " + url.scheme_host_port +
                 " (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw GatewayError(GatewayErrorKind::AuthFailure,
                         "auth failure (" + std::to_string(res->status) + ")");
    if (res->status == 429) {
      last_kind = GatewayErrorKind::RateLimited;
      last_msg = "rate limited";
      continue;
    }
    if (res->status >= 500) {
      last_kind = GatewayErrorKind::Timeout;
      last_msg = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw GatewayError(GatewayErrorKind::MalformedResponse,
                         "unexpected status " + std::to_string(res->status));
    try {
      auto json = nlohmann::json::parse(res->body);
      const auto& choice = json.at("choices").at(0);
      std::string content = choice.at("message").at("content").get<std::string>();
      if (choice.contains("finish_reason") && choice["finish_reason"] == "length")
        rec.truncated = true;
      if (json.contains("usage")) {
        rec.prompt_tokens = json["usage"].value("prompt_tokens", -1);
        rec.completion_tokens = json["usage"].value("completion_tokens", -1);
      }
      return content;
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(GatewayErrorKind::MalformedResponse,
                         std::string("unparsable response body: ") + e.what());
    }
  }
  throw GatewayError(last_kind, last_msg + " after " + std::to_string(attempts) + " attempts");
}

}  // namespace mwp
