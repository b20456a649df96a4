// Project headers pull in Eigen, which must be parsed before httplib drags in
// <resolv.h> and its `_res` macro.
#include "arggen/error.hpp"
#include "arggen/rewriter.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace arggen::rewrite {

HttpChatBackend::HttpChatBackend(std::string base_url, std::string model, std::string api_key,
                                 BackendSettings settings)
    : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)), settings_(settings) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::unique_ptr<HttpChatBackend> HttpChatBackend::from_environment(std::string base_url, std::string model,
                                                                   BackendSettings settings) {
  const char* key = std::getenv(kApiKeyVariable);
  if (!key || !*key) {
    throw Error(ErrorCode::ConfigError, std::string(kApiKeyVariable) + " is not set");
  }
  return std::make_unique<HttpChatBackend>(std::move(base_url), std::move(model), key, settings);
}

std::string HttpChatBackend::rewrite(std::string_view text, std::string_view instruction) {
  httplib::Client client(base_url_);
  const auto seconds = static_cast<time_t>(settings_.timeout_seconds);
  const auto micros = static_cast<time_t>((settings_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  nlohmann::json body = {
      {"model", model_},
      {"temperature", 0},
      {"messages",
       {{{"role", "system"}, {"content", std::string(instruction)}}, {{"role", "user"}, {"content", std::string(text)}}}},
  };
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable, "request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::BackendUnavailable, "HTTP " + std::to_string(res->status));
  }
  try {
    auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("malformed response: ") + e.what());
  }
}

}  // namespace arggen::rewrite
