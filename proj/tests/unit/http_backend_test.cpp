// Project headers first: httplib's <resolv.h> defines a `_res` macro that
// breaks Eigen if it is seen earlier.
#include "arggen/rewriter.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace {

using namespace arggen;
using namespace arggen::rewrite;

class FakeChatServer {
 public:
  FakeChatServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (failures > 0) {
        --failures;
        res.status = 503;
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      last_model = body.at("model").get<std::string>();
      last_system = body.at("messages").at(0).at("content").get<std::string>();
      auto user = body.at("messages").at(1).at("content").get<std::string>();
      nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "fixed: " + user}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests{0};
  std::atomic<int> failures{0};
  std::string last_auth, last_model, last_system;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendSettings quick() {
  BackendSettings s;
  s.timeout_seconds = 5;
  s.max_retries = 3;
  s.initial_backoff = std::chrono::milliseconds(1);
  return s;
}

TEST(HttpBackend, SendsChatRequest) {
  FakeChatServer server;
  HttpChatBackend backend(server.url() + "/", "gpt-test", "secret", quick());
  EXPECT_EQ(backend.id(), "http:gpt-test");
  EXPECT_EQ(backend.rewrite("the apeal fails", kInstruction), "fixed: the apeal fails");
  EXPECT_EQ(server.last_auth, "Bearer secret");
  EXPECT_EQ(server.last_model, "gpt-test");
  EXPECT_EQ(server.last_system, kInstruction);
}

TEST(HttpBackend, ServerErrorsAreRetried) {
  FakeChatServer server;
  server.failures = 2;
  HttpChatBackend backend(server.url(), "m", "k", quick());
  pairs::FactArgumentPair p{"d", "facts.", "argument.", 3, pairs::Source::Original,
                            pairs::RewriteStatus::NotApplicable};
  auto r = rewrite_pair(p, backend);
  EXPECT_EQ(r.facts.attempts, 3u);
  EXPECT_EQ(r.facts.rewritten_text, "fixed: facts.");
  EXPECT_EQ(server.requests.load(), 4);
}

TEST(HttpBackend, PersistentFailureIsBackendUnavailable) {
  FakeChatServer server;
  server.failures = 100;
  auto settings = quick();
  settings.max_retries = 1;
  HttpChatBackend backend(server.url(), "m", "k", settings);
  pairs::FactArgumentPair p{"d", "facts.", "argument.", 3, pairs::Source::Original,
                            pairs::RewriteStatus::NotApplicable};
  EXPECT_ARGGEN_ERROR(rewrite_pair(p, backend), BackendUnavailable);
  EXPECT_EQ(server.requests.load(), 2);
}

TEST(HttpBackend, UnreachableHost) {
  auto settings = quick();
  settings.timeout_seconds = 0.5;
  HttpChatBackend backend("http://127.0.0.1:9", "m", "k", settings);
  EXPECT_ARGGEN_ERROR(backend.rewrite("x", kInstruction), BackendUnavailable);
}

TEST(HttpBackend, KeyFromEnvironment) {
  FakeChatServer server;
  ::setenv(kApiKeyVariable, "env-key", 1);
  auto backend = HttpChatBackend::from_environment(server.url(), "m", quick());
  backend->rewrite("x", kInstruction);
  EXPECT_EQ(server.last_auth, "Bearer env-key");
  ::unsetenv(kApiKeyVariable);
}

}  // namespace
