// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include "fixtures.hpp"
#include "tpc/http_backend.hpp"

using namespace tpc;
using namespace tpc::agent;

namespace
{

/// Local chat-completion endpoint whose behavior is set per test.
class MockServer
{
  public:
    explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler)
    {
        _server.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            handler(req, res);
        });
        _port = _server.bind_to_any_port("127.0.0.1");
        _thread = std::thread([this] { _server.listen_after_bind(); });
        _server.wait_until_ready();
    }

    ~MockServer()
    {
        _server.stop();
        _thread.join();
    }

    [[nodiscard]] std::string base_url() const { return "http://127.0.0.1:" + std::to_string(_port) + "/v1"; }

    std::atomic<int> hits {0};
    std::string last_body;
    std::string last_auth;

  private:
    httplib::Server _server;
    int _port = 0;
    std::thread _thread;
};

std::string completion(const std::string& content)
{
    return nlohmann::json {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

HttpBackendConfig config_for(const MockServer& server)
{
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "test-model";
    cfg.timeout_seconds = 2.0;
    cfg.retries = 2;
    cfg.backoff_ms = 10;
    cfg.api_key_env = "TPC_TEST_API_KEY";
    return cfg;
}

ErrorKind backend_error(LlmBackend& backend)
{
    try
    {
        backend.complete({{Role::User, "hi"}});
    }
    catch (const BackendError& e)
    {
        return e.kind();
    }
    FAIL("expected BackendError");
    return ErrorKind::Io;
}

} // namespace

TEST_CASE("completion round-trip")
{
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion("Action: Final Answer\nAction Input: lamp"), "application/json");
    });
    ::setenv("TPC_TEST_API_KEY", "secret", 1);
    HttpBackend backend(config_for(server));
    auto reply = backend.complete({{Role::System, "sys"}, {Role::User, "question"}});
    ::unsetenv("TPC_TEST_API_KEY");

    CHECK(reply == "Action: Final Answer\nAction Input: lamp");
    CHECK(server.hits == 1);
    CHECK(server.last_auth == "Bearer secret");
    auto body = nlohmann::json::parse(server.last_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["temperature"] == 0.0);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "question");
}

TEST_CASE("rejected credentials are not retried")
{
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    HttpBackend backend(config_for(server));
    CHECK(backend_error(backend) == ErrorKind::AuthError);
    CHECK(server.hits == 1);
}

TEST_CASE("server errors are retried then reported")
{
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    HttpBackend backend(config_for(server));
    CHECK(backend_error(backend) == ErrorKind::BackendUnavailable);
    CHECK(server.hits == 3);
}

TEST_CASE("transient failure recovers")
{
    std::atomic<int> calls {0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        if (calls++ == 0)
            res.status = 503;
        else
            res.set_content(completion("ok"), "application/json");
    });
    HttpBackend backend(config_for(server));
    CHECK(backend.complete({{Role::User, "hi"}}) == "ok");
    CHECK(server.hits == 2);
}

TEST_CASE("slow endpoint times out")
{
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(600));
        res.set_content(completion("late"), "application/json");
    });
    auto cfg = config_for(server);
    cfg.timeout_seconds = 0.2;
    cfg.retries = 0;
    HttpBackend backend(cfg);
    CHECK(backend_error(backend) == ErrorKind::BackendUnavailable);
}

TEST_CASE("malformed replies and bad endpoints")
{
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    HttpBackend backend(config_for(server));
    CHECK(backend_error(backend) == ErrorKind::BackendUnavailable);

    HttpBackendConfig cfg;
    cfg.base_url = "not a url";
    CHECK_THROWS_AS(HttpBackend(cfg), BackendError);
    cfg.base_url = "ftp://example.com";
    CHECK_THROWS_AS(HttpBackend(cfg), BackendError);

    cfg.base_url = "http://127.0.0.1:1/v1";
    cfg.retries = 0;
    cfg.timeout_seconds = 1.0;
    HttpBackend closed(cfg);
    CHECK(backend_error(closed) == ErrorKind::BackendUnavailable);
}

TEST_CASE("agent session over HTTP")
{
    std::atomic<int> turn {0};
    auto script = load_script_file(testing::fixture_path("golden/script.json"));
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion(script.at(turn++)), "application/json");
    });
    HttpBackend backend(config_for(server));
    auto assets = load_prompt_assets(testing::data_path("prompts"));
    auto ctx = testing::fixture_context("living_room");
    auto r = run_session(assets, ctx, "What is behind me directly?", backend);
    CHECK(r.final_answer == "coffee table");
    CHECK(r.llm_calls == 2);
}
