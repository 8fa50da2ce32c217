#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "evostmt/backends.hpp"
#include "evostmt/errors.hpp"

using namespace evostmt;
using nlohmann::json;

namespace {

// Local loopback server; each test drives its own handler.
struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

json chat_reply(const std::string& content) {
  return json{{"choices", json::array({json{{"message", json{{"role", "assistant"},
                                                             {"content", content}}}}})}};
}

}  // namespace

TEST_CASE("http_backend_call: echo server round trip") {
  TestServer ts;
  ts.server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body);
    std::string prompt = body["messages"][0]["content"];
    res.set_content(chat_reply("```lean\ntheorem t : True := by sorry\n```\nprompt bytes: " +
                               std::to_string(prompt.size()))
                        .dump(),
                    "application/json");
  });
  ts.start();
  HttpEndpoint ep;
  ep.base_url = ts.base_url();
  ep.model = "m";
  std::string out = http_backend_call(ep, "hello", 0.7, 2);
  CHECK(out.find("theorem t : True := by sorry") != std::string::npos);
}

TEST_CASE("http_backend_call: two 500s then success with max_retries=2") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    int n = ++hits;
    if (n <= 2) {
      res.status = 500;
      res.set_content("overloaded", "text/plain");
      return;
    }
    res.set_content(chat_reply("ok").dump(), "application/json");
  });
  ts.start();
  HttpEndpoint ep;
  ep.base_url = ts.base_url();
  CHECK(http_backend_call(ep, "x", 0.0, 2) == "ok");
  CHECK(hits == 3);
}

TEST_CASE("http_backend_call: persistent 500 surfaces BackendFailure") {
  TestServer ts;
  ts.server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("down", "text/plain");
  });
  ts.start();
  HttpEndpoint ep;
  ep.base_url = ts.base_url();
  ep.max_retries = 1;
  CHECK_THROWS_AS(http_backend_call(ep, "x", 0.0, 1), BackendFailure);
}

TEST_CASE("http_backend_call: api key forwarded as bearer header") {
  TestServer ts;
  std::string seen_auth;
  ts.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(chat_reply("ok").dump(), "application/json");
  });
  ts.start();
  HttpEndpoint ep;
  ep.base_url = ts.base_url();
  ep.api_key = "sk-test";
  http_backend_call(ep, "x", 0.0, 0);
  CHECK(seen_auth == "Bearer sk-test");
}

TEST_CASE("HttpCompiler: adapter protocol") {
  TestServer ts;
  ts.server.Post("/compile", [](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body);
    std::string text = body["file_text"];
    bool ok = text.find("sorry") != std::string::npos;
    json reply = {{"ok", ok},
                  {"error_type", ok ? "" : "protocol"},
                  {"error_msg", ok ? "" : "missing placeholder"}};
    res.set_content(reply.dump(), "application/json");
  });
  ts.start();
  HttpCompiler compiler(ts.base_url());
  CHECK(compiler.compile("theorem t : True := by sorry").ok);
  auto bad = compiler.compile("theorem t : True := by trivial");
  CHECK_FALSE(bad.ok);
  CHECK(bad.error_type == "protocol");
}

TEST_CASE("HttpJudge: parses the verdict JSON out of the response") {
  TestServer ts;
  ts.server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body);
    std::string prompt = body["messages"][0]["content"];
    bool correct = prompt.find("MATCHES") != std::string::npos;
    json verdict = {{"reasons", "checked the binder structure"},
                    {"is_assistant_correct", correct ? "Correct" : "Incorrect"}};
    res.set_content(chat_reply("Analysis follows.\n" + verdict.dump()).dump(),
                    "application/json");
  });
  ts.start();
  HttpEndpoint ep;
  ep.base_url = ts.base_url();
  HttpJudge judge(ep);
  auto yes = judge.judge("p", "claim MATCHES", "theorem t : True := by sorry");
  CHECK(yes.ok);
  CHECK(yes.rationale == "checked the binder structure");
  auto no = judge.judge("p", "claim", "theorem t : True := by sorry");
  CHECK_FALSE(no.ok);
}
