#include <string>

#include "evostmt/backends.hpp"
#include "evostmt/errors.hpp"

#include <httplib.h>
#include <json.hpp>

namespace evostmt {

namespace {

using nlohmann::json;

// Splits "http://host:port/extra" into client base and path prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  std::size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  return {url.substr(0, slash), url.substr(slash)};
}

json find_json_object(const std::string& text) {
  std::size_t start = text.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      if (c == '{') ++depth;
      if (c == '}') {
        --depth;
        if (depth == 0) {
          auto parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded()) return parsed;
          break;
        }
      }
    }
    start = text.find('{', start + 1);
  }
  return json();
}

}  // namespace

std::string http_backend_call(const HttpEndpoint& endpoint, const std::string& prompt,
                              double temperature, int max_retries) {
  auto [base, prefix] = split_url(endpoint.base_url);
  std::string path = prefix + endpoint.path;
  json body = {
      {"model", endpoint.model},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", temperature},
      {"max_tokens", endpoint.max_tokens},
  };
  std::string payload = body.dump();

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    httplib::Client client(base);
    client.set_connection_timeout(endpoint.timeout_seconds, 0);
    client.set_read_timeout(endpoint.timeout_seconds, 0);
    httplib::Headers headers;
    if (!endpoint.api_key.empty())
      headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server returned status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw BackendFailure("status " + std::to_string(res->status) + ": " + res->body);
    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw BackendFailure("response is not JSON");
    try {
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendFailure(std::string("unexpected response shape: ") + e.what());
    }
  }
  throw BackendFailure(last_error);
}

CompileResult HttpCompiler::compile(const std::string& file_text) {
  auto [base, prefix] = split_url(base_url_);
  json body = {{"file_text", file_text}};
  std::string payload = body.dump();
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    httplib::Client client(base);
    auto res = client.Post(prefix + path_, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server returned status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw BackendFailure("status " + std::to_string(res->status) + ": " + res->body);
    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw BackendFailure("compiler response is not JSON");
    CompileResult out;
    out.ok = parsed.value("ok", false);
    out.error_type = parsed.value("error_type", "");
    out.error_msg = parsed.value("error_msg", "");
    return out;
  }
  throw BackendFailure(last_error);
}

JudgeResult HttpJudge::judge(const std::string& problem_id, const std::string& informal,
                             const std::string& file_text) {
  (void)problem_id;
  std::string prompt = render_judge_prompt(informal, file_text);
  std::string response = http_backend_call(endpoint_, prompt, 0.0, endpoint_.max_retries);
  json verdict = find_json_object(response);
  if (verdict.is_null() || !verdict.contains("is_assistant_correct"))
    return {false, "judge response carried no verdict"};
  JudgeResult out;
  out.ok = verdict.value("is_assistant_correct", "") == "Correct";
  out.rationale = verdict.value("reasons", "");
  return out;
}

}  // namespace evostmt
