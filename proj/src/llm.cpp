#include "gatelab/llm.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <semaphore>
#include <sstream>
#include <thread>

#include "gatelab/answers.hpp"
#include "gatelab/rng.hpp"

namespace gatelab {

using nlohmann::json;

double logprob_confidence(std::span<const double> lp) {
  if (lp.empty()) throw std::invalid_argument("confidence needs at least one token log-probability");
  double sum = 0.0;
  for (double v : lp) sum += v;
  return std::clamp(std::exp(sum / static_cast<double>(lp.size())), 0.01, 1.0);
}

json build_chat_request(const EndpointSettings& ep, const std::string& prompt, std::size_t n, std::uint64_t seed) {
  return json{{"model", ep.model},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
              {"temperature", ep.temperature},
              {"n", n},
              {"logprobs", true},
              {"seed", seed}};
}

std::vector<CompletionDraft> parse_chat_response(const json& body, std::size_t expected, const std::string& endpoint) {
  using K = LlmError::Kind;
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array())
    throw LlmError(K::malformed, endpoint + ": response has no choices array");
  const auto& choices = body["choices"];
  if (choices.size() != expected)
    throw LlmError(K::malformed, endpoint + ": expected " + std::to_string(expected) + " choices, got " +
                                     std::to_string(choices.size()));
  std::vector<CompletionDraft> out;
  for (const auto& c : choices) {
    CompletionDraft d;
    if (!c.contains("message") || !c["message"].contains("content") || !c["message"]["content"].is_string())
      throw LlmError(K::malformed, endpoint + ": choice without message content");
    d.text = c["message"]["content"].get<std::string>();
    if (!c.contains("logprobs") || !c["logprobs"].is_object() || !c["logprobs"].contains("content") ||
        !c["logprobs"]["content"].is_array())
      throw LlmError(K::missing_logprobs,
                     endpoint + ": no token log-probabilities returned; the endpoint must support \"logprobs\": true");
    for (const auto& tok : c["logprobs"]["content"]) {
      if (!tok.contains("logprob") || !tok["logprob"].is_number())
        throw LlmError(K::malformed, endpoint + ": token entry without numeric logprob");
      d.token_logprobs.push_back(tok["logprob"].get<double>());
    }
    if (d.token_logprobs.empty())
      throw LlmError(K::missing_logprobs, endpoint + ": empty token log-probability list");
    out.push_back(std::move(d));
  }
  return out;
}

struct LlmClient::Gate {
  explicit Gate(int n) : slots(n) {}
  std::counting_semaphore<1024> slots;
};

LlmClient::LlmClient(EndpointSettings ep, LogSink log) : ep_(std::move(ep)), log_(std::move(log)) {
  static const std::regex url(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(ep_.base_url, m, url))
    throw std::invalid_argument("endpoint base_url must look like http://host[:port][/path]: " + ep_.base_url);
  host_ = m[1];
  prefix_ = m[2];
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (ep_.max_concurrency < 1 || ep_.max_concurrency > 1024)
    throw std::invalid_argument("max_concurrency must lie in [1, 1024]");
  if (ep_.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  gate_ = std::make_unique<Gate>(ep_.max_concurrency);
}

LlmClient::~LlmClient() = default;

std::vector<CompletionDraft> LlmClient::request(const std::string& prompt, std::size_t n, std::uint64_t seed) const {
  const std::string path = prefix_ + "/chat/completions";
  const std::string where = host_ + path;
  const std::string body = build_chat_request(ep_, prompt, n, seed).dump();

  httplib::Client cli(host_);
  const auto timeout = std::chrono::duration<double>(ep_.timeout_s);
  cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!ep_.api_key_env.empty())
    if (const char* key = std::getenv(ep_.api_key_env.c_str())) headers.emplace("Authorization", std::string("Bearer ") + key);

  std::string last_error;
  double backoff = ep_.initial_backoff_s;
  for (int attempt = 1; attempt <= ep_.max_attempts; ++attempt) {
    if (log_) log_(json{{"event", "request"}, {"url", where}, {"attempt", attempt}, {"body", json::parse(body)}}.dump());
    httplib::Result res = [&] {
      gate_->slots.acquire();
      auto r = cli.Post(path, headers, body, "application/json");
      gate_->slots.release();
      return r;
    }();
    bool transient = true;
    if (!res) {
      last_error = "transport failure (" + httplib::to_string(res.error()) + ")";
    } else {
      if (log_) log_(json{{"event", "response"}, {"url", where}, {"status", res->status}, {"body", res->body}}.dump());
      if (res->status == 200) {
        json parsed;
        try {
          parsed = json::parse(res->body);
        } catch (const json::exception&) {
          throw LlmError(LlmError::Kind::malformed, where + ": response body is not JSON");
        }
        return parse_chat_response(parsed, n, where);
      }
      last_error = "HTTP " + std::to_string(res->status);
      transient = res->status == 429 || res->status >= 500;
    }
    if (!transient || attempt == ep_.max_attempts) break;
    std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
    backoff *= 2.0;
  }
  throw LlmError(LlmError::Kind::network, where + ": " + last_error + " after retries");
}

std::vector<CompletionDraft> LlmClient::generate(const std::string& prompt, std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("need at least one completion");
  if (!ep_.split_requests) return request(prompt, n, seed);
  std::vector<CompletionDraft> out;
  for (std::size_t i = 0; i < n; ++i) {
    // Per-draw seeds so a server that honours "seed" does not repeat itself.
    auto one = request(prompt, 1, stream_key({seed, i}) >> 33);
    out.push_back(std::move(one.front()));
  }
  return out;
}

std::map<TaskCategory, std::string> load_prompt_templates(const std::filesystem::path& dir) {
  std::map<TaskCategory, std::string> out;
  for (auto c : {TaskCategory::arithmetic, TaskCategory::factual}) {
    const auto path = dir / (to_string(c) + ".v1.txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (ss.str().find("{question}") == std::string::npos)
      throw std::invalid_argument("prompt template lacks a {question} placeholder: " + path.string());
    out[c] = ss.str();
  }
  return out;
}

std::string render_prompt(const std::string& tmpl, const Task& task) {
  std::string out = tmpl;
  const std::string key = "{question}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + task.question.size()))
    out.replace(pos, key.size(), task.question);
  return out;
}

LlmCompletionSource::LlmCompletionSource(EndpointSettings ep, const std::filesystem::path& prompts_dir, LogSink log)
    : client_(std::move(ep), std::move(log)), templates_(load_prompt_templates(prompts_dir)) {}

std::vector<Completion> LlmCompletionSource::draw(const Task& task, std::uint64_t seed, std::size_t n) const {
  auto it = templates_.find(task.category);
  if (it == templates_.end()) throw UnsupportedCategory("no prompt template for " + to_string(task.category) + " tasks");
  std::vector<Completion> out;
  for (auto& d : client_.generate(render_prompt(it->second, task), n, seed)) {
    Completion c;
    c.report = logprob_confidence(d.token_logprobs);
    c.outcome = verify_answer(task, d.text);
    c.text = std::move(d.text);
    c.token_logprobs = std::move(d.token_logprobs);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace gatelab
