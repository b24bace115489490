#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gatelab/bon.hpp"
#include "gatelab/config.hpp"

namespace gatelab {

class LlmError : public std::runtime_error {
 public:
  enum class Kind { network, malformed, missing_logprobs };
  LlmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct CompletionDraft {
  std::string text;
  std::vector<double> token_logprobs;
};

// exp(mean log-probability), clipped to [0.01, 1]. Throws on an empty list.
double logprob_confidence(std::span<const double> token_logprobs);

nlohmann::json build_chat_request(const EndpointSettings& ep, const std::string& prompt, std::size_t n,
                                  std::uint64_t seed);

// Exactly `expected` drafts or an LlmError.
std::vector<CompletionDraft> parse_chat_response(const nlohmann::json& body, std::size_t expected,
                                                 const std::string& endpoint);

// One line per request attempt and per response, as compact JSON.
using LogSink = std::function<void(const std::string&)>;

class LlmClient {
 public:
  explicit LlmClient(EndpointSettings ep, LogSink log = {});
  ~LlmClient();

  // n completions of one prompt; all or nothing. Thread-safe; at most
  // max_concurrency requests are in flight across threads.
  std::vector<CompletionDraft> generate(const std::string& prompt, std::size_t n, std::uint64_t seed) const;

  const EndpointSettings& settings() const { return ep_; }

 private:
  std::vector<CompletionDraft> request(const std::string& prompt, std::size_t n, std::uint64_t seed) const;

  struct Gate;
  EndpointSettings ep_;
  LogSink log_;
  std::string host_, prefix_;
  std::unique_ptr<Gate> gate_;
};

// Prompt templates keyed by category, read from <dir>/<category>.v1.txt.
std::map<TaskCategory, std::string> load_prompt_templates(const std::filesystem::path& dir);
std::string render_prompt(const std::string& tmpl, const Task& task);

class LlmCompletionSource : public CompletionSource {
 public:
  LlmCompletionSource(EndpointSettings ep, const std::filesystem::path& prompts_dir, LogSink log = {});
  std::vector<Completion> draw(const Task& task, std::uint64_t seed, std::size_t n) const override;

 private:
  LlmClient client_;
  std::map<TaskCategory, std::string> templates_;
};

}  // namespace gatelab
