#ifndef CGEC_LLM_HPP_
#define CGEC_LLM_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/clue.hpp"
#include "cgec/corpus.hpp"

namespace cgec {

inline constexpr std::string_view kApiKeyEnv = "CGEC_API_KEY";
inline constexpr std::string_view kDefaultModel = "gpt-3.5-turbo";

struct GenerationRequest {
  CluePrompt prompt;
  std::string model_name = std::string(kDefaultModel);
  double temperature = 1.0;
  int max_tokens = 1024;

  // Throws ValidationError for max_tokens < 1 or a negative temperature.
  void validate() const;
};

struct GenerationResult {
  std::string raw_text;
  std::vector<std::string> parsed_sentences;
  bool cache_hit = false;
  // HTTP attempts made for this result; 0 on a cache hit.
  int attempts = 0;
  std::vector<std::string> warnings;
};

struct Credentials {
  std::string api_key;

  // Reads CGEC_API_KEY; empty when unset.
  static Credentials from_env();
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

struct ClientOptions {
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

// Splits a reply into sentences. Accepts "N. text", "N、text", "N) text" and
// bare lines; drops blanks and duplicates, keeping first occurrences.
std::vector<std::string> parse_reply(std::string_view reply);

// POSTs an OpenAI-compatible chat completion with a single user turn to
// `endpoint` ("http(s)://host[:port][/base]"; "/chat/completions" is
// appended unless already present). Retries connection failures, 429 and
// 5xx with exponential backoff. Throws ConfigError for missing credentials
// (before any network use), AuthError on 401/403 and TransportError once
// retries are exhausted or on other HTTP errors.
GenerationResult complete_chat(const GenerationRequest& request,
                               const std::string& endpoint,
                               const Credentials& credentials,
                               const ClientOptions& options = {});

// Hex SHA-256 of (model, rendered prompt, temperature, max_tokens).
std::string cache_key(const GenerationRequest& request);

// Serves from `<cache_dir>/<key>.json` when present and well formed,
// otherwise calls complete_chat and stores the result. Concurrent callers
// with the same key make a single upstream call.
GenerationResult cached_generate(const GenerationRequest& request,
                                 const std::string& endpoint,
                                 const Credentials& credentials,
                                 const std::filesystem::path& cache_dir,
                                 const ClientOptions& options = {});

// cached_generate over many requests with at most `max_in_flight`
// concurrent calls. Results keep the request order.
std::vector<GenerationResult> generate_batch(std::span<const GenerationRequest> requests,
                                             const std::string& endpoint,
                                             const Credentials& credentials,
                                             const std::filesystem::path& cache_dir,
                                             std::size_t max_in_flight,
                                             const ClientOptions& options = {});

// Keeps sentences containing both clues whose repair (by the rule matching
// the clue pair) changes them and round-trips back. Pairs are labelled
// LlmGenerated with ids "gen-000001", ... Throws ValidationError when no
// rule matches the clue pair.
std::vector<ParallelPair> validate_generated(std::span<const std::string> sentences,
                                             const CluePair& clues,
                                             std::span<const ClueRule> rules);

}  // namespace cgec

#endif  // CGEC_LLM_HPP_
