#include "cgec/llm.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <openssl/evp.h>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/log.hpp"
#include "cgec/text.hpp"
#include "cgec/unicode.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cgec {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + url + "' must start with http:// or https://");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  Endpoint endpoint;
  endpoint.origin = url.substr(0, path_start);
  endpoint.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!endpoint.path.empty() && endpoint.path.back() == '/') endpoint.path.pop_back();
  if (!endpoint.path.ends_with("/chat/completions")) endpoint.path += "/chat/completions";
  return endpoint;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::string strip_numbering(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i > 0 && i < line.size()) {
    std::string_view rest = line.substr(i);
    for (std::string_view marker : {".", ")", "、", "．", "）", ":", "："}) {
      if (rest.starts_with(marker)) return std::string(trim(rest.substr(marker.size())));
    }
  }
  return std::string(line);
}

std::string hex(const unsigned char* bytes, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[bytes[i] >> 4]);
    out.push_back(kDigits[bytes[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  return hex(digest, length);
}

std::mutex& key_lock(const std::string& path) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[path];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::optional<GenerationResult> read_cache_entry(const std::filesystem::path& file,
                                                 const std::string& key) {
  std::error_code ec;
  if (!std::filesystem::exists(file, ec)) return std::nullopt;
  try {
    const auto obj = nlohmann::json::parse(read_file(file));
    if (obj.at("key").get<std::string>() != key) return std::nullopt;
    GenerationResult result;
    result.raw_text = obj.at("raw_text").get<std::string>();
    result.parsed_sentences = obj.at("parsed_sentences").get<std::vector<std::string>>();
    result.cache_hit = true;
    return result;
  } catch (const std::exception& e) {
    log::warn("ignoring corrupt cache entry " + file.string() + ": " + e.what());
    return std::nullopt;
  }
}

void write_cache_entry(const std::filesystem::path& file, const std::string& key,
                       const GenerationRequest& request,
                       const GenerationResult& result) {
  nlohmann::ordered_json obj;
  obj["key"] = key;
  obj["model"] = request.model_name;
  obj["prompt"] = request.prompt.rendered;
  obj["temperature"] = request.temperature;
  obj["max_tokens"] = request.max_tokens;
  obj["raw_text"] = result.raw_text;
  obj["parsed_sentences"] = result.parsed_sentences;
  write_file_atomic(file, obj.dump(2) + "\n");
}

}  // namespace

void GenerationRequest::validate() const {
  if (max_tokens < 1) throw ValidationError("max_tokens must be at least 1");
  if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  if (model_name.empty()) throw ValidationError("model name must be non-empty");
}

Credentials Credentials::from_env() {
  const char* value = std::getenv(std::string(kApiKeyEnv).c_str());
  return Credentials{value ? std::string(value) : std::string()};
}

std::vector<std::string> parse_reply(std::string_view reply) {
  std::vector<std::string> sentences;
  std::set<std::string> seen;
  for (const auto& raw : split_lines(reply)) {
    std::string sentence = strip_numbering(trim(raw));
    if (sentence.empty()) continue;
    if (seen.insert(sentence).second) sentences.push_back(std::move(sentence));
  }
  return sentences;
}

GenerationResult complete_chat(const GenerationRequest& request,
                               const std::string& endpoint,
                               const Credentials& credentials,
                               const ClientOptions& options) {
  if (credentials.api_key.empty()) {
    throw ConfigError("missing API credentials; set " + std::string(kApiKeyEnv));
  }
  request.validate();
  const Endpoint target = parse_endpoint(endpoint);

  nlohmann::json body;
  body["model"] = request.model_name;
  nlohmann::json message;
  message["role"] = "user";
  message["content"] = request.prompt.rendered;
  body["messages"] = nlohmann::json::array({message});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  const std::string payload = body.dump();

  httplib::Client client(target.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  const httplib::Headers headers = {
      {"Authorization", "Bearer " + credentials.api_key}};

  GenerationResult result;
  std::string last_failure;
  auto backoff = options.retry.initial_backoff;
  const int max_attempts = std::max(1, options.retry.max_attempts);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    result.attempts = attempt;
    auto response = client.Post(target.path, headers, payload, "application/json");
    if (!response) {
      last_failure = "connection failed: " + httplib::to_string(response.error());
    } else if (response->status == 401 || response->status == 403) {
      throw AuthError("endpoint rejected the credentials (HTTP " +
                      std::to_string(response->status) + ")");
    } else if (retryable_status(response->status)) {
      last_failure = "HTTP " + std::to_string(response->status);
    } else if (response->status != 200) {
      throw TransportError("chat completion failed with HTTP " +
                           std::to_string(response->status) + ": " + response->body);
    } else {
      try {
        const auto reply = nlohmann::json::parse(response->body);
        result.raw_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception&) {
        result.raw_text = response->body;
        result.warnings.push_back("reply is not a chat completion; kept raw body");
        log::warn(result.warnings.back());
        return result;
      }
      result.parsed_sentences = parse_reply(result.raw_text);
      if (result.parsed_sentences.empty()) {
        result.warnings.push_back("reply contains no sentences");
        log::warn(result.warnings.back());
      }
      return result;
    }
    if (attempt < max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(static_cast<long long>(
          std::llround(static_cast<double>(backoff.count()) * options.retry.multiplier)));
    }
  }
  throw TransportError("chat completion failed after " + std::to_string(max_attempts) +
                       " attempts: " + last_failure);
}

std::string cache_key(const GenerationRequest& request) {
  const nlohmann::json material = {request.model_name, request.prompt.rendered,
                                   request.temperature, request.max_tokens};
  return sha256_hex(material.dump());
}

GenerationResult cached_generate(const GenerationRequest& request,
                                 const std::string& endpoint,
                                 const Credentials& credentials,
                                 const std::filesystem::path& cache_dir,
                                 const ClientOptions& options) {
  request.validate();
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) throw IoError("cannot create cache directory " + cache_dir.string());
  const std::string key = cache_key(request);
  const std::filesystem::path file = cache_dir / (key + ".json");

  std::lock_guard lock(key_lock(std::filesystem::absolute(file).string()));
  if (auto hit = read_cache_entry(file, key)) return *hit;
  GenerationResult result = complete_chat(request, endpoint, credentials, options);
  write_cache_entry(file, key, request, result);
  return result;
}

std::vector<GenerationResult> generate_batch(std::span<const GenerationRequest> requests,
                                             const std::string& endpoint,
                                             const Credentials& credentials,
                                             const std::filesystem::path& cache_dir,
                                             std::size_t max_in_flight,
                                             const ClientOptions& options) {
  const std::size_t n = requests.size();
  std::vector<GenerationResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        results[i] = cached_generate(requests[i], endpoint, credentials, cache_dir, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(max_in_flight, 1), n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return results;
}

std::vector<ParallelPair> validate_generated(std::span<const std::string> sentences,
                                             const CluePair& clues,
                                             std::span<const ClueRule> rules) {
  const ClueRule* rule = find_rule_for_clues(rules, clues);
  if (!rule) {
    throw ValidationError("no repair rule matches the clue pair (" + clues.first +
                          ", " + clues.second + ")");
  }
  std::vector<ParallelPair> pairs;
  std::set<std::string> seen;
  for (const auto& raw : sentences) {
    const std::string sentence(trim(raw));
    if (sentence.empty() || !seen.insert(sentence).second) continue;
    if (sentence.find(clues.first) == std::string::npos ||
        sentence.find(clues.second) == std::string::npos) {
      continue;
    }
    try {
      decode_utf8(sentence);
    } catch (const ValidationError&) {
      log::warn("dropping generated sentence with invalid UTF-8");
      continue;
    }
    const auto repaired = rule->repair(sentence);
    if (!repaired || *repaired == sentence) continue;
    const auto corrupted = rule->corrupt(*repaired);
    if (!corrupted || *corrupted != sentence) {
      log::warn("generated sentence fails the round trip of rule '" + rule->id() +
                "': " + sentence);
      continue;
    }
    ParallelPair pair;
    pair.id = "gen-" + ordinal_id(pairs.size() + 1);
    pair.ungrammatical = sentence;
    pair.grammatical = *repaired;
    pair.error_type = rule->error_type();
    pair.source = PairSource::LlmGenerated;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace cgec
