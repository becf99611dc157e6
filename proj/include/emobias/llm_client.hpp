#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "emobias/corpus.hpp"
#include "emobias/prediction_log.hpp"
#include "emobias/prompts.hpp"

namespace emobias {

struct ModelConfig {
  std::string name;
  std::string base_url = "http://127.0.0.1:8080/v1";
  // Environment variable holding the bearer token; empty for endpoints that
  // need no authentication.
  std::string api_key_env;
  // Greedy decoding: temperature 0, one sample. Always on for audit runs.
  bool deterministic = true;
  // Overrides the strategy's budget when set.
  std::optional<int> max_new_tokens;
  double timeout_seconds = 120.0;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{60000};
  // Token-bucket limit per endpoint; 0 disables it.
  double requests_per_minute = 0.0;
};

// Content-addressed store of raw response bodies keyed by request
// fingerprint. Reads may run concurrently; writes are serialized and land
// atomically (write to a temporary, then rename).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& fingerprint) const;
  void put(const std::string& fingerprint, std::string_view body);
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& fingerprint) const;

  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

struct CompletionResult {
  std::string raw_output;
  std::string served_model;
  std::string fingerprint;
  bool cached = false;
};

// Extracts choices[0].message.content (and the echoed model name) from a
// chat-completion response body. Throws ProtocolError on anything else.
CompletionResult parse_completion_body(std::string_view body);

class RateLimiter;

// OpenAI-compatible chat-completions client for one model. Thread-safe:
// every call runs on its own connection unless a Session is used.
class ChatClient {
 public:
  // Throws ConfigError when the URL is unusable or the API key variable is
  // named but unset.
  explicit ChatClient(ModelConfig config);
  ~ChatClient();
  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  const ModelConfig& config() const noexcept { return config_; }

  // Request body with every decoding parameter, serialized with sorted keys.
  std::string request_body(const PromptText& prompt) const;
  // SHA-256 of request_body: (model, full prompt, decoding parameters).
  std::string fingerprint(const PromptText& prompt) const;

  // Persistent connection; one per worker thread.
  class Session {
   public:
    ~Session();
    Session(Session&&) noexcept;
    CompletionResult complete(const PromptText& prompt, ResponseCache* cache);

   private:
    friend class ChatClient;
    struct Impl;
    explicit Session(ChatClient& owner);
    std::unique_ptr<Impl> impl_;
  };

  Session session();

  // Cache hit: no network I/O. Miss: POST with retries, then cache the body.
  CompletionResult complete(const PromptText& prompt, ResponseCache* cache);

  // HTTP attempts made so far, including retries.
  std::uint64_t network_requests() const noexcept { return network_requests_.load(); }
  // True once the endpoint rejected temperature=0 and the client fell back to
  // omitting it.
  bool temperature_dropped() const noexcept { return temperature_dropped_.load(); }
  // The decoding parameters as last sent (for the run manifest).
  std::string decoding_summary() const;

 private:
  ModelConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::unique_ptr<RateLimiter> limiter_;
  std::atomic<std::uint64_t> network_requests_{0};
  std::atomic<bool> temperature_dropped_{false};
};

PredictionRecord query(ChatClient& client, const CaptionRecord& record, Strategy strategy,
                       ResponseCache& cache, const PromptOptions& prompt_options = {},
                       std::optional<ParseMode> parse_mode = std::nullopt);

struct BatchOptions {
  std::size_t parallelism = 1;
  std::optional<ParseMode> parse_mode;  // strategy default when unset
  PromptOptions prompt_options;
};

struct BatchFailure {
  std::size_t index = 0;
  std::string caption_record_id;
  std::string fingerprint;
  std::string message;
};

struct BatchResult {
  std::vector<PredictionRecord> predictions;  // successes, in input order
  std::vector<BatchFailure> failures;         // sorted by index
  std::set<std::string> served_models;

  bool complete() const noexcept { return failures.empty(); }
};

// Up to `parallelism` requests in flight. Output order follows input order
// regardless of completion order; failures do not stop the batch.
BatchResult run_batch(std::span<const CaptionRecord> records, Strategy strategy,
                      ChatClient& client, ResponseCache& cache, const BatchOptions& options);

}  // namespace emobias
