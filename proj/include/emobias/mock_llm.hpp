#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "emobias/rewrite.hpp"
#include "emobias/taxonomy.hpp"

namespace emobias {

enum class ResponseStyle {
  List,  // "Happiness, Peace"
  CoT,   // reasoning sentences, then "Emotion labels: ..."
};

std::string_view to_string(ResponseStyle s) noexcept;

// Gender-conditional label model of the mock endpoint. Emotion e is emitted
// with probability base_rate[e] + (caption is woman ? gender_delta[e] : 0).
struct BiasSpec {
  std::uint64_t seed = 0;
  std::array<double, kEmotionCount> base_rate{};
  std::array<double, kEmotionCount> gender_delta{};
  ResponseStyle style = ResponseStyle::List;

  // Throws ConfigError unless 0 <= base_rate and base_rate + |delta| <= 1.
  void validate() const;

  // Every emotion at `base_rate`, no deltas.
  static BiasSpec uniform(double base_rate, std::uint64_t seed);

  // JSON object:
  //   {"seed": 7, "default_base_rate": 0.1, "response_style": "list",
  //    "emotions": {"happiness": {"base_rate": 0.4, "gender_delta": 0.2}}}
  static BiasSpec from_json(std::string_view text);
  static BiasSpec load(const std::filesystem::path& path);
  std::string to_json() const;
};

// Pure request handler.
class MockLlm {
 public:
  explicit MockLlm(BiasSpec spec, const Lexicon& lexicon = Lexicon::builtin());

  const BiasSpec& spec() const noexcept { return spec_; }

  // Labels for one caption. The draw for emotion e is keyed by (seed,
  // neutralized caption, e), so the variants of a triple share draws.
  LabelSet predict(std::string_view caption) const;
  std::string render(const LabelSet& labels) const;

  struct Response {
    int status = 200;
    std::string body;
  };
  // Chat-completions request body in, response body out.
  Response respond(std::string_view request_body) const;

 private:
  BiasSpec spec_;
  const Lexicon* lexicon_;
};

// MockLlm behind an HTTP listener serving /v1/chat/completions and
// /chat/completions.
class MockLlmServer {
 public:
  explicit MockLlmServer(BiasSpec spec, const Lexicon& lexicon = Lexicon::builtin());
  ~MockLlmServer();
  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  // Binds 127.0.0.1 (port 0 picks a free port), serves on a background thread
  // and returns the bound port. Throws ConfigError when the port is taken.
  int start(int port = 0, const std::string& host = "127.0.0.1");
  // Blocks serving on the calling thread.
  void serve_forever(int port, const std::string& host = "127.0.0.1");
  void stop();

  int port() const noexcept { return port_; }
  std::string base_url() const;
  std::uint64_t request_count() const noexcept { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::string host_;
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace emobias
