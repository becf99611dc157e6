#include "emobias/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "emobias/error.hpp"
#include "emobias/hashing.hpp"
#include "httplib.h"
#include "json.hpp"

namespace emobias {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string excerpt(std::string_view body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return std::string(body);
  return std::string(body.substr(0, kMax)) + "...";
}

bool mentions_temperature(std::string_view body) {
  std::string lowered(body);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lowered.find("temperature") != std::string::npos;
}

std::optional<std::chrono::milliseconds> retry_after(const httplib::Result& res) {
  if (!res || !res->has_header("Retry-After")) return std::nullopt;
  const std::string v = res->get_header_value("Retry-After");
  char* end = nullptr;
  const double seconds = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || seconds < 0) return std::nullopt;
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

}  // namespace

// Spaces requests evenly: at most one every 60/rpm seconds.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute)
      : interval_(requests_per_minute > 0
                      ? std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(60.0 / requests_per_minute))
                      : Clock::duration::zero()) {}

  void acquire() {
    if (interval_ == Clock::duration::zero()) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      slot = std::max(Clock::now(), next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  Clock::duration interval_;
  std::mutex mutex_;
  Clock::time_point next_{};
};

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::path_for(const std::string& fingerprint) const {
  return dir_ / fingerprint.substr(0, 2) / (fingerprint + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& fingerprint) const {
  std::ifstream in(path_for(fingerprint), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ResponseCache::put(const std::string& fingerprint, std::string_view body) {
  std::lock_guard lock(write_mutex_);
  const auto target = path_for(fingerprint);
  std::filesystem::create_directories(target.parent_path());
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

CompletionResult parse_completion_body(std::string_view body) {
  json obj;
  try {
    obj = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProtocolError("response is not JSON: " + excerpt(body));
  }
  if (!obj.is_object() || !obj.contains("choices") || !obj["choices"].is_array() ||
      obj["choices"].empty()) {
    throw ProtocolError("response has no choices: " + excerpt(body));
  }
  const json& choice = obj["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw ProtocolError("response choice has no message: " + excerpt(body));
  }
  const json& content = choice["message"].value("content", json());
  CompletionResult r;
  if (content.is_string()) {
    r.raw_output = content.get<std::string>();
  } else if (!content.is_null()) {
    throw ProtocolError("message content is not a string: " + excerpt(body));
  }
  if (obj.contains("model") && obj["model"].is_string()) r.served_model = obj["model"].get<std::string>();
  return r;
}

ChatClient::ChatClient(ModelConfig config) : config_(std::move(config)) {
  if (config_.name.empty()) throw ConfigError("model name is empty");
  if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, kUrl)) {
    throw ConfigError("invalid base URL '" + config_.base_url + "'");
  }
  scheme_host_port_ = m[1].str();
  std::string prefix = m[2].str();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + config_.api_key_env + " (API key for model " +
                        config_.name + ") is not set");
    }
    api_key_ = key;
  }
  limiter_ = std::make_unique<RateLimiter>(config_.requests_per_minute);
}

ChatClient::~ChatClient() = default;

std::string ChatClient::request_body(const PromptText& prompt) const {
  json body;
  body["model"] = config_.name;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt.text}}});
  body["max_tokens"] = config_.max_new_tokens.value_or(max_new_tokens(prompt.strategy));
  body["n"] = 1;
  if (config_.deterministic) body["temperature"] = 0;
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string ChatClient::fingerprint(const PromptText& prompt) const {
  return sha256_hex(request_body(prompt));
}

std::string ChatClient::decoding_summary() const {
  std::string s = "n=1";
  if (config_.deterministic) s += temperature_dropped() ? ", temperature omitted (rejected by endpoint)" : ", temperature=0";
  s += ", max_tokens=";
  s += config_.max_new_tokens ? std::to_string(*config_.max_new_tokens) : "per-strategy (64, cot 256)";
  return s;
}

struct ChatClient::Session::Impl {
  explicit Impl(ChatClient& o) : owner(o), http(o.scheme_host_port_) {
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(o.config_.timeout_seconds));
    http.set_connection_timeout(timeout);
    http.set_read_timeout(timeout);
    http.set_write_timeout(timeout);
    http.set_keep_alive(true);
    http.set_tcp_nodelay(true);
    if (!o.api_key_.empty()) http.set_bearer_token_auth(o.api_key_);
  }

  CompletionResult complete(const PromptText& prompt, ResponseCache* cache);

  ChatClient& owner;
  httplib::Client http;
};

CompletionResult ChatClient::Session::Impl::complete(const PromptText& prompt, ResponseCache* cache) {
  const ModelConfig& cfg = owner.config_;
  const std::string intended = owner.request_body(prompt);
  const std::string fp = sha256_hex(intended);

  if (cache) {
    if (auto body = cache->get(fp)) {
      try {
        CompletionResult r = parse_completion_body(*body);
        r.fingerprint = fp;
        r.cached = true;
        return r;
      } catch (const ProtocolError&) {
        // Unreadable entry: fall through and refetch.
      }
    }
  }

  auto body_to_send = [&] {
    if (!owner.temperature_dropped_) return intended;
    json b = json::parse(intended);
    b.erase("temperature");
    return b.dump();
  };

  std::string last_error = "no attempt made";
  auto backoff = cfg.initial_backoff;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    owner.limiter_->acquire();
    ++owner.network_requests_;
    const std::string payload = body_to_send();
    httplib::Result res = http.Post(owner.path_, payload, "application/json");

    std::optional<std::chrono::milliseconds> hint;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      CompletionResult r = parse_completion_body(res->body);
      r.fingerprint = fp;
      r.cached = false;
      if (cache) cache->put(fp, res->body);
      return r;
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
      hint = retry_after(res);
    } else if (res->status == 400 && cfg.deterministic && !owner.temperature_dropped_ &&
               mentions_temperature(res->body)) {
      // Endpoint refuses temperature=0; resend without it and record that.
      owner.temperature_dropped_ = true;
      last_error = "HTTP 400 (temperature rejected): " + excerpt(res->body);
      continue;
    } else {
      throw ProtocolError("HTTP " + std::to_string(res->status) + " from " +
                          owner.scheme_host_port_ + owner.path_ + ": " + excerpt(res->body));
    }

    if (attempt == cfg.max_attempts) break;
    std::this_thread::sleep_for(hint.value_or(backoff));
    backoff = std::min(backoff * 2, cfg.max_backoff);
  }
  throw QueryError(fp, "request " + fp.substr(0, 12) + " failed after " +
                           std::to_string(cfg.max_attempts) + " attempts: " + last_error);
}

ChatClient::Session::Session(ChatClient& owner) : impl_(std::make_unique<Impl>(owner)) {}
ChatClient::Session::~Session() = default;
ChatClient::Session::Session(Session&&) noexcept = default;

CompletionResult ChatClient::Session::complete(const PromptText& prompt, ResponseCache* cache) {
  return impl_->complete(prompt, cache);
}

ChatClient::Session ChatClient::session() { return Session(*this); }

CompletionResult ChatClient::complete(const PromptText& prompt, ResponseCache* cache) {
  return session().complete(prompt, cache);
}

namespace {

PredictionRecord make_record(const CaptionRecord& record, const ChatClient& client,
                             Strategy strategy, CompletionResult&& result, ParseMode mode) {
  PredictionRecord p;
  p.caption_record_id = record.record_id;
  p.triple_id = record.triple_id;
  p.variant = *record.variant;
  p.involution_ok = record.involution_ok;
  p.model_name = client.config().name;
  p.strategy = strategy;
  p.parsed = parse_labels(result.raw_output, mode);
  p.raw_output = std::move(result.raw_output);
  p.cached = result.cached;
  p.request_fingerprint = std::move(result.fingerprint);
  p.served_model = std::move(result.served_model);
  return p;
}

void require_variant(const CaptionRecord& record) {
  if (!record.variant) {
    throw DataError("record '" + record.record_id + "' has no gender variant; augment the corpus first");
  }
}

}  // namespace

PredictionRecord query(ChatClient& client, const CaptionRecord& record, Strategy strategy,
                       ResponseCache& cache, const PromptOptions& prompt_options,
                       std::optional<ParseMode> parse_mode) {
  require_variant(record);
  const PromptText prompt = build_prompt(strategy, record.text, record.record_id, prompt_options);
  return make_record(record, client, strategy, client.complete(prompt, &cache),
                     parse_mode.value_or(default_parse_mode(strategy)));
}

BatchResult run_batch(std::span<const CaptionRecord> records, Strategy strategy,
                      ChatClient& client, ResponseCache& cache, const BatchOptions& options) {
  if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  for (const auto& r : records) require_variant(r);
  const ParseMode mode = options.parse_mode.value_or(default_parse_mode(strategy));

  std::vector<std::optional<PredictionRecord>> slots(records.size());
  std::vector<BatchFailure> failures;
  std::mutex failures_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    ChatClient::Session session = client.session();
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const CaptionRecord& record = records[i];
      const PromptText prompt =
          build_prompt(strategy, record.text, record.record_id, options.prompt_options);
      try {
        slots[i] = make_record(record, client, strategy, session.complete(prompt, &cache), mode);
      } catch (const std::exception& e) {
        std::lock_guard lock(failures_mutex);
        failures.push_back({i, record.record_id, client.fingerprint(prompt), e.what()});
      }
    }
  };

  const std::size_t n_workers = std::min(options.parallelism, std::max<std::size_t>(records.size(), 1));
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  BatchResult result;
  result.predictions.reserve(records.size());
  for (auto& s : slots) {
    if (!s) continue;
    if (!s->served_model.empty()) result.served_models.insert(s->served_model);
    result.predictions.push_back(std::move(*s));
  }
  std::sort(failures.begin(), failures.end(),
            [](const BatchFailure& a, const BatchFailure& b) { return a.index < b.index; });
  result.failures = std::move(failures);
  return result;
}

}  // namespace emobias
