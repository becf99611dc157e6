#include "emobias/mock_llm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "emobias/error.hpp"
#include "emobias/hashing.hpp"
#include "emobias/prompts.hpp"
#include "httplib.h"
#include "json.hpp"

namespace emobias {
namespace {

using json = nlohmann::ordered_json;

double read_probability(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError("bias spec: " + what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("bias spec: " + what + " is not finite");
  return d;
}

std::string error_body(const std::string& message) {
  json err;
  err["error"] = {{"message", message}, {"type", "invalid_request_error"}};
  return err.dump();
}

}  // namespace

std::string_view to_string(ResponseStyle s) noexcept { return s == ResponseStyle::CoT ? "cot" : "list"; }

void BiasSpec::validate() const {
  for (Emotion e : canonical_labels()) {
    const std::size_t i = index_of(e);
    const double base = base_rate[i];
    const double delta = gender_delta[i];
    if (!(base >= 0.0 && base <= 1.0 && base + delta >= 0.0 && base + delta <= 1.0)) {
      throw ConfigError("bias spec: " + std::string(name(e)) + " needs base_rate and " +
                        "base_rate + gender_delta within [0, 1] (got " + std::to_string(base) + ", " +
                        std::to_string(delta) + ")");
    }
  }
}

BiasSpec BiasSpec::uniform(double base_rate, std::uint64_t seed) {
  BiasSpec s;
  s.seed = seed;
  s.base_rate.fill(base_rate);
  s.validate();
  return s;
}

BiasSpec BiasSpec::from_json(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("bias spec is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ConfigError("bias spec must be a JSON object");

  BiasSpec s;
  for (const auto& [key, value] : obj.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("bias spec: seed must be a non-negative integer");
      s.seed = value.get<std::uint64_t>();
    } else if (key == "default_base_rate") {
      s.base_rate.fill(read_probability(value, key));
    } else if (key == "response_style") {
      const std::string style = value.is_string() ? value.get<std::string>() : "";
      if (style == "list") {
        s.style = ResponseStyle::List;
      } else if (style == "cot") {
        s.style = ResponseStyle::CoT;
      } else {
        throw ConfigError("bias spec: response_style must be \"list\" or \"cot\"");
      }
    } else if (key != "emotions") {
      throw ConfigError("bias spec: unknown key '" + key + "'");
    }
  }
  if (obj.contains("emotions")) {
    const json& emotions = obj["emotions"];
    if (!emotions.is_object()) throw ConfigError("bias spec: emotions must be an object");
    for (const auto& [label, entry] : emotions.items()) {
      auto e = normalize_label(label);
      if (!e) throw ConfigError("bias spec: unknown emotion '" + label + "'");
      if (!entry.is_object()) throw ConfigError("bias spec: entry for '" + label + "' must be an object");
      for (const auto& [field, value] : entry.items()) {
        if (field == "base_rate") {
          s.base_rate[index_of(*e)] = read_probability(value, label + ".base_rate");
        } else if (field == "gender_delta") {
          s.gender_delta[index_of(*e)] = read_probability(value, label + ".gender_delta");
        } else {
          throw ConfigError("bias spec: unknown field '" + field + "' for '" + label + "'");
        }
      }
    }
  }
  s.validate();
  return s;
}

BiasSpec BiasSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open bias spec " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string BiasSpec::to_json() const {
  json obj;
  obj["seed"] = seed;
  obj["response_style"] = std::string(to_string(style));
  json emotions = json::object();
  for (Emotion e : canonical_labels()) {
    emotions[std::string(name(e))] = {{"base_rate", base_rate[index_of(e)]},
                                      {"gender_delta", gender_delta[index_of(e)]}};
  }
  obj["emotions"] = std::move(emotions);
  return obj.dump(2);
}

MockLlm::MockLlm(BiasSpec spec, const Lexicon& lexicon) : spec_(std::move(spec)), lexicon_(&lexicon) {
  spec_.validate();
}

LabelSet MockLlm::predict(std::string_view caption) const {
  const bool woman = detect_gender(caption, *lexicon_) == DetectedGender::Woman;
  const std::uint64_t stream = derive_seed(spec_.seed, neutralize_gender(caption, *lexicon_));
  LabelSet out;
  for (Emotion e : canonical_labels()) {
    const std::size_t i = index_of(e);
    const double u = unit_interval(splitmix64(stream ^ splitmix64(i + 1)));
    const double rate = spec_.base_rate[i] + (woman ? spec_.gender_delta[i] : 0.0);
    if (u < rate) out.insert(e);
  }
  return out;
}

std::string MockLlm::render(const LabelSet& labels) const {
  if (spec_.style == ResponseStyle::List) return labels.to_string();
  std::string out = "Reasoning: The caption describes the person's situation and expression.";
  if (labels.empty()) return out + "\nEmotion labels: none";
  return out + "\nEmotion labels: " + labels.to_string();
}

MockLlm::Response MockLlm::respond(std::string_view request_body) const {
  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::parse_error&) {
    return {400, error_body("request body is not valid JSON")};
  }
  if (!req.is_object()) return {400, error_body("request body must be a JSON object")};
  if (!req.contains("model") || !req["model"].is_string()) {
    return {400, error_body("missing string field 'model'")};
  }
  if (!req.contains("messages") || !req["messages"].is_array() || req["messages"].empty()) {
    return {400, error_body("missing non-empty array 'messages'")};
  }
  const json& last = req["messages"].back();
  if (!last.is_object() || last.value("role", "") != "user" || !last.contains("content") ||
      !last["content"].is_string()) {
    return {400, error_body("last message must be a user message with string content")};
  }
  const auto caption = extract_caption(last["content"].get<std::string>());
  if (!caption) return {400, error_body("prompt has no 'Caption:' slot")};

  const std::string content = render(predict(*caption));
  json resp;
  resp["id"] = "mock-" + sha256_hex(request_body).substr(0, 24);
  resp["object"] = "chat.completion";
  resp["created"] = 0;
  resp["model"] = req["model"];
  resp["choices"] = json::array({json{{"index", 0},
                                      {"message", {{"role", "assistant"}, {"content", content}}},
                                      {"finish_reason", "stop"}}});
  return {200, resp.dump()};
}

struct MockLlmServer::Impl {
  Impl(BiasSpec spec, const Lexicon& lexicon) : model(std::move(spec), lexicon) {}
  MockLlm model;
  httplib::Server server;
};

MockLlmServer::MockLlmServer(BiasSpec spec, const Lexicon& lexicon)
    : impl_(std::make_unique<Impl>(std::move(spec), lexicon)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    const auto r = impl_->model.respond(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto& svr = impl_->server;
  svr.Post("/v1/chat/completions", handler);
  svr.Post("/chat/completions", handler);
  svr.set_keep_alive_max_count(1'000'000);
  svr.set_tcp_nodelay(true);
  // No SO_REUSEPORT: a second server on a taken port must fail to bind.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  svr.new_task_queue = [] { return new httplib::ThreadPool(32); };
}

MockLlmServer::~MockLlmServer() { stop(); }

int MockLlmServer::start(int port, const std::string& host) {
  auto& svr = impl_->server;
  if (port == 0) {
    port_ = svr.bind_to_any_port(host);
  } else {
    port_ = svr.bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw ConfigError("mock server cannot bind " + host + ":" + std::to_string(port));
  host_ = host;
  thread_ = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  return port_;
}

void MockLlmServer::serve_forever(int port, const std::string& host) {
  auto& svr = impl_->server;
  if (!svr.bind_to_port(host, port)) {
    throw ConfigError("mock server cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  host_ = host;
  svr.listen_after_bind();
}

void MockLlmServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockLlmServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_) + "/v1";
}

}  // namespace emobias
