#include "emobias/mock_llm.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "emobias/error.hpp"
#include "emobias/llm_client.hpp"
#include "emobias/prompts.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"

namespace emobias {
namespace {

using json = nlohmann::json;

std::string request(const std::string& caption, Strategy s = Strategy::ZeroShot) {
  json body;
  body["model"] = "mock";
  body["messages"] = json::array({{{"role", "user"}, {"content", build_prompt(s, caption).text}}});
  return body.dump();
}

TEST(BiasSpec, ParsesJson) {
  const auto spec = BiasSpec::from_json(R"({"seed": 7, "default_base_rate": 0.1, "response_style": "cot",
      "emotions": {"Happiness": {"base_rate": 0.4, "gender_delta": 0.2}, "doubt/confusion": {"base_rate": 0}}})");
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(spec.style, ResponseStyle::CoT);
  EXPECT_DOUBLE_EQ(spec.base_rate[index_of(Emotion::Happiness)], 0.4);
  EXPECT_DOUBLE_EQ(spec.gender_delta[index_of(Emotion::Happiness)], 0.2);
  EXPECT_DOUBLE_EQ(spec.base_rate[index_of(Emotion::DoubtConfusion)], 0.0);
  EXPECT_DOUBLE_EQ(spec.base_rate[index_of(Emotion::Pain)], 0.1);
  EXPECT_EQ(BiasSpec::from_json(spec.to_json()).to_json(), spec.to_json());
}

TEST(BiasSpec, Validates) {
  EXPECT_THROW(BiasSpec::from_json(R"({"emotions": {"happiness": {"base_rate": 0.9, "gender_delta": 0.2}}})"), ConfigError);
  EXPECT_THROW(BiasSpec::from_json(R"({"emotions": {"happiness": {"base_rate": 0.1, "gender_delta": -0.2}}})"), ConfigError);
  EXPECT_THROW(BiasSpec::from_json(R"({"default_base_rate": -0.1})"), ConfigError);
  EXPECT_THROW(BiasSpec::from_json(R"({"emotions": {"joy": {"base_rate": 0.1}}})"), ConfigError);
  EXPECT_THROW(BiasSpec::from_json(R"({"sed": 1})"), ConfigError);
  EXPECT_THROW(BiasSpec::from_json("[1]"), ConfigError);
  EXPECT_THROW(BiasSpec::uniform(1.5, 0), ConfigError);
}

TEST(MockLlm, ZeroDeltaGivesIdenticalVariants) {
  MockLlm mock(BiasSpec::uniform(0.3, 9));
  const auto triples = testing::synthetic_triples(300, 2);
  for (std::size_t i = 0; i < triples.size(); i += 3) {
    const auto man = mock.predict(triples[i].text);
    EXPECT_EQ(mock.predict(triples[i + 1].text), man) << triples[i].text;
    EXPECT_EQ(mock.predict(triples[i + 2].text), man) << triples[i].text;
  }
}

TEST(MockLlm, DeltaOnlyAddsForWomen) {
  BiasSpec spec = BiasSpec::uniform(0.2, 3);
  spec.base_rate[index_of(Emotion::Happiness)] = 0.4;
  spec.gender_delta[index_of(Emotion::Happiness)] = 0.2;
  MockLlm mock(spec);
  const auto triples = testing::synthetic_triples(1000, 4);
  std::size_t man = 0, woman = 0;
  for (std::size_t i = 0; i < triples.size(); i += 3) {
    const auto& m = triples[i].variant == GenderVariant::Man ? triples[i] : triples[i + 1];
    const auto& w = triples[i].variant == GenderVariant::Man ? triples[i + 1] : triples[i];
    const auto lm = mock.predict(m.text), lw = mock.predict(w.text);
    man += lm.contains(Emotion::Happiness);
    woman += lw.contains(Emotion::Happiness);
    // A woman draw is never below the paired man draw.
    EXPECT_TRUE(!lm.contains(Emotion::Happiness) || lw.contains(Emotion::Happiness));
    LabelSet lm_rest = lm, lw_rest = lw;
    lm_rest.erase(Emotion::Happiness);
    lw_rest.erase(Emotion::Happiness);
    EXPECT_EQ(lm_rest, lw_rest);
  }
  EXPECT_GT(woman, man + 100);
}

TEST(MockLlm, MarginalRatesAreCalibrated) {
  BiasSpec spec = BiasSpec::uniform(0.25, 5);
  spec.base_rate[index_of(Emotion::Fear)] = 0.05;
  spec.base_rate[index_of(Emotion::Peace)] = 0.6;
  MockLlm mock(spec);
  const auto captions = testing::synthetic_captions(4000);
  std::array<std::size_t, kEmotionCount> counts{};
  for (const auto& c : captions) {
    for (Emotion e : mock.predict(c.text).to_vector()) ++counts[index_of(e)];
  }
  const double n = static_cast<double>(captions.size());
  for (Emotion e : canonical_labels()) {
    const double p = spec.base_rate[index_of(e)];
    EXPECT_NEAR(counts[index_of(e)] / n, p, 4 * std::sqrt(p * (1 - p) / n)) << name(e);
  }
}

TEST(MockLlm, RespondsDeterministically) {
  MockLlm mock(BiasSpec::uniform(0.3, 1));
  const auto a = mock.respond(request("A man sits on a bench."));
  const auto b = mock.respond(request("A man sits on a bench."));
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(a.body, b.body);
  const auto parsed = parse_completion_body(a.body);
  EXPECT_EQ(parsed.served_model, "mock");
  EXPECT_EQ(parse_labels(parsed.raw_output, ParseMode::List), mock.predict("A man sits on a bench."));
}

TEST(MockLlm, CoTStyleParsesAfterMarker) {
  BiasSpec spec = BiasSpec::uniform(0.3, 1);
  spec.style = ResponseStyle::CoT;
  MockLlm mock(spec);
  const auto r = parse_completion_body(mock.respond(request("A woman sits.", Strategy::CoT)).body);
  EXPECT_EQ(parse_labels(r.raw_output, ParseMode::ScanAfterMarker), mock.predict("A woman sits."));
}

TEST(MockLlm, MalformedRequestsGet400) {
  MockLlm mock(BiasSpec::uniform(0.3, 1));
  EXPECT_EQ(mock.respond("not json").status, 400);
  EXPECT_EQ(mock.respond(R"({"messages":[]})").status, 400);
  EXPECT_EQ(mock.respond(R"({"model":"m","messages":[{"role":"user","content":"hello"}]})").status, 400);
  EXPECT_EQ(mock.respond(R"({"model":"m","messages":[{"role":"user","content":7}]})").status, 400);
  EXPECT_NE(mock.respond("not json").body.find("error"), std::string::npos);
}

TEST(MockLlmServer, ServesOverHttp) {
  MockLlmServer server(BiasSpec::uniform(0.3, 1));
  const int port = server.start();
  EXPECT_GT(port, 0);
  ModelConfig cfg;
  cfg.name = "mock";
  cfg.base_url = server.base_url();
  ChatClient client(cfg);
  const auto r = client.complete(build_prompt(Strategy::ZeroShot, "A man sits."), nullptr);
  EXPECT_EQ(r.served_model, "mock");
  EXPECT_EQ(server.request_count(), 1u);

  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);  // unversioned path
  ChatClient plain(cfg);
  EXPECT_EQ(plain.complete(build_prompt(Strategy::ZeroShot, "A man sits."), nullptr).raw_output, r.raw_output);
  server.stop();
}

TEST(MockLlmServer, PortInUseIsConfigError) {
  MockLlmServer first(BiasSpec::uniform(0.3, 1));
  const int port = first.start();
  MockLlmServer second(BiasSpec::uniform(0.3, 1));
  EXPECT_THROW(second.start(port), ConfigError);
}

}  // namespace
}  // namespace emobias
