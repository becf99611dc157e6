#include "support/synthetic.hpp"

#include <array>
#include <sstream>

#include "emobias/hashing.hpp"

namespace emobias::testing {
namespace {

struct Person {
  std::string_view noun, subject, object, determiner, reflexive;
};

constexpr std::array<std::pair<std::string_view, std::string_view>, 12> kNouns = {{
    {"man", "woman"}, {"boy", "girl"}, {"father", "mother"}, {"gentleman", "lady"},
    {"grandfather", "grandmother"}, {"brother", "sister"}, {"husband", "wife"},
    {"king", "queen"}, {"waiter", "waitress"}, {"businessman", "businesswoman"},
    {"son", "daughter"}, {"uncle", "aunt"},
}};

// {N} noun, {S} subject pronoun, {O} object pronoun, {D} possessive
// determiner, {R} reflexive, {I} unique index.
constexpr std::array<std::string_view, 8> kTemplates = {
    "The {N} wiped {D} eyes and smiled softly as {S} looked at photo number {I}.",
    "A {N} is standing in a kitchen, and {S} is cooking dinner for {D} family on day {I}.",
    "A {N} holds {D} phone while {S} waits at platform {I}.",
    "A friend hands {O} a cup of coffee at table {I}, and the {N} thanks {O}.",
    "The {N} looks at {R} in mirror {I} before {S} leaves.",
    "A {N} runs along the beach with {D} dog on morning {I}.",
    "The {N} is tired after shift {I} and rests on {D} couch.",
    "{S} is a {N} who waves to {D} neighbours from window {I}.",
};

constexpr std::string_view kNonInvolutive = "A coach lets {O} borrow a racket at court {I}, and the {N} smiles.";
constexpr std::string_view kMixed = "A {N} and a {X} share a bench at park {I}.";

std::string expand(std::string_view tmpl, const Person& p, std::string_view other, std::size_t index) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 'N': out += p.noun; break;
        case 'S': out += p.subject; break;
        case 'O': out += p.object; break;
        case 'D': out += p.determiner; break;
        case 'R': out += p.reflexive; break;
        case 'X': out += other; break;
        case 'I': out += std::to_string(index); break;
      }
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  // Sentence-initial pronoun.
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

}  // namespace

std::vector<CaptionRecord> synthetic_captions(std::size_t n, const SyntheticOptions& options) {
  std::vector<CaptionRecord> out;
  out.reserve(n);
  SeededRng rng(options.seed);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", i + 1);
    const bool woman = rng.uniform_below(2) == 1;
    const auto& nouns = kNouns[rng.uniform_below(kNouns.size())];
    const Person p = woman ? Person{nouns.second, "she", "her", "her", "herself"}
                           : Person{nouns.first, "he", "him", "his", "himself"};
    const double u = unit_interval(rng.uniform_below(UINT64_MAX));
    std::string text;
    if (u < options.mixed_rate) {
      text = expand(kMixed, p, woman ? nouns.first : nouns.second, i + 1);
    } else if (u < options.mixed_rate + options.non_involutive_rate) {
      text = expand(kNonInvolutive, Person{nouns.first, "he", "him", "his", "himself"}, {}, i + 1);
    } else {
      text = expand(kTemplates[rng.uniform_below(kTemplates.size())], p, {}, i + 1);
    }
    CaptionRecord r;
    r.record_id = id;
    r.triple_id = id;
    r.text = std::move(text);
    const std::size_t labels = 1 + rng.uniform_below(4);
    for (std::size_t k = 0; k < labels; ++k) r.gt_labels.insert(canonical_labels()[rng.uniform_below(kEmotionCount)]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string synthetic_corpus_text(std::size_t n, const SyntheticOptions& options) {
  std::ostringstream out;
  write_corpus(out, synthetic_captions(n, options), CorpusFormat::Raw);
  return out.str();
}

std::vector<CaptionRecord> synthetic_triples(std::size_t n, std::uint64_t seed) {
  SyntheticOptions o;
  o.seed = seed;
  o.non_involutive_rate = 0.0;
  auto result = augment_all(synthetic_captions(n, o), Lexicon::builtin());
  return std::move(result.records);
}

}  // namespace emobias::testing
