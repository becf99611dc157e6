#include "emobias/rewrite.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "emobias/error.hpp"
#include "emobias/hashing.hpp"
#include "text_util.hpp"

namespace emobias {
namespace {

struct Row {
  std::string_view surface;
  std::string_view counterpart;
  std::string_view word_class;
  std::string_view neutral;
};

// Man-side form first in every pair. Version the origin tag when editing.
constexpr std::string_view kBuiltinOrigin = "builtin-v1";
constexpr std::array<Row, 76> kBuiltinRows = {{
    {"man", "woman", "noun", "adult"},
    {"woman", "man", "noun", "adult"},
    {"men", "women", "noun", "adults"},
    {"women", "men", "noun", "adults"},
    {"boy", "girl", "noun", "child"},
    {"girl", "boy", "noun", "child"},
    {"boys", "girls", "noun", "children"},
    {"girls", "boys", "noun", "children"},
    {"guy", "gal", "noun", "person"},
    {"gal", "guy", "noun", "person"},
    {"guys", "gals", "noun", "people"},
    {"gals", "guys", "noun", "people"},
    {"male", "female", "noun", "person"},
    {"female", "male", "noun", "person"},
    {"males", "females", "noun", "people"},
    {"females", "males", "noun", "people"},
    {"gentleman", "lady", "noun", "person"},
    {"lady", "gentleman", "noun", "person"},
    {"gentlemen", "ladies", "noun", "people"},
    {"ladies", "gentlemen", "noun", "people"},
    {"father", "mother", "noun", "parent"},
    {"mother", "father", "noun", "parent"},
    {"fathers", "mothers", "noun", "parents"},
    {"mothers", "fathers", "noun", "parents"},
    {"dad", "mom", "noun", "parent"},
    {"mom", "dad", "noun", "parent"},
    {"son", "daughter", "noun", "child"},
    {"daughter", "son", "noun", "child"},
    {"sons", "daughters", "noun", "children"},
    {"daughters", "sons", "noun", "children"},
    {"brother", "sister", "noun", "sibling"},
    {"sister", "brother", "noun", "sibling"},
    {"brothers", "sisters", "noun", "siblings"},
    {"sisters", "brothers", "noun", "siblings"},
    {"husband", "wife", "noun", "spouse"},
    {"wife", "husband", "noun", "spouse"},
    {"husbands", "wives", "noun", "spouses"},
    {"wives", "husbands", "noun", "spouses"},
    {"boyfriend", "girlfriend", "noun", "partner"},
    {"girlfriend", "boyfriend", "noun", "partner"},
    {"grandfather", "grandmother", "noun", "grandparent"},
    {"grandmother", "grandfather", "noun", "grandparent"},
    {"grandson", "granddaughter", "noun", "grandchild"},
    {"granddaughter", "grandson", "noun", "grandchild"},
    {"uncle", "aunt", "noun", "relative"},
    {"aunt", "uncle", "noun", "relative"},
    {"nephew", "niece", "noun", "relative"},
    {"niece", "nephew", "noun", "relative"},
    {"schoolboy", "schoolgirl", "noun", "schoolchild"},
    {"schoolgirl", "schoolboy", "noun", "schoolchild"},
    {"businessman", "businesswoman", "noun", "businessperson"},
    {"businesswoman", "businessman", "noun", "businessperson"},
    {"policeman", "policewoman", "noun", "police officer"},
    {"policewoman", "policeman", "noun", "police officer"},
    {"sportsman", "sportswoman", "noun", "athlete"},
    {"sportswoman", "sportsman", "noun", "athlete"},
    {"king", "queen", "noun", "monarch"},
    {"queen", "king", "noun", "monarch"},
    {"prince", "princess", "noun", "royal"},
    {"princess", "prince", "noun", "royal"},
    {"groom", "bride", "noun", "newlywed"},
    {"bride", "groom", "noun", "newlywed"},
    {"waiter", "waitress", "noun", "server"},
    {"waitress", "waiter", "noun", "server"},
    {"he", "she", "subject_pronoun", "this person"},
    {"she", "he", "subject_pronoun", "this person"},
    {"him", "her", "object_pronoun", "this person"},
    {"her", "him", "object_pronoun", "this person"},
    {"his", "her", "possessive_determiner", "this person's"},
    {"her", "his", "possessive_determiner", "this person's"},
    {"his", "hers", "possessive_pronoun", "this person's"},
    {"hers", "his", "possessive_pronoun", "this person's"},
    {"himself", "herself", "reflexive", "themself"},
    {"herself", "himself", "reflexive", "themself"},
    {"mr", "ms", "noun", "mx"},
    {"ms", "mr", "noun", "mx"},
}};

std::string builtin_text() {
  std::string out = "# surface\tcounterpart\tword_class\tneutral_form\n";
  for (const Row& r : kBuiltinRows) {
    out.append(r.surface).append("\t").append(r.counterpart).append("\t");
    out.append(r.word_class).append("\t").append(r.neutral).append("\n");
  }
  return out;
}

// Words that cannot start the noun phrase owned by a possessive determiner.
// "her"/"his" followed by one of these (or by punctuation / end of text) is
// read as an object pronoun / standalone possessive.
const std::unordered_set<std::string_view>& function_words() {
  static const std::unordered_set<std::string_view> words = {
      // determiners and quantifiers
      "a", "an", "the", "this", "that", "these", "those", "some", "any", "every", "each",
      "all", "both", "no", "another", "such", "many", "much", "few",
      // prepositions and particles
      "about", "above", "across", "after", "against", "along", "among", "around", "at",
      "before", "behind", "below", "beneath", "beside", "besides", "between", "beyond",
      "by", "down", "during", "for", "from", "in", "inside", "into", "like", "near", "of",
      "off", "on", "onto", "out", "outside", "over", "past", "since", "through",
      "throughout", "to", "toward", "towards", "under", "underneath", "until", "up",
      "upon", "with", "within", "without", "away", "aside", "apart",
      // conjunctions and relatives
      "and", "but", "or", "nor", "so", "yet", "as", "because", "while", "when", "whenever",
      "if", "than", "though", "although", "whereas", "whether", "once", "where", "who",
      "whom", "which", "what", "how", "why",
      // pronouns
      "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "his",
      "hers", "its", "our", "their", "my", "your", "himself", "herself", "itself",
      "themselves", "themself", "someone", "something", "anyone", "everyone",
      // auxiliaries and modals
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do",
      "does", "did", "will", "would", "can", "could", "should", "may", "might", "must",
      "shall",
      // adverbs that commonly follow an object pronoun
      "again", "here", "there", "now", "then", "too", "very", "also", "just", "only",
      "still", "even", "already", "not", "never", "always", "often", "together", "softly",
      "gently", "tightly", "closely", "warmly", "tenderly", "quietly", "happily",
      "lovingly", "forward", "home", "goodbye", "well", "today", "tonight", "yesterday",
      "tomorrow", "instead", "alone", "anymore",
  };
  return words;
}

struct Token {
  std::size_t begin;
  std::size_t end;
};

// Letters, optionally joined by single internal hyphens ("mother-in-law").
std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!detail::is_alpha(text[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < text.size()) {
      while (i < text.size() && detail::is_alpha(text[i])) ++i;
      if (i + 1 < text.size() && text[i] == '-' && detail::is_alpha(text[i + 1])) {
        ++i;
        continue;
      }
      break;
    }
    out.push_back({begin, i});
  }
  return out;
}

// Whether the token right after `end` (same clause, whitespace only between)
// looks like the head of a noun phrase.
bool noun_follows(std::string_view text, std::size_t end) {
  std::size_t i = end;
  while (i < text.size() && detail::is_space(text[i])) ++i;
  if (i >= text.size() || !detail::is_alpha(text[i])) return false;
  std::string word;
  while (i < text.size() && (detail::is_alpha(text[i]) || text[i] == '-')) {
    word.push_back(detail::to_lower(text[i++]));
  }
  return !function_words().contains(word);
}

const LexiconEntry* resolve(const std::vector<const LexiconEntry*>& candidates,
                            std::string_view text, std::size_t token_end) {
  if (candidates.size() == 1) return candidates.front();
  const bool possessive = noun_follows(text, token_end);
  auto find = [&](WordClass c) -> const LexiconEntry* {
    for (const LexiconEntry* e : candidates) {
      if (e->word_class == c) return e;
    }
    return nullptr;
  };
  if (possessive) {
    if (auto* e = find(WordClass::PossessiveDeterminer)) return e;
  } else {
    if (auto* e = find(WordClass::ObjectPronoun)) return e;
    if (auto* e = find(WordClass::PossessivePronoun)) return e;
  }
  return candidates.front();
}

enum class CasePattern { Lower, Initial, Upper };

CasePattern case_of(std::string_view word) {
  bool all_upper = true;
  bool all_lower = true;
  for (char c : word) {
    if (detail::is_upper(c)) all_lower = false;
    if (detail::is_lower(c)) all_upper = false;
  }
  if (all_lower) return CasePattern::Lower;
  if (all_upper && word.size() > 1) return CasePattern::Upper;
  return CasePattern::Initial;
}

std::string apply_case(std::string_view replacement, CasePattern pattern) {
  std::string out(replacement);
  switch (pattern) {
    case CasePattern::Lower: break;
    case CasePattern::Upper:
      for (char& c : out) c = detail::to_upper(c);
      break;
    case CasePattern::Initial:
      if (!out.empty()) out[0] = detail::to_upper(out[0]);
      break;
  }
  return out;
}

template <typename Pick>
std::string rewrite(std::string_view text, const Lexicon& lexicon, Pick pick) {
  std::string out;
  out.reserve(text.size() + text.size() / 4);
  std::size_t cursor = 0;
  std::string lowered;
  for (const Token& tok : tokenize(text)) {
    const std::string_view word = text.substr(tok.begin, tok.end - tok.begin);
    lowered = detail::lower(word);
    auto candidates = lexicon.lookup(lowered);
    if (candidates.empty()) continue;
    const LexiconEntry* entry = resolve(candidates, text, tok.end);
    out.append(text.substr(cursor, tok.begin - cursor));
    out.append(apply_case(pick(*entry), case_of(word)));
    cursor = tok.end;
  }
  out.append(text.substr(cursor));
  return out;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw LoadError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

bool valid_surface(std::string_view s) {
  if (s.empty() || !detail::is_alpha(s.front()) || !detail::is_alpha(s.back())) return false;
  for (char c : s) {
    if (!(detail::is_lower(c) || c == '-')) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(GenderVariant v) noexcept {
  switch (v) {
    case GenderVariant::Man: return "man";
    case GenderVariant::Woman: return "woman";
    case GenderVariant::Undefined: return "undefined";
  }
  return "undefined";
}

std::optional<GenderVariant> variant_from_string(std::string_view s) {
  for (auto v : {GenderVariant::Man, GenderVariant::Woman, GenderVariant::Undefined}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::string_view to_string(DetectedGender g) noexcept {
  switch (g) {
    case DetectedGender::Man: return "man";
    case DetectedGender::Woman: return "woman";
    case DetectedGender::Mixed: return "mixed";
    case DetectedGender::None: return "none";
  }
  return "none";
}

std::string_view to_string(WordClass c) noexcept {
  switch (c) {
    case WordClass::Noun: return "noun";
    case WordClass::SubjectPronoun: return "subject_pronoun";
    case WordClass::ObjectPronoun: return "object_pronoun";
    case WordClass::PossessiveDeterminer: return "possessive_determiner";
    case WordClass::PossessivePronoun: return "possessive_pronoun";
    case WordClass::Reflexive: return "reflexive";
  }
  return "noun";
}

std::optional<WordClass> word_class_from_string(std::string_view s) {
  for (auto c : {WordClass::Noun, WordClass::SubjectPronoun, WordClass::ObjectPronoun,
                 WordClass::PossessiveDeterminer, WordClass::PossessivePronoun,
                 WordClass::Reflexive}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon = parse(builtin_text(), kBuiltinOrigin);
  return lexicon;
}

Lexicon Lexicon::parse(std::string_view text, std::string_view source_name) {
  Lexicon lx;
  std::vector<std::size_t> line_of;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || detail::trim(line).front() == '#') continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.emplace_back(detail::trim(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4 && cols.size() != 5) {
      fail(source_name, line_no, "expected 4 or 5 tab-separated columns, got " +
                                     std::to_string(cols.size()));
    }
    LexiconEntry e;
    e.surface = cols[0];
    e.counterpart = cols[1];
    e.neutral_form = cols[3];
    if (!valid_surface(e.surface)) fail(source_name, line_no, "bad surface '" + e.surface + "'");
    if (!valid_surface(e.counterpart)) {
      fail(source_name, line_no, "bad counterpart '" + e.counterpart + "'");
    }
    if (e.neutral_form.empty() || detail::lower(e.neutral_form) != e.neutral_form) {
      fail(source_name, line_no, "neutral form must be nonempty lowercase");
    }
    auto wc = word_class_from_string(cols[2]);
    if (!wc) fail(source_name, line_no, "unknown word class '" + cols[2] + "'");
    e.word_class = *wc;

    if (cols.size() == 5) {
      if (cols[4] == "man") {
        e.side = Side::Man;
      } else if (cols[4] == "woman") {
        e.side = Side::Woman;
      } else {
        fail(source_name, line_no, "side must be 'man' or 'woman'");
      }
    } else if (auto it = lx.by_surface_.find(e.counterpart); it != lx.by_surface_.end()) {
      const Side other = lx.entries_[it->second.front()].side;
      e.side = other == Side::Man ? Side::Woman : Side::Man;
    } else {
      e.side = Side::Man;
    }

    auto& slot = lx.by_surface_[e.surface];
    for (std::size_t idx : slot) {
      if (lx.entries_[idx].word_class == e.word_class) {
        fail(source_name, line_no,
             "duplicate entry '" + e.surface + "' (" + cols[2] + ")");
      }
      if (lx.entries_[idx].side != e.side) {
        fail(source_name, line_no, "surface '" + e.surface + "' declared on both sides");
      }
    }
    slot.push_back(lx.entries_.size());
    lx.entries_.push_back(std::move(e));
    line_of.push_back(line_no);
  }

  // Cross-entry checks: counterparts exist on the other side, pairs with a
  // same-class counterpart are mutually inverse, neutral forms are clean.
  for (std::size_t i = 0; i < lx.entries_.size(); ++i) {
    const LexiconEntry& e = lx.entries_[i];
    auto it = lx.by_surface_.find(e.counterpart);
    if (it == lx.by_surface_.end()) {
      fail(source_name, line_of[i], "counterpart '" + e.counterpart + "' has no entry");
    }
    for (std::size_t j : it->second) {
      const LexiconEntry& c = lx.entries_[j];
      if (c.side == e.side) {
        fail(source_name, line_of[i], "counterpart '" + e.counterpart + "' is on the same side");
      }
      if (c.word_class == e.word_class && c.counterpart != e.surface) {
        fail(source_name, line_of[i],
             "'" + e.surface + "' -> '" + e.counterpart + "' is not inverted by its counterpart");
      }
    }
    for (const Token& tok : tokenize(e.neutral_form)) {
      auto word = std::string_view(e.neutral_form).substr(tok.begin, tok.end - tok.begin);
      if (lx.by_surface_.contains(std::string(word))) {
        fail(source_name, line_of[i], "neutral form '" + e.neutral_form + "' contains a gendered word");
      }
    }
  }

  lx.version_ = std::string(source_name) + "+" + sha256_hex(lx.serialize()).substr(0, 12);
  return lx;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open lexicon file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Lexicon lx = parse(buf.str(), path.filename().string());
  lx.version_ = "file:" + lx.version_;
  return lx;
}

std::vector<const LexiconEntry*> Lexicon::lookup(std::string_view lowercase_surface) const {
  std::vector<const LexiconEntry*> out;
  if (auto it = by_surface_.find(std::string(lowercase_surface)); it != by_surface_.end()) {
    for (std::size_t idx : it->second) out.push_back(&entries_[idx]);
  }
  return out;
}

bool Lexicon::contains(std::string_view lowercase_surface) const {
  return by_surface_.contains(std::string(lowercase_surface));
}

std::string Lexicon::serialize() const {
  std::string out = "# surface\tcounterpart\tword_class\tneutral_form\tside\n";
  for (const LexiconEntry& e : entries_) {
    out.append(e.surface).append("\t").append(e.counterpart).append("\t");
    out.append(to_string(e.word_class)).append("\t").append(e.neutral_form).append("\t");
    out.append(e.side == Side::Man ? "man" : "woman").append("\n");
  }
  return out;
}

std::string swap_gender(std::string_view text, const Lexicon& lexicon) {
  return rewrite(text, lexicon, [](const LexiconEntry& e) -> std::string_view { return e.counterpart; });
}

std::string neutralize_gender(std::string_view text, const Lexicon& lexicon) {
  return rewrite(text, lexicon, [](const LexiconEntry& e) -> std::string_view { return e.neutral_form; });
}

DetectedGender detect_gender(std::string_view text, const Lexicon& lexicon) {
  bool man = false;
  bool woman = false;
  for (const Token& tok : tokenize(text)) {
    auto candidates = lexicon.lookup(detail::lower(text.substr(tok.begin, tok.end - tok.begin)));
    if (candidates.empty()) continue;
    (candidates.front()->side == Side::Man ? man : woman) = true;
  }
  if (man && woman) return DetectedGender::Mixed;
  if (man) return DetectedGender::Man;
  if (woman) return DetectedGender::Woman;
  return DetectedGender::None;
}

bool swap_is_involutive(std::string_view text, const Lexicon& lexicon) {
  return swap_gender(swap_gender(text, lexicon), lexicon) == text;
}

}  // namespace emobias
