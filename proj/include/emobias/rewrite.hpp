#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emobias {

enum class GenderVariant { Man, Woman, Undefined };

enum class DetectedGender { Man, Woman, Mixed, None };

enum class WordClass {
  Noun,
  SubjectPronoun,
  ObjectPronoun,
  PossessiveDeterminer,
  PossessivePronoun,
  Reflexive,
};

enum class Side { Man, Woman };

std::string_view to_string(GenderVariant v) noexcept;
std::optional<GenderVariant> variant_from_string(std::string_view s);
std::string_view to_string(DetectedGender g) noexcept;
std::string_view to_string(WordClass c) noexcept;
std::optional<WordClass> word_class_from_string(std::string_view s);

struct LexiconEntry {
  std::string surface;
  std::string counterpart;
  WordClass word_class = WordClass::Noun;
  std::string neutral_form;
  Side side = Side::Man;
};

// Gendered-word table. Immutable once built.
//
// File format: one entry per line, tab-separated
//   surface  counterpart  word_class  neutral_form  [side]
// with '#' comments and lowercase text. When the optional side column
// ("man"/"woman") is omitted, an entry whose counterpart was declared earlier
// takes the opposite side of that declaration, otherwise it is man-side; i.e.
// pairs are listed man-side first.
class Lexicon {
 public:
  static const Lexicon& builtin();
  static Lexicon parse(std::string_view text, std::string_view source_name = "<memory>");
  static Lexicon load(const std::filesystem::path& path);

  std::span<const LexiconEntry> entries() const noexcept { return entries_; }

  // Entries sharing a lowercase surface form (several when the form is
  // ambiguous, e.g. "her"). Empty when the form is not gendered.
  std::vector<const LexiconEntry*> lookup(std::string_view lowercase_surface) const;
  bool contains(std::string_view lowercase_surface) const;

  // "<origin>+<first 12 hex digits of the content hash>"
  const std::string& version() const noexcept { return version_; }

  // Canonical file-format text; parse(serialize()) reproduces the lexicon.
  std::string serialize() const;

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_surface_;
  std::string version_;
};

std::string swap_gender(std::string_view text, const Lexicon& lexicon);
std::string neutralize_gender(std::string_view text, const Lexicon& lexicon);
DetectedGender detect_gender(std::string_view text, const Lexicon& lexicon);

// True when swapping twice gives back the input.
bool swap_is_involutive(std::string_view text, const Lexicon& lexicon);

}  // namespace emobias
