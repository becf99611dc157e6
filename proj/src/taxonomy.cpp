#include "emobias/taxonomy.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

#include "text_util.hpp"

namespace emobias {
namespace {

constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "suffering",   "pain",          "sadness",       "aversion",  "disapproval",
    "anger",       "fear",          "annoyance",     "fatigue",   "disquietment",
    "doubt/confusion", "embarrassment", "disconnection", "affection", "confidence",
    "engagement",  "happiness",     "peace",         "pleasure",  "esteem",
    "excitement",  "anticipation",  "yearning",      "sensitivity", "surprise",
    "sympathy",
};

constexpr std::array<Emotion, kEmotionCount> make_order() {
  std::array<Emotion, kEmotionCount> out{};
  for (std::size_t i = 0; i < kEmotionCount; ++i) out[i] = static_cast<Emotion>(i);
  return out;
}

constexpr auto kOrder = make_order();

// Exact-match table used by normalize_label: canonical names plus the two
// halves of doubt/confusion.
const std::unordered_map<std::string_view, Emotion>& exact_table() {
  static const auto table = [] {
    std::unordered_map<std::string_view, Emotion> t;
    for (std::size_t i = 0; i < kEmotionCount; ++i) t.emplace(kNames[i], kOrder[i]);
    t.emplace("doubt", Emotion::DoubtConfusion);
    t.emplace("confusion", Emotion::DoubtConfusion);
    return t;
  }();
  return table;
}

// Scanning works on single words; "doubt/confusion" is found through its
// halves, since '/' is a word boundary.
const std::unordered_map<std::string_view, Emotion>& word_table() {
  static const auto table = [] {
    std::unordered_map<std::string_view, Emotion> t;
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      if (kOrder[i] != Emotion::DoubtConfusion) t.emplace(kNames[i], kOrder[i]);
    }
    t.emplace("doubt", Emotion::DoubtConfusion);
    t.emplace("confusion", Emotion::DoubtConfusion);
    return t;
  }();
  return table;
}

void scan_words(std::string_view text, LabelSet& out) {
  const auto& table = word_table();
  std::string word;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!detail::is_alpha(text[i])) {
      ++i;
      continue;
    }
    word.clear();
    while (i < text.size() && detail::is_alpha(text[i])) word.push_back(detail::to_lower(text[i++]));
    if (auto it = table.find(word); it != table.end()) out.insert(it->second);
  }
}

LabelSet parse_list(std::string_view raw) {
  LabelSet out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t comma = raw.find(',', start);
    if (comma == std::string_view::npos) comma = raw.size();
    if (auto label = normalize_label(raw.substr(start, comma - start))) out.insert(*label);
    start = comma + 1;
  }
  return out;
}

LabelSet parse_after_marker(std::string_view raw) {
  static constexpr std::string_view kMarker = "emotion labels:";
  const std::string lowered = detail::lower(raw);
  std::string_view region = raw;
  if (auto pos = lowered.rfind(kMarker); pos != std::string::npos) {
    region = raw.substr(pos + kMarker.size());
  }

  // Each clause is "reasoning: Label, Label." or a bare label list; only the
  // slot after the clause's last colon is read.
  LabelSet out;
  std::size_t start = 0;
  while (start < region.size()) {
    std::size_t end = region.find_first_of(".!?\n", start);
    if (end == std::string_view::npos) end = region.size();
    std::string_view clause = region.substr(start, end - start);
    if (auto colon = clause.rfind(':'); colon != std::string_view::npos) {
      clause.remove_prefix(colon + 1);
    }
    scan_words(clause, out);
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string_view name(Emotion e) noexcept { return kNames[index_of(e)]; }

const std::array<Emotion, kEmotionCount>& canonical_labels() noexcept { return kOrder; }

std::string labels_resource() {
  std::string out;
  for (auto n : kNames) {
    out.append(n);
    out.push_back('\n');
  }
  return out;
}

std::string labels_comma_list() {
  std::string out;
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (i) out.append(", ");
    out.append(kNames[i]);
  }
  return out;
}

std::optional<Emotion> normalize_label(std::string_view raw) {
  // Strip everything around the word: whitespace, punctuation, quotes
  // (including non-ASCII quote bytes).
  while (!raw.empty() && !detail::is_alpha(raw.front())) raw.remove_prefix(1);
  while (!raw.empty() && !detail::is_alpha(raw.back())) raw.remove_suffix(1);
  if (raw.empty()) return std::nullopt;

  std::string cleaned;
  cleaned.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (detail::is_space(c)) {
      std::size_t j = i;
      while (j < raw.size() && detail::is_space(raw[j])) ++j;
      const bool next_slash = j < raw.size() && raw[j] == '/';
      const bool prev_slash = !cleaned.empty() && cleaned.back() == '/';
      if (!next_slash && !prev_slash) cleaned.push_back(' ');
      i = j - 1;
      continue;
    }
    cleaned.push_back(detail::to_lower(c));
  }

  const auto& table = exact_table();
  if (auto it = table.find(cleaned); it != table.end()) return it->second;
  return std::nullopt;
}

std::size_t LabelSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Emotion> LabelSet::to_vector() const {
  std::vector<Emotion> out;
  for (Emotion e : kOrder) {
    if (contains(e)) out.push_back(e);
  }
  return out;
}

std::string LabelSet::to_string() const {
  std::string out;
  for (Emotion e : to_vector()) {
    if (!out.empty()) out.append(", ");
    out.append(name(e));
  }
  return out;
}

std::string_view to_string(ParseMode mode) noexcept {
  switch (mode) {
    case ParseMode::List: return "list";
    case ParseMode::Scan: return "scan";
    case ParseMode::ScanAfterMarker: return "scan-after-marker";
  }
  return "list";
}

std::optional<ParseMode> parse_mode_from_string(std::string_view s) {
  for (ParseMode m : {ParseMode::List, ParseMode::Scan, ParseMode::ScanAfterMarker}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

LabelSet parse_labels(std::string_view raw_output, ParseMode mode) {
  switch (mode) {
    case ParseMode::List: return parse_list(raw_output);
    case ParseMode::Scan: {
      LabelSet out;
      scan_words(raw_output, out);
      return out;
    }
    case ParseMode::ScanAfterMarker: return parse_after_marker(raw_output);
  }
  return {};
}

}  // namespace emobias
