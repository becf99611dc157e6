#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emobias {

// The 26 EMOTIC categories, in the row order used by every report table.
enum class Emotion : std::uint8_t {
  Suffering,
  Pain,
  Sadness,
  Aversion,
  Disapproval,
  Anger,
  Fear,
  Annoyance,
  Fatigue,
  Disquietment,
  DoubtConfusion,
  Embarrassment,
  Disconnection,
  Affection,
  Confidence,
  Engagement,
  Happiness,
  Peace,
  Pleasure,
  Esteem,
  Excitement,
  Anticipation,
  Yearning,
  Sensitivity,
  Surprise,
  Sympathy,
};

inline constexpr std::size_t kEmotionCount = 26;

constexpr std::size_t index_of(Emotion e) noexcept { return static_cast<std::size_t>(e); }

std::string_view name(Emotion e) noexcept;

const std::array<Emotion, kEmotionCount>& canonical_labels() noexcept;

// One label per line in canonical order, newline-terminated.
std::string labels_resource();

// Canonical names joined by ", ", the form embedded in prompts.
std::string labels_comma_list();

std::optional<Emotion> normalize_label(std::string_view raw);

// Duplicate-free set of canonical labels backed by a 26-bit mask.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<Emotion> labels) {
    for (Emotion e : labels) insert(e);
  }

  static LabelSet from_bits(std::uint32_t bits) noexcept {
    LabelSet s;
    s.bits_ = bits & kMask;
    return s;
  }

  void insert(Emotion e) noexcept { bits_ |= bit(e); }
  void erase(Emotion e) noexcept { bits_ &= ~bit(e); }
  bool contains(Emotion e) const noexcept { return (bits_ & bit(e)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }
  std::size_t size() const noexcept;
  std::uint32_t bits() const noexcept { return bits_; }

  bool is_subset_of(const LabelSet& other) const noexcept {
    return (bits_ & ~other.bits_) == 0;
  }

  // Members in canonical order.
  std::vector<Emotion> to_vector() const;

  // Canonical names joined by ", ".
  std::string to_string() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  static constexpr std::uint32_t kMask = (1u << kEmotionCount) - 1;
  static constexpr std::uint32_t bit(Emotion e) noexcept { return 1u << index_of(e); }

  std::uint32_t bits_ = 0;
};

enum class ParseMode {
  List,             // comma-separated answer
  Scan,             // every label mention anywhere in the text
  ScanAfterMarker,  // answer slots after the last "emotion labels:" marker
};

std::string_view to_string(ParseMode mode) noexcept;
std::optional<ParseMode> parse_mode_from_string(std::string_view s);

LabelSet parse_labels(std::string_view raw_output, ParseMode mode);

}  // namespace emobias
