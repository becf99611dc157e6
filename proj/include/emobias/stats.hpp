#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emobias/prediction_log.hpp"
#include "emobias/taxonomy.hpp"

namespace emobias {

// Presence counts of one emotion over n aligned triples: a man-variant
// captions and b woman-variant captions predicted it.
struct ContingencyTable {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t n = 0;

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

struct ChiSquareResult {
  double chi2 = 0.0;
  double p = 1.0;
  int df = 1;
  bool yates = true;
  // False when the emotion was predicted for no caption or for every caption
  // of both genders; chi2 and p are then meaningless.
  bool computable = false;

  friend bool operator==(const ChiSquareResult&, const ChiSquareResult&) = default;
};

// Upper tail of the chi-square distribution with one degree of freedom,
// erfc(sqrt(x / 2)), via a rational approximation (|error| < 2e-7).
// Throws DomainError for negative or NaN x.
double p_value_df1(double x);

// Pearson test on [[a, n-a], [b, n-b]], Yates-corrected unless yates=false.
ChiSquareResult chi_square(const ContingencyTable& table, bool yates = true);

// OpenMP batch and its serial reference; results are identical.
std::vector<ChiSquareResult> chi_square_batch(std::span<const ContingencyTable> tables,
                                              bool yates = true);
std::vector<ChiSquareResult> chi_square_batch_serial(std::span<const ContingencyTable> tables,
                                                     bool yates = true);

inline constexpr std::size_t kVariantCount = 3;  // man, woman, undefined

// Per-triple label masks with each gender variant in its own column.
// Triples are sorted by id.
struct AlignedPredictions {
  std::vector<std::string> triple_ids;
  std::vector<std::uint32_t> man;
  std::vector<std::uint32_t> woman;
  std::vector<std::uint32_t> undefined;  // only triples that have one
  std::size_t flagged_triples = 0;       // involution-flagged triples
  std::size_t original_man = 0;          // triples whose source caption was man
  std::size_t original_woman = 0;
};

// Throws AccountingError when a triple has a man prediction without a woman
// prediction (or vice versa) or repeats a variant.
AlignedPredictions align(std::span<const PredictionRecord> predictions);

using ContingencyTables = std::array<ContingencyTable, kEmotionCount>;

ContingencyTables contingency_all(const AlignedPredictions& aligned);
ContingencyTables contingency_all_serial(const AlignedPredictions& aligned);

ContingencyTable contingency(std::span<const PredictionRecord> predictions, Emotion emotion);

struct FrequencyTable {
  // counts[emotion][variant], variant in GenderVariant order.
  std::array<std::array<std::uint64_t, kVariantCount>, kEmotionCount> counts{};
  std::array<std::uint64_t, kVariantCount> totals{};

  std::uint64_t count(Emotion e, GenderVariant v) const {
    return counts[index_of(e)][static_cast<std::size_t>(v)];
  }
  std::uint64_t total(GenderVariant v) const { return totals[static_cast<std::size_t>(v)]; }

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

// Label occurrences per variant; each parsed set counts its members once.
FrequencyTable frequency_table(std::span<const PredictionRecord> predictions);
FrequencyTable frequency_table_serial(std::span<const PredictionRecord> predictions);

// Per-emotion variant shares (man, woman, undefined) summing to 1, or nullopt
// for emotions never predicted.
using VariantShares = std::array<double, kVariantCount>;
using NormalizedShares = std::array<std::optional<VariantShares>, kEmotionCount>;

NormalizedShares normalize_per_emotion(const FrequencyTable& freqs);

}  // namespace emobias
