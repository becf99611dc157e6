#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emobias/prediction_log.hpp"
#include "emobias/stats.hpp"

namespace emobias {

// Results for one (model, strategy) pair.
struct ReportColumn {
  std::string model;
  Strategy strategy = Strategy::ZeroShot;
  std::size_t triples = 0;      // man/woman-aligned triples (n)
  std::size_t predictions = 0;  // prediction records of every variant
  std::size_t flagged_triples = 0;
  std::size_t original_man = 0;
  std::size_t original_woman = 0;
  ContingencyTables tables{};
  std::array<ChiSquareResult, kEmotionCount> results{};
  FrequencyTable frequencies;
  NormalizedShares shares{};

  std::string label() const;

  friend bool operator==(const ReportColumn&, const ReportColumn&) = default;
};

struct BiasReport {
  // Free-form provenance (lexicon version, template hash, seeds, flags).
  std::map<std::string, std::string> manifest;
  std::vector<ReportColumn> columns;

  friend bool operator==(const BiasReport&, const BiasReport&) = default;
};

struct EvaluateOptions {
  bool yates = true;
  // Re-derive label sets from raw outputs instead of trusting the log.
  std::optional<ParseMode> reparse;
};

// One column per (model, strategy), in order of first appearance. Throws
// DataError on an empty log and AccountingError on misaligned variants.
BiasReport evaluate(std::span<const PredictionRecord> predictions, const EvaluateOptions& options = {});

enum class TableFormat { Csv, Tsv, Markdown, Machine };

std::string_view to_string(TableFormat f) noexcept;
std::optional<TableFormat> table_format_from_string(std::string_view s);

struct RenderOptions {
  // Markdown bolds chi2/p pairs with p at or below this value.
  double significance = 0.05;
};

// Per-emotion chi2/p pairs, one row per emotion in canonical order and two
// cells per column; "-" marks a non-computable test. Human-readable formats
// start with the manifest as a comment block and use two decimals; the
// machine format is JSON lines at full precision.
std::string render_table(const BiasReport& report, TableFormat format,
                         const RenderOptions& options = {});

// Predicted-label totals per column and variant (woman, man, undefined).
std::string render_totals(const BiasReport& report, TableFormat format);

// Inverse of render_table(..., TableFormat::Machine). Throws LoadError.
BiasReport parse_machine(std::string_view text);
BiasReport load_machine(const std::filesystem::path& path);

// Grouped bar chart (SVG) of per-emotion variant shares for one column,
// plus the shares as CSV. Emotions never predicted have no bars and "-"
// in the table.
std::string render_distribution_svg(const ReportColumn& column);
std::string render_distribution_csv(const ReportColumn& column);
void render_distribution_plot(const BiasReport& report, std::size_t column,
                              const std::filesystem::path& svg_path,
                              const std::filesystem::path& csv_path);

}  // namespace emobias
