#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "emobias/rewrite.hpp"
#include "emobias/taxonomy.hpp"

namespace emobias {

struct CaptionRecord {
  std::string record_id;
  std::string triple_id;  // equals record_id until augmentation
  std::string text;
  // nullopt when the caption mentions both genders or neither.
  std::optional<GenderVariant> variant;
  LabelSet gt_labels;
  // False when swapping the source caption twice does not reproduce it.
  bool involution_ok = true;

  friend bool operator==(const CaptionRecord&, const CaptionRecord&) = default;
};

struct Triple {
  CaptionRecord original;
  CaptionRecord swapped;
  CaptionRecord neutral;
};

struct FinetunePair {
  std::string prompt;
  std::string completion;
  GenderVariant variant = GenderVariant::Undefined;
  std::string triple_id;

  friend bool operator==(const FinetunePair&, const FinetunePair&) = default;
};

// Line-delimited JSON. Raw lines carry record_id, text and gt_labels; lines of
// an augmented corpus additionally carry triple_id, variant and involution_ok.
std::vector<CaptionRecord> load_corpus(std::istream& in, const Lexicon& lexicon,
                                       std::string_view source_name = "<stream>");
std::vector<CaptionRecord> load_corpus(const std::filesystem::path& path, const Lexicon& lexicon);

enum class CorpusFormat { Raw, Augmented };

void write_corpus(std::ostream& out, std::span<const CaptionRecord> records,
                  CorpusFormat format = CorpusFormat::Augmented);

// (original, swapped, neutral) sharing triple_id and gt_labels. Throws
// AugmentError unless the caption is cleanly one gender.
Triple augment(const CaptionRecord& record, const Lexicon& lexicon);

struct SkippedRecord {
  std::string record_id;
  DetectedGender detected = DetectedGender::None;
};

struct AugmentResult {
  std::vector<CaptionRecord> records;  // 3 per triple, input order
  std::vector<SkippedRecord> skipped;
  std::size_t flagged_triples = 0;  // involution failures (kept unless strict)
};

// Augments every record; captions that are not cleanly gendered are skipped
// and reported. With strict=true, involution-flagged triples are dropped.
// The OpenMP path and the serial reference produce identical results.
AugmentResult augment_all(std::span<const CaptionRecord> records, const Lexicon& lexicon,
                          bool strict = false);
AugmentResult augment_all_serial(std::span<const CaptionRecord> records, const Lexicon& lexicon,
                                 bool strict = false);

std::set<std::string> triple_ids(std::span<const CaptionRecord> records);

// Uniform sample of n triples without replacement (triples listed in
// `exclude` are never drawn); returns every record of each drawn triple.
// Deterministic in (set of triples, n, seed, exclude).
std::vector<CaptionRecord> sample(std::span<const CaptionRecord> records, std::size_t n,
                                  std::uint64_t seed, const std::set<std::string>& exclude = {});

// One prompt/completion pair per record; each completion lists the ground
// truth in an order shuffled by a stream derived from (seed, record_id).
// Every triple must be complete.
std::vector<FinetunePair> export_finetune(std::span<const CaptionRecord> records,
                                          std::uint64_t seed);

void write_finetune(std::ostream& out, std::span<const FinetunePair> pairs);
std::vector<FinetunePair> load_finetune(std::istream& in);

}  // namespace emobias
