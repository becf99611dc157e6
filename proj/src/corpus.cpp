#include "emobias/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "emobias/error.hpp"
#include "emobias/hashing.hpp"
#include "emobias/prompts.hpp"
#include "json.hpp"

namespace emobias {
namespace {

using json = nlohmann::ordered_json;

std::optional<GenderVariant> variant_of(DetectedGender g) {
  switch (g) {
    case DetectedGender::Man: return GenderVariant::Man;
    case DetectedGender::Woman: return GenderVariant::Woman;
    default: return std::nullopt;
  }
}

LabelSet labels_from_json(const json& arr, const std::string& record_id, std::string_view source,
                          std::size_t line) {
  if (!arr.is_array()) {
    throw LoadError(std::string(source) + ":" + std::to_string(line) + ": record '" + record_id +
                    "': gt_labels must be an array");
  }
  LabelSet out;
  for (const auto& item : arr) {
    if (!item.is_string()) {
      throw LoadError(std::string(source) + ":" + std::to_string(line) + ": record '" + record_id +
                      "': gt_labels entries must be strings");
    }
    const auto raw = item.get<std::string>();
    auto label = normalize_label(raw);
    if (!label) {
      throw LoadError(std::string(source) + ":" + std::to_string(line) + ": record '" + record_id +
                      "': unknown label '" + raw + "'");
    }
    out.insert(*label);
  }
  return out;
}

json labels_to_json(const LabelSet& labels) {
  json arr = json::array();
  for (Emotion e : labels.to_vector()) arr.push_back(std::string(name(e)));
  return arr;
}

void validate_triples(std::span<const CaptionRecord> records, std::string_view source) {
  std::unordered_map<std::string, std::vector<const CaptionRecord*>> groups;
  for (const auto& r : records) groups[r.triple_id].push_back(&r);
  for (const auto& [id, members] : groups) {
    if (members.size() > 3) {
      throw LoadError(std::string(source) + ": triple '" + id + "' has more than 3 records");
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (members[i]->gt_labels != members[j]->gt_labels) {
          throw LoadError(std::string(source) + ": triple '" + id +
                          "' has differing ground-truth labels");
        }
        if (members[i]->variant && members[i]->variant == members[j]->variant) {
          throw LoadError(std::string(source) + ": triple '" + id + "' repeats variant " +
                          std::string(to_string(*members[i]->variant)));
        }
      }
    }
  }
}

int variant_rank(const std::optional<GenderVariant>& v) {
  return v ? static_cast<int>(*v) : 3;
}

// Per-record work shared by the parallel and serial augmentation paths.
struct AugmentOutcome {
  std::optional<Triple> triple;
  DetectedGender detected = DetectedGender::None;
};

AugmentOutcome augment_one(const CaptionRecord& record, const Lexicon& lexicon) {
  AugmentOutcome out;
  out.detected = detect_gender(record.text, lexicon);
  if (out.detected == DetectedGender::Man || out.detected == DetectedGender::Woman) {
    out.triple = augment(record, lexicon);
  }
  return out;
}

AugmentResult assemble(std::span<const CaptionRecord> records, std::vector<AugmentOutcome>& outcomes,
                       bool strict) {
  AugmentResult result;
  result.records.reserve(records.size() * 3);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& o = outcomes[i];
    if (!o.triple) {
      result.skipped.push_back({records[i].record_id, o.detected});
      continue;
    }
    if (!o.triple->original.involution_ok) {
      ++result.flagged_triples;
      if (strict) continue;
    }
    result.records.push_back(std::move(o.triple->original));
    result.records.push_back(std::move(o.triple->swapped));
    result.records.push_back(std::move(o.triple->neutral));
  }
  return result;
}

}  // namespace

std::vector<CaptionRecord> load_corpus(std::istream& in, const Lexicon& lexicon,
                                       std::string_view source_name) {
  std::vector<CaptionRecord> records;
  std::unordered_set<std::string> seen;
  bool any_augmented = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(where + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("record_id") || !obj["record_id"].is_string() ||
        !obj.contains("text") || !obj["text"].is_string() || !obj.contains("gt_labels")) {
      throw LoadError(where + ": expected object with string record_id, string text, gt_labels");
    }
    CaptionRecord r;
    r.record_id = obj["record_id"].get<std::string>();
    r.text = obj["text"].get<std::string>();
    r.gt_labels = labels_from_json(obj["gt_labels"], r.record_id, source_name, line_no);
    if (!seen.insert(r.record_id).second) {
      throw LoadError(where + ": duplicate record_id '" + r.record_id + "'");
    }
    if (obj.contains("triple_id")) {
      any_augmented = true;
      if (!obj["triple_id"].is_string() || !obj.contains("variant") || !obj["variant"].is_string()) {
        throw LoadError(where + ": record '" + r.record_id +
                        "': triple_id requires a string variant");
      }
      r.triple_id = obj["triple_id"].get<std::string>();
      auto v = variant_from_string(obj["variant"].get<std::string>());
      if (!v) throw LoadError(where + ": record '" + r.record_id + "': unknown variant");
      r.variant = *v;
      if (obj.contains("involution_ok")) {
        if (!obj["involution_ok"].is_boolean()) {
          throw LoadError(where + ": record '" + r.record_id + "': involution_ok must be a boolean");
        }
        r.involution_ok = obj["involution_ok"].get<bool>();
      }
    } else {
      r.triple_id = r.record_id;
      r.variant = variant_of(detect_gender(r.text, lexicon));
    }
    records.push_back(std::move(r));
  }
  if (any_augmented) validate_triples(records, source_name);
  return records;
}

std::vector<CaptionRecord> load_corpus(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open corpus file " + path.string());
  return load_corpus(in, lexicon, path.filename().string());
}

void write_corpus(std::ostream& out, std::span<const CaptionRecord> records, CorpusFormat format) {
  for (const auto& r : records) {
    json obj;
    obj["record_id"] = r.record_id;
    obj["text"] = r.text;
    obj["gt_labels"] = labels_to_json(r.gt_labels);
    if (format == CorpusFormat::Augmented) {
      if (!r.variant) throw DataError("write_corpus: record '" + r.record_id + "' has no variant");
      obj["triple_id"] = r.triple_id;
      obj["variant"] = std::string(to_string(*r.variant));
      obj["involution_ok"] = r.involution_ok;
    }
    out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

Triple augment(const CaptionRecord& record, const Lexicon& lexicon) {
  const DetectedGender detected = detect_gender(record.text, lexicon);
  if (detected != DetectedGender::Man && detected != DetectedGender::Woman) {
    throw AugmentError("record '" + record.record_id + "' is not cleanly gendered (detected " +
                       std::string(to_string(detected)) + ")");
  }
  const GenderVariant variant = *variant_of(detected);
  if (record.variant && record.variant != variant) {
    throw AugmentError("record '" + record.record_id + "' is tagged " +
                       std::string(to_string(*record.variant)) + " but reads as " +
                       std::string(to_string(detected)));
  }
  const bool involutive = swap_is_involutive(record.text, lexicon);
  const std::string& triple_id = record.triple_id.empty() ? record.record_id : record.triple_id;

  Triple t;
  t.original = record;
  t.original.triple_id = triple_id;
  t.original.variant = variant;
  t.original.involution_ok = involutive;

  t.swapped = t.original;
  t.swapped.record_id = record.record_id + "~swap";
  t.swapped.text = swap_gender(record.text, lexicon);
  t.swapped.variant = variant == GenderVariant::Man ? GenderVariant::Woman : GenderVariant::Man;

  t.neutral = t.original;
  t.neutral.record_id = record.record_id + "~neutral";
  t.neutral.text = neutralize_gender(record.text, lexicon);
  t.neutral.variant = GenderVariant::Undefined;
  return t;
}

AugmentResult augment_all(std::span<const CaptionRecord> records, const Lexicon& lexicon,
                          bool strict) {
  std::vector<AugmentOutcome> outcomes(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    outcomes[i] = augment_one(records[i], lexicon);
  }
  return assemble(records, outcomes, strict);
}

AugmentResult augment_all_serial(std::span<const CaptionRecord> records, const Lexicon& lexicon,
                                 bool strict) {
  std::vector<AugmentOutcome> outcomes(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) outcomes[i] = augment_one(records[i], lexicon);
  return assemble(records, outcomes, strict);
}

std::set<std::string> triple_ids(std::span<const CaptionRecord> records) {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.triple_id);
  return out;
}

std::vector<CaptionRecord> sample(std::span<const CaptionRecord> records, std::size_t n,
                                  std::uint64_t seed, const std::set<std::string>& exclude) {
  std::map<std::string, std::vector<const CaptionRecord*>> groups;
  for (const auto& r : records) {
    if (!exclude.contains(r.triple_id)) groups[r.triple_id].push_back(&r);
  }
  if (n > groups.size()) {
    throw DomainError("sample: requested " + std::to_string(n) + " triples but only " +
                      std::to_string(groups.size()) + " are available");
  }

  std::vector<const std::vector<const CaptionRecord*>*> pool;
  pool.reserve(groups.size());
  for (auto& [id, members] : groups) {
    std::sort(members.begin(), members.end(), [](const CaptionRecord* a, const CaptionRecord* b) {
      return variant_rank(a->variant) < variant_rank(b->variant);
    });
    pool.push_back(&members);
  }

  // Partial Fisher-Yates over the sorted pool.
  SeededRng rng(seed);
  std::vector<CaptionRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    for (const CaptionRecord* r : *pool[i]) out.push_back(*r);
  }
  return out;
}

std::vector<FinetunePair> export_finetune(std::span<const CaptionRecord> records,
                                          std::uint64_t seed) {
  std::unordered_map<std::string, unsigned> variants_seen;
  for (const auto& r : records) {
    if (!r.variant) {
      throw DataError("export_finetune: record '" + r.record_id + "' has no gender variant");
    }
    variants_seen[r.triple_id] |= 1u << static_cast<unsigned>(*r.variant);
  }
  for (const auto& [id, mask] : variants_seen) {
    if (mask != 0b111) throw DataError("export_finetune: incomplete triple '" + id + "'");
  }

  std::vector<FinetunePair> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    std::vector<Emotion> labels = r.gt_labels.to_vector();
    SeededRng rng(derive_seed(seed, r.record_id));
    rng.shuffle(labels);
    std::string completion;
    for (Emotion e : labels) {
      if (!completion.empty()) completion.append(", ");
      completion.append(name(e));
    }
    out.push_back({build_prompt(Strategy::ZeroShot, r.text, r.record_id).text,
                   std::move(completion), *r.variant, r.triple_id});
  }
  return out;
}

void write_finetune(std::ostream& out, std::span<const FinetunePair> pairs) {
  for (const auto& p : pairs) {
    json obj;
    obj["prompt"] = p.prompt;
    obj["completion"] = p.completion;
    obj["variant"] = std::string(to_string(p.variant));
    obj["triple_id"] = p.triple_id;
    out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

std::vector<FinetunePair> load_finetune(std::istream& in) {
  std::vector<FinetunePair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      FinetunePair p;
      p.prompt = obj.at("prompt").get<std::string>();
      p.completion = obj.at("completion").get<std::string>();
      auto v = variant_from_string(obj.at("variant").get<std::string>());
      if (!v) throw LoadError("unknown variant");
      p.variant = *v;
      p.triple_id = obj.at("triple_id").get<std::string>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw LoadError("fine-tune line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace emobias
