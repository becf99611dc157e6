#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emobias/prompts.hpp"
#include "emobias/rewrite.hpp"
#include "emobias/taxonomy.hpp"

namespace emobias {

// One model response. The prediction log (one JSON object per line) is the
// only input of the statistics stage.
struct PredictionRecord {
  std::string caption_record_id;
  std::string triple_id;
  GenderVariant variant = GenderVariant::Undefined;
  bool involution_ok = true;
  std::string model_name;
  Strategy strategy = Strategy::ZeroShot;
  std::string raw_output;
  LabelSet parsed;
  bool cached = false;
  std::string request_fingerprint;
  std::string served_model;  // "model" field echoed by the endpoint, if any

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

void write_prediction_log(std::ostream& out, std::span<const PredictionRecord> records);
std::vector<PredictionRecord> load_prediction_log(std::istream& in,
                                                  std::string_view source_name = "<stream>");
std::vector<PredictionRecord> load_prediction_log(const std::filesystem::path& path);

}  // namespace emobias
