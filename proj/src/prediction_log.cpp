#include "emobias/prediction_log.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "emobias/error.hpp"
#include "json.hpp"

namespace emobias {

using json = nlohmann::ordered_json;

void write_prediction_log(std::ostream& out, std::span<const PredictionRecord> records) {
  for (const auto& r : records) {
    json obj;
    obj["caption_record_id"] = r.caption_record_id;
    obj["triple_id"] = r.triple_id;
    obj["variant"] = std::string(to_string(r.variant));
    obj["involution_ok"] = r.involution_ok;
    obj["model_name"] = r.model_name;
    obj["strategy"] = std::string(to_string(r.strategy));
    obj["raw_output"] = r.raw_output;
    json parsed = json::array();
    for (Emotion e : r.parsed.to_vector()) parsed.push_back(std::string(name(e)));
    obj["parsed"] = std::move(parsed);
    obj["cached"] = r.cached;
    obj["request_fingerprint"] = r.request_fingerprint;
    obj["served_model"] = r.served_model;
    out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

std::vector<PredictionRecord> load_prediction_log(std::istream& in, std::string_view source_name) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    try {
      const json obj = json::parse(line);
      PredictionRecord r;
      r.caption_record_id = obj.at("caption_record_id").get<std::string>();
      r.triple_id = obj.at("triple_id").get<std::string>();
      auto v = variant_from_string(obj.at("variant").get<std::string>());
      if (!v) throw LoadError(where + "unknown variant");
      r.variant = *v;
      r.involution_ok = obj.value("involution_ok", true);
      r.model_name = obj.at("model_name").get<std::string>();
      auto s = strategy_from_string(obj.at("strategy").get<std::string>());
      if (!s) throw LoadError(where + "unknown strategy");
      r.strategy = *s;
      r.raw_output = obj.at("raw_output").get<std::string>();
      for (const auto& item : obj.at("parsed")) {
        auto label = normalize_label(item.get<std::string>());
        if (!label) throw LoadError(where + "non-canonical parsed label '" + item.get<std::string>() + "'");
        r.parsed.insert(*label);
      }
      r.cached = obj.value("cached", false);
      r.request_fingerprint = obj.value("request_fingerprint", "");
      r.served_model = obj.value("served_model", "");
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw LoadError(where + e.what());
    }
  }
  return out;
}

std::vector<PredictionRecord> load_prediction_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open prediction log " + path.string());
  return load_prediction_log(in, path.filename().string());
}

}  // namespace emobias
