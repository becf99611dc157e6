#include "emobias/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "emobias/corpus.hpp"
#include "emobias/error.hpp"
#include "emobias/hashing.hpp"
#include "emobias/llm_client.hpp"
#include "emobias/mock_llm.hpp"
#include "emobias/report.hpp"
#include "json.hpp"

namespace emobias {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr std::string_view kToolVersion = "0.1.0";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw ConfigError("cannot write " + path.string());
}

// Fails early (before any expensive work) when the output cannot be created.
void check_writable(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream probe(path, std::ios::binary | std::ios::app);
  if (!probe) throw ConfigError("cannot write " + path.string());
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

json base_manifest(std::string_view command) {
  json m;
  m["tool"] = "emobias";
  m["tool_version"] = std::string(kToolVersion);
  m["command"] = std::string(command);
  return m;
}

void write_manifest(const fs::path& output, const json& manifest) {
  write_file(manifest_path(output), manifest.dump(2) + "\n");
}

std::optional<json> read_manifest(const fs::path& output) {
  const fs::path p = manifest_path(output);
  if (!fs::exists(p)) return std::nullopt;
  try {
    return json::parse(read_file(p));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

json file_entry(const fs::path& path) {
  return json{{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}};
}

const Lexicon& lexicon_for(const std::string& path, std::optional<Lexicon>& storage) {
  if (path.empty()) return Lexicon::builtin();
  storage = Lexicon::load(path);
  return *storage;
}

// Writes to `path`, or to `out` when path is "-".
void emit(const std::string& path, std::string_view body, std::ostream& out) {
  if (path == "-") {
    out << body;
  } else {
    write_file(path, body);
  }
}

template <typename Enum>
std::vector<std::string> names_of(std::initializer_list<Enum> values) {
  std::vector<std::string> out;
  for (Enum v : values) out.emplace_back(to_string(v));
  return out;
}

struct AugmentArgs {
  std::string corpus, lexicon, out, skip_report;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  bool strict = false;
};

struct QueryArgs {
  std::string corpus, lexicon, model, base_url = "http://127.0.0.1:8080/v1", api_key_env;
  std::string strategy = "zero-shot";
  std::string parse_mode;
  std::string placement = "after-instruction";
  std::size_t parallelism = 4;
  std::string cache_dir = ".emobias-cache";
  std::string out;
  int max_attempts = 5;
  double timeout = 120.0;
  long initial_backoff_ms = 1000;
  long max_backoff_ms = 60000;
  double rpm = 0.0;
  int max_new_tokens = 0;
};

struct EvaluateArgs {
  std::vector<std::string> logs;
  std::string out, reparse;
  bool no_yates = false;
};

struct ReportArgs {
  std::string report, out = "-", totals, plot_dir;
  std::string format = "markdown";
  double significance = 0.05;
};

struct ExportArgs {
  std::string corpus, lexicon, out;
  std::vector<std::string> exclude;
  std::size_t triples = 100;
  std::uint64_t seed = 0;
};

struct MockArgs {
  std::string spec, lexicon, host = "127.0.0.1";
  double base_rate = 0.1;
  std::uint64_t seed = 0;
  std::string style = "list";
  int port = 8080;
};

struct DumpArgs {
  std::string lexicon, out = "-", out_dir;
  std::string placement = "after-instruction";
};

int cmd_augment(const AugmentArgs& a, std::ostream& out) {
  std::optional<Lexicon> storage;
  const Lexicon& lexicon = lexicon_for(a.lexicon, storage);
  check_writable(a.out);
  const auto raw = load_corpus(fs::path(a.corpus), lexicon);
  auto result = augment_all(raw, lexicon, a.strict);
  std::vector<CaptionRecord> records = std::move(result.records);
  const std::size_t available = triple_ids(records).size();
  if (a.sample > 0) records = sample(records, a.sample, a.seed);

  std::ostringstream body;
  write_corpus(body, records, CorpusFormat::Augmented);
  write_file(a.out, body.str());

  const std::string skip_path = a.skip_report.empty() ? a.out + ".skipped.tsv" : a.skip_report;
  std::string skips = "record_id\tdetected\n";
  for (const auto& s : result.skipped) skips += s.record_id + "\t" + std::string(to_string(s.detected)) + "\n";
  write_file(skip_path, skips);

  std::size_t flagged = 0;
  for (const auto& r : records) flagged += (!r.involution_ok && r.triple_id == r.record_id) ? 1 : 0;
  const std::size_t triples = triple_ids(records).size();

  json m = base_manifest("augment");
  m["corpus"] = file_entry(a.corpus);
  m["lexicon_version"] = lexicon.version();
  m["strict"] = a.strict;
  m["sample"] = a.sample;
  m["sample_seed"] = a.seed;
  m["input_records"] = raw.size();
  m["skipped_records"] = result.skipped.size();
  m["available_triples"] = available;
  m["triples"] = triples;
  m["records"] = records.size();
  m["involution_flagged_triples"] = flagged;
  m["output"] = file_entry(a.out);
  write_manifest(a.out, m);

  out << "triples: " << triples << ", records: " << records.size()
      << ", skipped captions: " << result.skipped.size()
      << ", involution-flagged triples: " << flagged << "\n";
  if (!result.skipped.empty()) out << "skip report: " << skip_path << "\n";
  return kExitOk;
}

int cmd_query(const QueryArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<Lexicon> storage;
  const Lexicon& lexicon = lexicon_for(a.lexicon, storage);
  const Strategy strategy = *strategy_from_string(a.strategy);
  const DebiasPlacement placement = *debias_placement_from_string(a.placement);
  std::optional<ParseMode> mode;
  if (!a.parse_mode.empty()) mode = parse_mode_from_string(a.parse_mode);

  const auto records = load_corpus(fs::path(a.corpus), lexicon);
  for (const auto& r : records) {
    if (!r.variant) throw DataError("record '" + r.record_id + "' has no gender variant; run augment first");
  }
  check_writable(a.out);

  ModelConfig cfg;
  cfg.name = a.model;
  cfg.base_url = a.base_url;
  cfg.api_key_env = a.api_key_env;
  if (a.max_new_tokens > 0) cfg.max_new_tokens = a.max_new_tokens;
  cfg.timeout_seconds = a.timeout;
  cfg.max_attempts = a.max_attempts;
  cfg.initial_backoff = std::chrono::milliseconds(a.initial_backoff_ms);
  cfg.max_backoff = std::chrono::milliseconds(a.max_backoff_ms);
  cfg.requests_per_minute = a.rpm;
  ChatClient client(cfg);
  ResponseCache cache(a.cache_dir);

  BatchOptions opts;
  opts.parallelism = a.parallelism;
  opts.parse_mode = mode;
  opts.prompt_options.debias_placement = placement;
  const BatchResult result = run_batch(records, strategy, client, cache, opts);

  std::ostringstream body;
  write_prediction_log(body, result.predictions);
  write_file(a.out, body.str());

  std::size_t cached = 0;
  for (const auto& p : result.predictions) cached += p.cached ? 1 : 0;

  json m = base_manifest("query");
  m["corpus"] = file_entry(a.corpus);
  if (auto cm = read_manifest(a.corpus); cm && cm->contains("sample_seed")) {
    m["sample_seed"] = (*cm)["sample_seed"];
  }
  m["lexicon_version"] = lexicon.version();
  m["model"] = a.model;
  m["base_url"] = a.base_url;
  m["api_key_env"] = a.api_key_env;
  m["served_models"] = result.served_models;
  m["strategy"] = a.strategy;
  m["parse_mode"] = std::string(to_string(mode.value_or(default_parse_mode(strategy))));
  m["debias_placement"] = a.placement;
  m["template_version"] = std::string(kTemplateVersion);
  m["template_hash"] = template_version_hash(opts.prompt_options);
  m["decoding"] = client.decoding_summary();
  m["message_shape"] = "single user message";
  m["parallelism"] = a.parallelism;
  m["cache_dir"] = a.cache_dir;
  m["requests"] = records.size();
  m["completed"] = result.predictions.size();
  m["cached"] = cached;
  m["failed"] = result.failures.size();
  m["network_requests"] = client.network_requests();
  m["output"] = file_entry(a.out);
  write_manifest(a.out, m);

  out << "completed " << result.predictions.size() << "/" << records.size() << " (" << cached
      << " from cache, " << client.network_requests() << " HTTP requests)\n";
  if (!result.complete()) {
    for (const auto& f : result.failures) {
      err << "failed: " << f.caption_record_id << " [" << f.fingerprint.substr(0, 12) << "]: " << f.message << "\n";
    }
    err << result.failures.size() << " of " << records.size()
        << " requests failed; rerun the same command to resume from the cache\n";
    return kExitIncomplete;
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  std::vector<PredictionRecord> all;
  for (const auto& log : a.logs) {
    auto part = load_prediction_log(fs::path(log));
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  check_writable(a.out);
  EvaluateOptions opts;
  opts.yates = !a.no_yates;
  if (!a.reparse.empty()) opts.reparse = parse_mode_from_string(a.reparse);
  BiasReport report = evaluate(all, opts);

  // Provenance of each column, copied from the query manifests.
  for (std::size_t i = 0; i < a.logs.size(); ++i) {
    const std::string prefix = "log" + std::to_string(i + 1) + ".";
    report.manifest[prefix + "file"] = fs::path(a.logs[i]).filename().string();
    report.manifest[prefix + "sha256"] = sha256_hex(read_file(a.logs[i]));
    if (auto qm = read_manifest(a.logs[i])) {
      for (const char* key : {"model", "strategy", "served_models", "decoding", "parse_mode",
                              "debias_placement", "template_hash", "lexicon_version", "sample_seed"}) {
        if (!qm->contains(key)) continue;
        const json& v = (*qm)[key];
        report.manifest[prefix + key] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      if (qm->contains("corpus")) report.manifest[prefix + "corpus_sha256"] = (*qm)["corpus"].value("sha256", "");
    }
  }
  for (const auto& c : report.columns) {
    report.manifest["column." + c.label() + ".flagged_triples"] = std::to_string(c.flagged_triples);
    report.manifest["column." + c.label() + ".original_man_woman"] =
        std::to_string(c.original_man) + ":" + std::to_string(c.original_woman);
  }

  write_file(a.out, render_table(report, TableFormat::Machine));
  json m = base_manifest("evaluate");
  m["logs"] = json::array();
  for (const auto& log : a.logs) m["logs"].push_back(file_entry(log));
  m["report_manifest"] = report.manifest;
  m["output"] = file_entry(a.out);
  write_manifest(a.out, m);

  for (const auto& c : report.columns) {
    std::size_t significant = 0;
    std::size_t computable = 0;
    for (const auto& r : c.results) {
      computable += r.computable ? 1 : 0;
      significant += (r.computable && r.p < 0.05) ? 1 : 0;
    }
    out << c.label() << ": " << c.triples << " triples, " << computable << " testable emotions, "
        << significant << " with p < 0.05\n";
  }
  return kExitOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const BiasReport report = load_machine(a.report);
  const TableFormat format = *table_format_from_string(a.format);
  RenderOptions ro;
  ro.significance = a.significance;
  emit(a.out, render_table(report, format, ro), out);
  if (!a.totals.empty()) emit(a.totals, render_totals(report, format), out);
  std::vector<std::string> plots;
  if (!a.plot_dir.empty()) {
    fs::create_directories(a.plot_dir);
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
      std::string stem = report.columns[i].model + "_" + std::string(to_string(report.columns[i].strategy));
      std::replace_if(stem.begin(), stem.end(), [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.'; }, '_');
      const fs::path base = fs::path(a.plot_dir) / stem;
      render_distribution_plot(report, i, fs::path(base.string() + ".svg"), fs::path(base.string() + ".csv"));
      plots.push_back(base.string());
    }
  }
  if (a.out != "-") {
    json m = base_manifest("report");
    m["report"] = file_entry(a.report);
    m["format"] = a.format;
    m["significance"] = a.significance;
    m["report_manifest"] = report.manifest;
    if (!a.totals.empty()) m["totals"] = a.totals;
    m["plots"] = plots;
    write_manifest(a.out, m);
  }
  return kExitOk;
}

int cmd_export(const ExportArgs& a, std::ostream& out) {
  std::optional<Lexicon> storage;
  const Lexicon& lexicon = lexicon_for(a.lexicon, storage);
  const auto records = load_corpus(fs::path(a.corpus), lexicon);
  std::set<std::string> exclude;
  for (const auto& path : a.exclude) {
    const auto ids = triple_ids(load_corpus(fs::path(path), lexicon));
    exclude.insert(ids.begin(), ids.end());
  }
  check_writable(a.out);

  std::vector<CaptionRecord> picked;
  try {
    picked = sample(records, a.triples, a.seed, exclude);
  } catch (const DomainError& e) {
    throw DataError(std::string("export-ft: ") + e.what());
  }
  for (const auto& id : triple_ids(picked)) {
    if (exclude.count(id)) throw DataError("export-ft: triple '" + id + "' is in the evaluation sample");
  }
  const auto pairs = export_finetune(picked, a.seed);
  std::ostringstream body;
  write_finetune(body, pairs);
  write_file(a.out, body.str());

  json m = base_manifest("export-ft");
  m["corpus"] = file_entry(a.corpus);
  m["exclude"] = json::array();
  for (const auto& path : a.exclude) m["exclude"].push_back(file_entry(path));
  m["excluded_triples"] = exclude.size();
  m["lexicon_version"] = lexicon.version();
  m["template_hash"] = template_version_hash();
  m["seed"] = a.seed;
  m["triples"] = a.triples;
  m["pairs"] = pairs.size();
  m["output"] = file_entry(a.out);
  write_manifest(a.out, m);
  out << "wrote " << pairs.size() << " pairs from " << a.triples << " triples (" << exclude.size()
      << " excluded)\n";
  return kExitOk;
}

int cmd_mock(const MockArgs& a, std::ostream& out) {
  std::optional<Lexicon> storage;
  const Lexicon& lexicon = lexicon_for(a.lexicon, storage);
  BiasSpec spec = a.spec.empty() ? BiasSpec::uniform(a.base_rate, a.seed) : BiasSpec::load(a.spec);
  if (a.spec.empty()) spec.style = a.style == "cot" ? ResponseStyle::CoT : ResponseStyle::List;

  json m = base_manifest("mock-serve");
  m["spec"] = json::parse(spec.to_json());
  m["lexicon_version"] = lexicon.version();
  m["listen"] = "http://" + a.host + ":" + std::to_string(a.port) + "/v1";
  out << m.dump(2) << "\n" << std::flush;

  MockLlmServer server(std::move(spec), lexicon);
  server.serve_forever(a.port, a.host);
  return kExitOk;
}

int cmd_lexicon_dump(const DumpArgs& a, std::ostream& out) {
  std::optional<Lexicon> storage;
  const Lexicon& lexicon = lexicon_for(a.lexicon, storage);
  emit(a.out, "# lexicon version: " + lexicon.version() + "\n" + lexicon.serialize(), out);
  if (a.out != "-") {
    json m = base_manifest("lexicon-dump");
    m["lexicon_version"] = lexicon.version();
    m["output"] = file_entry(a.out);
    write_manifest(a.out, m);
  }
  return kExitOk;
}

int cmd_templates_dump(const DumpArgs& a, std::ostream& out) {
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  PromptOptions po;
  po.debias_placement = *debias_placement_from_string(a.placement);
  json files = json::object();
  auto put = [&](const std::string& file, const std::string& body) {
    write_file(dir / file, body);
    files[file] = sha256_hex(body);
  };
  for (auto s : {Strategy::ZeroShot, Strategy::PromptEng, Strategy::InContext, Strategy::CoT}) {
    put(std::string(to_string(s)) + ".txt", prompt_template(s, po) + "\n");
  }
  put("gender-question.txt", gender_question_template() + "\n");
  put("labels.txt", labels_resource());

  json m = base_manifest("templates-dump");
  m["template_version"] = std::string(kTemplateVersion);
  m["template_hash"] = template_version_hash(po);
  m["debias_placement"] = a.placement;
  m["files"] = files;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  out << "wrote " << files.size() << " files to " << dir.string() << "\n";
  return kExitOk;
}

int exit_for(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  return kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gender-bias audit for LLM emotion recognition", "emobias"};
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  const auto strategies = names_of({Strategy::ZeroShot, Strategy::PromptEng, Strategy::InContext, Strategy::CoT});
  const auto placements = names_of({DebiasPlacement::AfterInstruction, DebiasPlacement::BeforeCaption});
  const auto formats = names_of({TableFormat::Csv, TableFormat::Tsv, TableFormat::Markdown});
  const auto styles = names_of({ResponseStyle::List, ResponseStyle::CoT});
  const std::vector<std::string> modes = {"list", "scan", "scan-after-marker"};

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Build (original, swapped, neutral) triples from a raw corpus");
  c_aug->add_option("--corpus", aug.corpus, "Raw corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  c_aug->add_option("--lexicon", aug.lexicon, "Lexicon file (default: built-in)")->check(CLI::ExistingFile);
  c_aug->add_option("--out", aug.out, "Augmented corpus to write")->required();
  c_aug->add_option("--sample", aug.sample, "Number of triples to sample (0 = all)");
  c_aug->add_option("--seed", aug.seed, "Sampling seed");
  c_aug->add_flag("--strict", aug.strict, "Drop triples whose swap is not involutive");
  c_aug->add_option("--skip-report", aug.skip_report, "Where to list captions that were skipped");

  QueryArgs q;
  auto* c_query = app.add_subcommand("query", "Ask a model for emotion labels of every caption");
  c_query->add_option("--corpus", q.corpus, "Augmented corpus")->required()->check(CLI::ExistingFile);
  c_query->add_option("--lexicon", q.lexicon, "Lexicon file (default: built-in)")->check(CLI::ExistingFile);
  c_query->add_option("--model", q.model, "Model name sent to the endpoint")->required();
  c_query->add_option("--base-url", q.base_url, "Chat-completions base URL")->envname("EMOBIAS_BASE_URL");
  c_query->add_option("--api-key-env", q.api_key_env, "Environment variable holding the API key");
  c_query->add_option("--strategy", q.strategy, "Prompting strategy")->check(CLI::IsMember(strategies));
  c_query->add_option("--parse-mode", q.parse_mode, "Label parser (default depends on strategy)")->check(CLI::IsMember(modes));
  c_query->add_option("--debias-placement", q.placement, "Where prompt-eng puts its debiasing sentence")
      ->check(CLI::IsMember(placements));
  c_query->add_option("--parallelism", q.parallelism, "Requests in flight")->check(CLI::Range(1, 256));
  c_query->add_option("--cache-dir", q.cache_dir, "Response cache directory")->envname("EMOBIAS_CACHE_DIR");
  c_query->add_option("--out", q.out, "Prediction log to write")->required();
  c_query->add_option("--max-attempts", q.max_attempts, "Attempts per request")->check(CLI::Range(1, 100));
  c_query->add_option("--timeout", q.timeout, "Per-request timeout in seconds");
  c_query->add_option("--initial-backoff-ms", q.initial_backoff_ms, "First retry delay");
  c_query->add_option("--max-backoff-ms", q.max_backoff_ms, "Retry delay cap");
  c_query->add_option("--rpm", q.rpm, "Requests per minute (0 = unlimited)");
  c_query->add_option("--max-new-tokens", q.max_new_tokens, "Override the strategy's token budget");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Chi-square tests and label counts from prediction logs");
  c_eval->add_option("--log", ev.logs, "Prediction log(s)")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "Report to write (machine format)")->required();
  c_eval->add_flag("--no-yates", ev.no_yates, "Disable the continuity correction");
  c_eval->add_option("--reparse", ev.reparse, "Re-derive labels from raw outputs")->check(CLI::IsMember(modes));

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "Render a report as tables and plots");
  c_report->add_option("--report", rep.report, "Report from evaluate")->required()->check(CLI::ExistingFile);
  c_report->add_option("--format", rep.format, "csv, tsv or markdown")->check(CLI::IsMember(formats));
  c_report->add_option("--out", rep.out, "Chi-square table ('-' = stdout)");
  c_report->add_option("--totals", rep.totals, "Label-count table");
  c_report->add_option("--plot-dir", rep.plot_dir, "Directory for per-column SVG plots and share tables");
  c_report->add_option("--significance", rep.significance, "Emphasis threshold for markdown")->check(CLI::Range(0.0, 1.0));

  ExportArgs ex;
  auto* c_export = app.add_subcommand("export-ft", "Write fine-tuning prompt/completion pairs");
  c_export->add_option("--corpus", ex.corpus, "Augmented corpus")->required()->check(CLI::ExistingFile);
  c_export->add_option("--lexicon", ex.lexicon, "Lexicon file (default: built-in)")->check(CLI::ExistingFile);
  c_export->add_option("--out", ex.out, "Dataset to write")->required();
  c_export->add_option("--triples", ex.triples, "Triples to export")->check(CLI::PositiveNumber);
  c_export->add_option("--seed", ex.seed, "Sampling and shuffle seed");
  c_export->add_option("--exclude", ex.exclude, "Corpora whose triples must not be exported")->check(CLI::ExistingFile);

  MockArgs mk;
  auto* c_mock = app.add_subcommand("mock-serve", "Serve a deterministic biased mock model");
  c_mock->add_option("--spec", mk.spec, "Bias spec (JSON)")->check(CLI::ExistingFile);
  c_mock->add_option("--base-rate", mk.base_rate, "Rate for every emotion when no spec is given")->check(CLI::Range(0.0, 1.0));
  c_mock->add_option("--seed", mk.seed, "Seed when no spec is given");
  c_mock->add_option("--style", mk.style, "Response style when no spec is given")->check(CLI::IsMember(styles));
  c_mock->add_option("--port", mk.port, "Port")->check(CLI::Range(1, 65535));
  c_mock->add_option("--host", mk.host, "Bind address");
  c_mock->add_option("--lexicon", mk.lexicon, "Lexicon file (default: built-in)")->check(CLI::ExistingFile);

  DumpArgs ld;
  auto* c_lex = app.add_subcommand("lexicon-dump", "Print the gendered-word lexicon");
  c_lex->add_option("--lexicon", ld.lexicon, "Lexicon file (default: built-in)")->check(CLI::ExistingFile);
  c_lex->add_option("--out", ld.out, "Destination ('-' = stdout)");

  DumpArgs td;
  auto* c_tmpl = app.add_subcommand("templates-dump", "Write prompt templates and the label list");
  c_tmpl->add_option("--out-dir", td.out_dir, "Destination directory")->required();
  c_tmpl->add_option("--debias-placement", td.placement, "Prompt-eng sentence placement")
      ->check(CLI::IsMember(placements));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_aug) return cmd_augment(aug, out);
    if (*c_query) return cmd_query(q, out, err);
    if (*c_eval) return cmd_evaluate(ev, out);
    if (*c_report) return cmd_report(rep, out);
    if (*c_export) return cmd_export(ex, out);
    if (*c_mock) return cmd_mock(mk, out);
    if (*c_lex) return cmd_lexicon_dump(ld, out);
    if (*c_tmpl) return cmd_templates_dump(td, out);
  } catch (const std::exception& e) {
    return exit_for(e, err);
  }
  return kExitUsage;
}

}  // namespace emobias
