#include "emobias/report.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "emobias/error.hpp"
#include "json.hpp"

namespace emobias {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array<GenderVariant, kVariantCount> kVariants = {
    GenderVariant::Man, GenderVariant::Woman, GenderVariant::Undefined};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string md_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string manifest_block(const BiasReport& report, TableFormat format) {
  std::string out;
  if (format == TableFormat::Markdown) out += "<!--\n";
  for (const auto& [k, v] : report.manifest) {
    out += format == TableFormat::Markdown ? "" : "# ";
    out += one_line(k) + ": " + one_line(v) + "\n";
  }
  if (format == TableFormat::Markdown) out += "-->\n\n";
  return out;
}

// Writes rows of cells in the requested human-readable format.
class TableWriter {
 public:
  explicit TableWriter(TableFormat format) : format_(format) {}

  void row(const std::vector<std::string>& cells) {
    switch (format_) {
      case TableFormat::Csv:
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i) out_ += ',';
          out_ += csv_field(cells[i]);
        }
        break;
      case TableFormat::Tsv:
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i) out_ += '\t';
          out_ += one_line(cells[i]);
        }
        break;
      default:
        out_ += '|';
        for (const auto& c : cells) out_ += ' ' + md_field(c) + " |";
        if (!header_done_) {
          out_ += "\n|";
          for (std::size_t i = 0; i < cells.size(); ++i) out_ += i == 0 ? "---|" : "---:|";
        }
        break;
    }
    header_done_ = true;
    out_ += '\n';
  }

  std::string str() && { return std::move(out_); }

 private:
  TableFormat format_;
  std::string out_;
  bool header_done_ = false;
};

std::vector<std::string> column_labels(const BiasReport& report) {
  bool one_strategy = true;
  bool one_model = true;
  for (const auto& c : report.columns) {
    one_strategy = one_strategy && c.strategy == report.columns.front().strategy;
    one_model = one_model && c.model == report.columns.front().model;
  }
  std::vector<std::string> out;
  for (const auto& c : report.columns) {
    if (one_strategy) {
      out.push_back(c.model);
    } else if (one_model) {
      out.emplace_back(to_string(c.strategy));
    } else {
      out.push_back(c.label());
    }
  }
  return out;
}

json emotion_record(const ReportColumn& c, Emotion e) {
  const std::size_t i = index_of(e);
  const auto& t = c.tables[i];
  const auto& r = c.results[i];
  json obj;
  obj["kind"] = "emotion";
  obj["model"] = c.model;
  obj["strategy"] = std::string(to_string(c.strategy));
  obj["emotion"] = std::string(name(e));
  obj["a"] = t.a;
  obj["b"] = t.b;
  obj["n"] = t.n;
  obj["computable"] = r.computable;
  obj["yates"] = r.yates;
  obj["chi2"] = r.computable ? json(r.chi2) : json(nullptr);
  obj["p"] = r.computable ? json(r.p) : json(nullptr);
  obj["count_man"] = c.frequencies.counts[i][0];
  obj["count_woman"] = c.frequencies.counts[i][1];
  obj["count_undefined"] = c.frequencies.counts[i][2];
  return obj;
}

}  // namespace

std::string ReportColumn::label() const { return model + " / " + std::string(to_string(strategy)); }

BiasReport evaluate(std::span<const PredictionRecord> predictions, const EvaluateOptions& options) {
  if (predictions.empty()) throw DataError("prediction log is empty");

  std::vector<std::pair<std::string, Strategy>> keys;
  std::vector<std::vector<PredictionRecord>> groups;
  for (const auto& p : predictions) {
    std::size_t g = 0;
    while (g < keys.size() && !(keys[g].first == p.model_name && keys[g].second == p.strategy)) ++g;
    if (g == keys.size()) {
      keys.emplace_back(p.model_name, p.strategy);
      groups.emplace_back();
    }
    groups[g].push_back(p);
    if (options.reparse) groups[g].back().parsed = parse_labels(p.raw_output, *options.reparse);
  }

  BiasReport report;
  report.manifest["correction"] = options.yates ? "yates" : "none";
  report.manifest["labels"] =
      options.reparse ? "reparsed (" + std::string(to_string(*options.reparse)) + ")" : "as logged";
  report.manifest["significance_test"] = "pearson chi-square, 2x2 presence by man/woman, df=1";

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto aligned = align(groups[g]);
    ReportColumn c;
    c.model = keys[g].first;
    c.strategy = keys[g].second;
    c.triples = aligned.man.size();
    c.predictions = groups[g].size();
    c.flagged_triples = aligned.flagged_triples;
    c.original_man = aligned.original_man;
    c.original_woman = aligned.original_woman;
    c.tables = contingency_all(aligned);
    const auto results = chi_square_batch(c.tables, options.yates);
    std::copy(results.begin(), results.end(), c.results.begin());
    c.frequencies = frequency_table(groups[g]);
    c.shares = normalize_per_emotion(c.frequencies);
    report.columns.push_back(std::move(c));
  }
  return report;
}

std::string_view to_string(TableFormat f) noexcept {
  switch (f) {
    case TableFormat::Csv: return "csv";
    case TableFormat::Tsv: return "tsv";
    case TableFormat::Markdown: return "markdown";
    case TableFormat::Machine: return "machine";
  }
  return "csv";
}

std::optional<TableFormat> table_format_from_string(std::string_view s) {
  for (auto f : {TableFormat::Csv, TableFormat::Tsv, TableFormat::Markdown, TableFormat::Machine}) {
    if (s == to_string(f)) return f;
  }
  if (s == "md") return TableFormat::Markdown;
  return std::nullopt;
}

std::string render_table(const BiasReport& report, TableFormat format, const RenderOptions& options) {
  if (format == TableFormat::Machine) {
    std::string out;
    json head;
    head["kind"] = "manifest";
    head["manifest"] = report.manifest;
    out += head.dump() + '\n';
    for (const auto& c : report.columns) {
      json col;
      col["kind"] = "column";
      col["model"] = c.model;
      col["strategy"] = std::string(to_string(c.strategy));
      col["triples"] = c.triples;
      col["predictions"] = c.predictions;
      col["flagged_triples"] = c.flagged_triples;
      col["original_man"] = c.original_man;
      col["original_woman"] = c.original_woman;
      col["total_man"] = c.frequencies.totals[0];
      col["total_woman"] = c.frequencies.totals[1];
      col["total_undefined"] = c.frequencies.totals[2];
      out += col.dump() + '\n';
      for (Emotion e : canonical_labels()) out += emotion_record(c, e).dump() + '\n';
    }
    return out;
  }

  std::string out = manifest_block(report, format);
  TableWriter w(format);
  std::vector<std::string> header = {"emotion"};
  for (const auto& l : column_labels(report)) {
    header.push_back(l + " chi2");
    header.push_back(l + " p");
  }
  w.row(header);
  for (Emotion e : canonical_labels()) {
    std::vector<std::string> cells = {std::string(name(e))};
    for (const auto& c : report.columns) {
      const auto& r = c.results[index_of(e)];
      if (!r.computable) {
        cells.emplace_back("-");
        cells.emplace_back("-");
        continue;
      }
      std::string chi2 = fmt::format("{:.2f}", r.chi2);
      std::string p = fmt::format("{:.2f}", r.p);
      if (format == TableFormat::Markdown && r.p <= options.significance) {
        chi2 = "**" + chi2 + "**";
        p = "**" + p + "**";
      }
      cells.push_back(std::move(chi2));
      cells.push_back(std::move(p));
    }
    w.row(cells);
  }
  return out + std::move(w).str();
}

std::string render_totals(const BiasReport& report, TableFormat format) {
  if (format == TableFormat::Machine) {
    std::string out;
    for (const auto& c : report.columns) {
      json row;
      row["kind"] = "totals";
      row["model"] = c.model;
      row["strategy"] = std::string(to_string(c.strategy));
      row["woman"] = c.frequencies.total(GenderVariant::Woman);
      row["man"] = c.frequencies.total(GenderVariant::Man);
      row["undefined"] = c.frequencies.total(GenderVariant::Undefined);
      out += row.dump() + '\n';
    }
    return out;
  }
  std::string out = manifest_block(report, format);
  TableWriter w(format);
  w.row({"model", "woman", "man", "undefined"});
  const auto labels = column_labels(report);
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    const auto& f = report.columns[i].frequencies;
    w.row({labels[i], std::to_string(f.total(GenderVariant::Woman)),
           std::to_string(f.total(GenderVariant::Man)),
           std::to_string(f.total(GenderVariant::Undefined))});
  }
  return out + std::move(w).str();
}

BiasReport parse_machine(std::string_view text) {
  BiasReport report;
  std::vector<std::array<bool, kEmotionCount>> seen;
  std::vector<std::array<std::uint64_t, kVariantCount>> declared_totals;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_manifest = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "report line " + std::to_string(line_no) + ": ";
    try {
      const json obj = json::parse(line);
      const std::string kind = obj.at("kind").get<std::string>();
      if (kind == "manifest") {
        if (have_manifest) throw LoadError(where + "second manifest");
        have_manifest = true;
        report.manifest = obj.at("manifest").get<std::map<std::string, std::string>>();
      } else if (kind == "column") {
        ReportColumn c;
        c.model = obj.at("model").get<std::string>();
        auto s = strategy_from_string(obj.at("strategy").get<std::string>());
        if (!s) throw LoadError(where + "unknown strategy");
        c.strategy = *s;
        c.triples = obj.at("triples").get<std::size_t>();
        c.predictions = obj.at("predictions").get<std::size_t>();
        c.flagged_triples = obj.at("flagged_triples").get<std::size_t>();
        c.original_man = obj.at("original_man").get<std::size_t>();
        c.original_woman = obj.at("original_woman").get<std::size_t>();
        declared_totals.push_back({obj.at("total_man").get<std::uint64_t>(),
                                   obj.at("total_woman").get<std::uint64_t>(),
                                   obj.at("total_undefined").get<std::uint64_t>()});
        report.columns.push_back(std::move(c));
        seen.emplace_back();
      } else if (kind == "emotion") {
        if (report.columns.empty()) throw LoadError(where + "emotion record before any column");
        auto& c = report.columns.back();
        if (obj.at("model").get<std::string>() != c.model ||
            obj.at("strategy").get<std::string>() != to_string(c.strategy)) {
          throw LoadError(where + "emotion record does not belong to the preceding column");
        }
        auto e = normalize_label(obj.at("emotion").get<std::string>());
        if (!e) throw LoadError(where + "unknown emotion");
        const std::size_t i = index_of(*e);
        if (seen.back()[i]) throw LoadError(where + "duplicate emotion");
        seen.back()[i] = true;
        c.tables[i] = {obj.at("a").get<std::uint64_t>(), obj.at("b").get<std::uint64_t>(),
                       obj.at("n").get<std::uint64_t>()};
        ChiSquareResult r;
        r.computable = obj.at("computable").get<bool>();
        r.yates = obj.at("yates").get<bool>();
        if (r.computable) {
          r.chi2 = obj.at("chi2").get<double>();
          r.p = obj.at("p").get<double>();
        }
        c.results[i] = r;
        c.frequencies.counts[i] = {obj.at("count_man").get<std::uint64_t>(),
                                   obj.at("count_woman").get<std::uint64_t>(),
                                   obj.at("count_undefined").get<std::uint64_t>()};
      } else {
        throw LoadError(where + "unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(where + e.what());
    }
  }
  if (!have_manifest) throw LoadError("report has no manifest record");
  for (std::size_t k = 0; k < report.columns.size(); ++k) {
    auto& c = report.columns[k];
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      if (!seen[k][i]) {
        throw LoadError("report column " + c.label() + " lacks emotion " +
                        std::string(name(canonical_labels()[i])));
      }
      for (std::size_t v = 0; v < kVariantCount; ++v) c.frequencies.totals[v] += c.frequencies.counts[i][v];
    }
    if (c.frequencies.totals != declared_totals[k]) {
      throw LoadError("report column " + c.label() + ": totals disagree with per-emotion counts");
    }
    c.shares = normalize_per_emotion(c.frequencies);
  }
  return report;
}

BiasReport load_machine(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_machine(buf.str());
}

std::string render_distribution_svg(const ReportColumn& column) {
  constexpr double kLeft = 56, kTop = 40, kPlotH = 240, kGroupW = 36, kBarW = 10, kBottom = 110;
  constexpr std::array<std::string_view, kVariantCount> kColors = {"#1f77b4", "#ff7f0e", "#2ca02c"};
  const double plot_w = kGroupW * kEmotionCount;
  const double width = kLeft + plot_w + 24;
  const double height = kTop + kPlotH + kBottom;
  const double base_y = kTop + kPlotH;

  std::string out;
  auto add = [&out](std::string s) { out += s; out += '\n'; };
  add(fmt::format(R"svg(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}" font-family="sans-serif" font-size="11">)svg",
                  width, height, width, height));
  add(fmt::format(R"svg(<rect width="{:.0f}" height="{:.0f}" fill="white"/>)svg", width, height));
  add(fmt::format(R"svg(<text x="{:.1f}" y="20" font-size="13" text-anchor="middle">{}</text>)svg",
                  kLeft + plot_w / 2, xml_escape(column.label())));
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = base_y - kPlotH * tick / 4.0;
    add(fmt::format(R"svg(<line x1="{:.1f}" y1="{:.2f}" x2="{:.1f}" y2="{:.2f}" stroke="#dddddd"/>)svg",
                    kLeft, y, kLeft + plot_w, y));
    add(fmt::format(R"svg(<text x="{:.1f}" y="{:.2f}" text-anchor="end">{:.2f}</text>)svg", kLeft - 6, y + 4,
                    tick / 4.0));
  }
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    const double gx = kLeft + kGroupW * static_cast<double>(i);
    if (const auto& s = column.shares[i]) {
      for (std::size_t v = 0; v < kVariantCount; ++v) {
        const double h = kPlotH * (*s)[v];
        add(fmt::format(R"svg(<rect x="{:.2f}" y="{:.2f}" width="{:.0f}" height="{:.2f}" fill="{}"/>)svg",
                        gx + 3 + kBarW * static_cast<double>(v), base_y - h, kBarW, h, kColors[v]));
      }
    }
    const double lx = gx + kGroupW / 2;
    add(fmt::format(R"svg(<text x="{:.2f}" y="{:.2f}" text-anchor="end" transform="rotate(-60 {:.2f} {:.2f})">{}</text>)svg",
                    lx, base_y + 12, lx, base_y + 12, xml_escape(name(canonical_labels()[i]))));
  }
  add(fmt::format(R"svg(<line x1="{:.1f}" y1="{:.2f}" x2="{:.1f}" y2="{:.2f}" stroke="black"/>)svg", kLeft, base_y,
                  kLeft + plot_w, base_y));
  for (std::size_t v = 0; v < kVariantCount; ++v) {
    const double x = kLeft + plot_w - 240 + 80 * static_cast<double>(v);
    add(fmt::format(R"svg(<rect x="{:.1f}" y="28" width="10" height="10" fill="{}"/>)svg", x, kColors[v]));
    add(fmt::format(R"svg(<text x="{:.1f}" y="37">{}</text>)svg", x + 14, to_string(kVariants[v])));
  }
  add("</svg>");
  return out;
}

std::string render_distribution_csv(const ReportColumn& column) {
  std::string out = "emotion,man,woman,undefined\n";
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    out += name(canonical_labels()[i]);
    if (const auto& s = column.shares[i]) {
      out += fmt::format(",{:.6f},{:.6f},{:.6f}\n", (*s)[0], (*s)[1], (*s)[2]);
    } else {
      out += ",-,-,-\n";
    }
  }
  return out;
}

void render_distribution_plot(const BiasReport& report, std::size_t column,
                              const std::filesystem::path& svg_path,
                              const std::filesystem::path& csv_path) {
  if (column >= report.columns.size()) throw DomainError("render_distribution_plot: no such column");
  const auto& c = report.columns[column];
  for (const auto& [path, body] : {std::pair{svg_path, render_distribution_svg(c)},
                                   std::pair{csv_path, render_distribution_csv(c)}}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error("cannot write " + path.string());
  }
}

}  // namespace emobias
