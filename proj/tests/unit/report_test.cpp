#include "emobias/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "emobias/error.hpp"
#include "emobias/hashing.hpp"

namespace emobias {
namespace {

// n triples where emotion e appears for a man-variant and b woman-variant
// captions; undefined variants mirror the man ones.
std::vector<PredictionRecord> make_log(const std::string& model, Strategy s, std::size_t n,
                                       const std::map<Emotion, std::pair<std::size_t, std::size_t>>& counts) {
  std::vector<PredictionRecord> log;
  for (std::size_t t = 0; t < n; ++t) {
    const std::string id = "t" + std::to_string(t);
    for (auto v : {GenderVariant::Man, GenderVariant::Woman, GenderVariant::Undefined}) {
      PredictionRecord p;
      p.triple_id = id;
      p.caption_record_id = v == GenderVariant::Man ? id : id + "~" + std::string(to_string(v));
      p.variant = v;
      p.model_name = model;
      p.strategy = s;
      for (const auto& [e, ab] : counts) {
        const std::size_t limit = v == GenderVariant::Woman ? ab.second : ab.first;
        if (t < limit) p.parsed.insert(e);
      }
      p.raw_output = p.parsed.to_string();
      log.push_back(p);
    }
  }
  return log;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(Evaluate, OneColumnPerModelAndStrategy) {
  auto log = make_log("m1", Strategy::ZeroShot, 100, {{Emotion::Happiness, {40, 60}}});
  auto more = make_log("m2", Strategy::ZeroShot, 100, {{Emotion::Peace, {10, 10}}});
  log.insert(log.end(), more.begin(), more.end());
  const auto report = evaluate(log);
  ASSERT_EQ(report.columns.size(), 2u);
  EXPECT_EQ(report.columns[0].model, "m1");
  EXPECT_EQ(report.columns[0].triples, 100u);
  EXPECT_EQ(report.columns[0].predictions, 300u);
  EXPECT_EQ(report.columns[0].original_man, 100u);
  const auto& h = report.columns[0].results[index_of(Emotion::Happiness)];
  EXPECT_EQ(h, chi_square({40, 60, 100}));
  EXPECT_FALSE(report.columns[0].results[index_of(Emotion::Peace)].computable);
  EXPECT_EQ(report.manifest.at("correction"), "yates");
  EXPECT_FALSE(evaluate(log, {false, std::nullopt}).columns[0].results[0].yates);
}

TEST(Evaluate, EmptyLogIsError) { EXPECT_THROW(evaluate({}), DataError); }

TEST(Evaluate, ReparseUsesRawOutput) {
  auto log = make_log("m", Strategy::ZeroShot, 10, {{Emotion::Happiness, {5, 5}}});
  for (auto& p : log) p.parsed = {};
  EXPECT_FALSE(evaluate(log).columns[0].results[index_of(Emotion::Happiness)].computable);
  EXPECT_TRUE(evaluate(log, {true, ParseMode::List}).columns[0].results[index_of(Emotion::Happiness)].computable);
}

TEST(RenderTable, CsvShapeAndMarkers) {
  const auto report = evaluate(make_log("m1", Strategy::ZeroShot, 100, {{Emotion::Happiness, {40, 60}}, {Emotion::Pain, {5, 5}}}));
  const auto csv = lines(render_table(report, TableFormat::Csv));
  std::vector<std::string> body;
  for (const auto& l : csv) {
    if (!l.starts_with("#")) body.push_back(l);
  }
  ASSERT_EQ(body.size(), 27u);
  EXPECT_EQ(body[0], "emotion,m1 chi2,m1 p");
  EXPECT_EQ(body[1], "suffering,-,-");
  EXPECT_EQ(body[2], "pain,0.00,1.00");
  // 200 * (|40*40 - 60*60| - 100)^2 / 100^4 = 7.22, erfc(1.9) = 0.0072
  EXPECT_EQ(body[1 + index_of(Emotion::Happiness)], "happiness,7.22,0.01");
}

TEST(RenderTable, ManifestHeaderInHumanFormats) {
  auto report = evaluate(make_log("m1", Strategy::ZeroShot, 20, {{Emotion::Pain, {5, 5}}}));
  report.manifest["lexicon"] = "builtin-v1+abc";
  EXPECT_NE(render_table(report, TableFormat::Csv).find("# lexicon: builtin-v1+abc\n"), std::string::npos);
  EXPECT_NE(render_table(report, TableFormat::Tsv).find("# correction: yates\n"), std::string::npos);
  const auto md = render_table(report, TableFormat::Markdown);
  EXPECT_TRUE(md.starts_with("<!--\n"));
  EXPECT_LT(md.find("lexicon: builtin-v1+abc\n"), md.find("-->\n\n|"));
}

TEST(RenderTable, MarkdownBoldsSignificantPairs) {
  const auto report = evaluate(make_log("m", Strategy::ZeroShot, 100,
                                        {{Emotion::Happiness, {40, 60}}, {Emotion::Peace, {40, 45}}}));
  const auto md = render_table(report, TableFormat::Markdown);
  EXPECT_NE(md.find("| happiness | **7.22** | **0.01** |"), std::string::npos);
  EXPECT_NE(md.find("| peace | 0.33 | 0.57 |"), std::string::npos);
  EXPECT_NE(md.find("| suffering | - | - |"), std::string::npos);
  EXPECT_NE(md.find("|---|---:|---:|"), std::string::npos);
  RenderOptions strict;
  strict.significance = 0.001;
  EXPECT_EQ(render_table(report, TableFormat::Markdown, strict).find("**"), std::string::npos);
}

TEST(RenderTable, ColumnLabels) {
  auto log = make_log("m", Strategy::ZeroShot, 10, {});
  auto cot = make_log("m", Strategy::CoT, 10, {});
  log.insert(log.end(), cot.begin(), cot.end());
  EXPECT_NE(render_table(evaluate(log), TableFormat::Tsv).find("emotion\tzero-shot chi2\tzero-shot p\tcot chi2\tcot p"),
            std::string::npos);
  auto other = make_log("x", Strategy::InContext, 10, {});
  log.insert(log.end(), other.begin(), other.end());
  EXPECT_NE(render_table(evaluate(log), TableFormat::Csv).find("x / in-context chi2"), std::string::npos);
}

TEST(RenderTable, MachineRoundTrips) {
  auto log = make_log("m1", Strategy::ZeroShot, 100, {{Emotion::Happiness, {40, 60}}, {Emotion::Pain, {3, 9}}});
  auto more = make_log("m, \"2\"", Strategy::CoT, 50, {{Emotion::Sympathy, {50, 50}}});
  log.insert(log.end(), more.begin(), more.end());
  auto report = evaluate(log);
  report.manifest["note"] = "line\nbreak";
  const std::string machine = render_table(report, TableFormat::Machine);
  const BiasReport back = parse_machine(machine);
  EXPECT_EQ(back, report);
  EXPECT_EQ(render_table(back, TableFormat::Machine), machine);
  EXPECT_EQ(lines(machine).size(), 1u + 2u * 27u);
}

TEST(ParseMachine, RejectsDamagedInput) {
  const auto report = evaluate(make_log("m", Strategy::ZeroShot, 10, {{Emotion::Pain, {3, 9}}}));
  auto l = lines(render_table(report, TableFormat::Machine));
  EXPECT_THROW(parse_machine("{}"), LoadError);
  std::string missing;
  for (std::size_t i = 0; i + 1 < l.size(); ++i) missing += l[i] + "\n";
  EXPECT_THROW(parse_machine(missing), LoadError);
  std::string tampered;
  for (const auto& x : l) {
    std::string y = x;
    if (y.find("\"total_man\"") != std::string::npos) y.replace(y.find("\"total_man\":") + 12, 1, "9");
    tampered += y + "\n";
  }
  EXPECT_THROW(parse_machine(tampered), LoadError);
}

TEST(RenderTable, Deterministic) {
  const auto log = make_log("m", Strategy::ZeroShot, 100, {{Emotion::Happiness, {40, 60}}});
  for (auto f : {TableFormat::Csv, TableFormat::Tsv, TableFormat::Markdown, TableFormat::Machine}) {
    EXPECT_EQ(render_table(evaluate(log), f), render_table(evaluate(log), f));
  }
}

TEST(RenderTotals, CountsPerVariant) {
  const auto report = evaluate(make_log("m", Strategy::ZeroShot, 100, {{Emotion::Happiness, {40, 60}}, {Emotion::Pain, {10, 0}}}));
  const auto csv = render_totals(report, TableFormat::Csv);
  EXPECT_NE(csv.find("model,woman,man,undefined\nm,60,50,50\n"), std::string::npos);
  EXPECT_EQ(render_totals(report, TableFormat::Machine),
            "{\"kind\":\"totals\",\"model\":\"m\",\"strategy\":\"zero-shot\",\"woman\":60,\"man\":50,\"undefined\":50}\n");
}

TEST(Distribution, SymmetricSharesAreThirds) {
  const auto report = evaluate(make_log("m", Strategy::ZeroShot, 30, {{Emotion::Peace, {10, 10}}}));
  const std::string csv = render_distribution_csv(report.columns[0]);
  EXPECT_NE(csv.find("peace,0.333333,0.333333,0.333333\n"), std::string::npos);
  EXPECT_NE(csv.find("pain,-,-,-\n"), std::string::npos);
  const std::string svg = render_distribution_svg(report.columns[0]);
  EXPECT_TRUE(svg.starts_with("<svg "));
  EXPECT_TRUE(svg.ends_with("</svg>\n"));
  EXPECT_EQ(svg, render_distribution_svg(report.columns[0]));
  // Three bars for the one predicted emotion, plus three legend swatches.
  std::size_t bars = 0;
  for (std::size_t pos = 0; (pos = svg.find("<rect x=", pos)) != std::string::npos; ++pos) ++bars;
  EXPECT_EQ(bars, 6u);
}

TEST(Distribution, SharesSumToOne) {
  const auto report = evaluate(make_log("m", Strategy::ZeroShot, 100,
                                        {{Emotion::Happiness, {40, 60}}, {Emotion::Pain, {7, 1}}}));
  for (const auto& s : report.columns[0].shares) {
    if (!s) continue;
    EXPECT_NEAR((*s)[0] + (*s)[1] + (*s)[2], 1.0, 1e-12);
  }
  const auto& h = *report.columns[0].shares[index_of(Emotion::Happiness)];
  EXPECT_GT(h[1], h[0]);
}

TEST(Distribution, WritesFiles) {
  const auto report = evaluate(make_log("m", Strategy::ZeroShot, 10, {{Emotion::Peace, {1, 2}}}));
  const auto dir = std::filesystem::temp_directory_path() / ("emobias-plot-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  render_distribution_plot(report, 0, dir / "p.svg", dir / "p.csv");
  EXPECT_TRUE(std::filesystem::file_size(dir / "p.svg") > 100);
  EXPECT_THROW(render_distribution_plot(report, 3, dir / "q.svg", dir / "q.csv"), DomainError);
  std::filesystem::remove_all(dir);
}

TEST(TableFormat, Names) {
  EXPECT_EQ(table_format_from_string("md"), TableFormat::Markdown);
  EXPECT_EQ(table_format_from_string("machine"), TableFormat::Machine);
  EXPECT_EQ(table_format_from_string("xls"), std::nullopt);
}

}  // namespace
}  // namespace emobias
