#include "emobias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "emobias/error.hpp"

namespace emobias {
namespace {

// erfc for z >= 0, Abramowitz & Stegun 7.1.26 (|error| <= 1.5e-7).
double erfc_approx(double z) {
  constexpr double p = 0.3275911;
  constexpr double a1 = 0.254829592;
  constexpr double a2 = -0.284496736;
  constexpr double a3 = 1.421413741;
  constexpr double a4 = -1.453152027;
  constexpr double a5 = 1.061405429;
  const double t = 1.0 / (1.0 + p * z);
  const double poly = t * (a1 + t * (a2 + t * (a3 + t * (a4 + t * a5))));
  return poly * std::exp(-z * z);
}

constexpr std::size_t slot(GenderVariant v) { return static_cast<std::size_t>(v); }

void count_masks(std::span<const std::uint32_t> masks, std::uint64_t* out) {
  for (std::uint32_t m : masks) {
    for (std::size_t e = 0; e < kEmotionCount; ++e) out[e] += (m >> e) & 1u;
  }
}

}  // namespace

double p_value_df1(double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("p_value_df1: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double p = erfc_approx(std::sqrt(x / 2.0));
  return std::clamp(p, 0.0, 1.0);
}

ChiSquareResult chi_square(const ContingencyTable& table, bool yates) {
  ChiSquareResult r;
  r.yates = yates;
  const std::uint64_t present = table.a + table.b;
  const std::uint64_t total = 2 * table.n;
  if (table.a > table.n || table.b > table.n) {
    throw DomainError("chi_square: counts exceed the number of triples");
  }
  if (present == 0 || present == total) {
    r.computable = false;
    r.chi2 = 0.0;
    r.p = 1.0;
    return r;
  }
  r.computable = true;

  // Cells: [[a, n-a], [b, n-b]]; both row margins equal n.
  const double n = static_cast<double>(table.n);
  const double big_n = static_cast<double>(total);
  const double a = static_cast<double>(table.a);
  const double b = static_cast<double>(table.b);
  double diff = std::abs(a * (n - b) - (n - a) * b);  // |ad - bc|
  if (yates) diff = std::max(0.0, diff - big_n / 2.0);
  const double col_present = a + b;
  const double col_absent = big_n - col_present;
  r.chi2 = big_n * diff * diff / (n * n * col_present * col_absent);
  r.p = p_value_df1(r.chi2);
  return r;
}

std::vector<ChiSquareResult> chi_square_batch(std::span<const ContingencyTable> tables, bool yates) {
  std::vector<ChiSquareResult> out(tables.size());
  const auto n = static_cast<std::ptrdiff_t>(tables.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = chi_square(tables[i], yates);
  return out;
}

std::vector<ChiSquareResult> chi_square_batch_serial(std::span<const ContingencyTable> tables,
                                                     bool yates) {
  std::vector<ChiSquareResult> out;
  out.reserve(tables.size());
  for (const auto& t : tables) out.push_back(chi_square(t, yates));
  return out;
}

AlignedPredictions align(std::span<const PredictionRecord> predictions) {
  struct Slots {
    std::array<const PredictionRecord*, kVariantCount> by_variant{};
  };
  std::map<std::string, Slots> triples;
  for (const auto& p : predictions) {
    auto& cell = triples[p.triple_id].by_variant[slot(p.variant)];
    if (cell) {
      throw AccountingError("triple '" + p.triple_id + "' has more than one " +
                            std::string(to_string(p.variant)) + " prediction");
    }
    cell = &p;
  }

  AlignedPredictions out;
  for (const auto& [id, s] : triples) {
    const auto* man = s.by_variant[slot(GenderVariant::Man)];
    const auto* woman = s.by_variant[slot(GenderVariant::Woman)];
    const auto* undefined = s.by_variant[slot(GenderVariant::Undefined)];
    if ((man == nullptr) != (woman == nullptr)) {
      throw AccountingError("triple '" + id + "' has a " + (man ? "man" : "woman") +
                            " prediction but no " + (man ? "woman" : "man") + " prediction");
    }
    bool flagged = false;
    for (const auto* p : s.by_variant) {
      if (!p) continue;
      flagged = flagged || !p->involution_ok;
      if (p->caption_record_id == id) {
        if (p->variant == GenderVariant::Man) ++out.original_man;
        if (p->variant == GenderVariant::Woman) ++out.original_woman;
      }
    }
    if (flagged) ++out.flagged_triples;
    if (man) {
      out.triple_ids.push_back(id);
      out.man.push_back(man->parsed.bits());
      out.woman.push_back(woman->parsed.bits());
    }
    if (undefined) out.undefined.push_back(undefined->parsed.bits());
  }
  return out;
}

ContingencyTables contingency_all(const AlignedPredictions& aligned) {
  std::uint64_t a[kEmotionCount] = {};
  std::uint64_t b[kEmotionCount] = {};
  const auto n = static_cast<std::ptrdiff_t>(aligned.man.size());
  const std::uint32_t* man = aligned.man.data();
  const std::uint32_t* woman = aligned.woman.data();
#pragma omp parallel for reduction(+ : a[:kEmotionCount], b[:kEmotionCount]) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      a[e] += (man[i] >> e) & 1u;
      b[e] += (woman[i] >> e) & 1u;
    }
  }
  ContingencyTables out{};
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    out[e] = {a[e], b[e], static_cast<std::uint64_t>(n)};
  }
  return out;
}

ContingencyTables contingency_all_serial(const AlignedPredictions& aligned) {
  std::uint64_t a[kEmotionCount] = {};
  std::uint64_t b[kEmotionCount] = {};
  count_masks(aligned.man, a);
  count_masks(aligned.woman, b);
  ContingencyTables out{};
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    out[e] = {a[e], b[e], static_cast<std::uint64_t>(aligned.man.size())};
  }
  return out;
}

ContingencyTable contingency(std::span<const PredictionRecord> predictions, Emotion emotion) {
  return contingency_all(align(predictions))[index_of(emotion)];
}

FrequencyTable frequency_table(std::span<const PredictionRecord> predictions) {
  constexpr std::size_t kCells = kEmotionCount * kVariantCount;
  std::uint64_t counts[kCells] = {};
  const auto n = static_cast<std::ptrdiff_t>(predictions.size());
  const PredictionRecord* data = predictions.data();
#pragma omp parallel for reduction(+ : counts[:kCells]) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::uint32_t bits = data[i].parsed.bits();
    const std::size_t v = slot(data[i].variant);
    for (std::size_t e = 0; e < kEmotionCount; ++e) counts[e * kVariantCount + v] += (bits >> e) & 1u;
  }
  FrequencyTable out;
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    for (std::size_t v = 0; v < kVariantCount; ++v) {
      out.counts[e][v] = counts[e * kVariantCount + v];
      out.totals[v] += counts[e * kVariantCount + v];
    }
  }
  return out;
}

FrequencyTable frequency_table_serial(std::span<const PredictionRecord> predictions) {
  FrequencyTable out;
  for (const auto& p : predictions) {
    for (Emotion e : p.parsed.to_vector()) {
      ++out.counts[index_of(e)][slot(p.variant)];
      ++out.totals[slot(p.variant)];
    }
  }
  return out;
}

NormalizedShares normalize_per_emotion(const FrequencyTable& freqs) {
  NormalizedShares out{};
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    const auto& c = freqs.counts[e];
    const std::uint64_t total = c[0] + c[1] + c[2];
    if (total == 0) continue;
    const double t = static_cast<double>(total);
    out[e] = VariantShares{static_cast<double>(c[0]) / t, static_cast<double>(c[1]) / t,
                           static_cast<double>(c[2]) / t};
  }
  return out;
}

}  // namespace emobias
