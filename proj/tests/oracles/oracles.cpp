#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "json.hpp"

namespace emobias::oracle {

double chi2_sf_df1(double x) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), x));
}

Reference yates_reference(std::uint64_t a, std::uint64_t b, std::uint64_t n, bool yates) {
  const double obs[2][2] = {{double(a), double(n - a)}, {double(b), double(n - b)}};
  const double rows[2] = {obs[0][0] + obs[0][1], obs[1][0] + obs[1][1]};
  const double cols[2] = {obs[0][0] + obs[1][0], obs[0][1] + obs[1][1]};
  const double total = rows[0] + rows[1];
  Reference r;
  if (cols[0] == 0 || cols[1] == 0) return r;
  r.computable = true;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / total;
      double dev = std::abs(obs[i][j] - expected);
      if (yates) dev -= std::min(0.5, dev);
      r.chi2 += dev * dev / expected;
    }
  }
  r.p = chi2_sf_df1(r.chi2);
  return r;
}

Recount recount_log(const std::string& jsonl) {
  static const std::array<std::string, 26> kNames = {
      "suffering", "pain", "sadness", "aversion", "disapproval", "anger", "fear",
      "annoyance", "fatigue", "disquietment", "doubt/confusion", "embarrassment",
      "disconnection", "affection", "confidence", "engagement", "happiness", "peace",
      "pleasure", "esteem", "excitement", "anticipation", "yearning", "sensitivity",
      "surprise", "sympathy"};
  Recount out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto obj = nlohmann::json::parse(line);
    const std::string variant = obj.at("variant");
    const int v = variant == "man" ? 0 : variant == "woman" ? 1 : 2;
    std::set<std::string> labels;
    for (const auto& l : obj.at("parsed")) {
      std::string s = l.get<std::string>();
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
      labels.insert(s);
    }
    for (const auto& l : labels) {
      const auto it = std::find(kNames.begin(), kNames.end(), l);
      if (it == kNames.end()) throw std::runtime_error("recount: unknown label " + l);
      ++out.counts[static_cast<std::size_t>(it - kNames.begin())][v];
      ++out.totals[v];
    }
  }
  return out;
}

}  // namespace emobias::oracle
