// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <numeric>
#include <stdexcept>

namespace oracle {

Rational Rational::of(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const auto g = std::gcd(n < 0 ? -n : n, d);
  return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
}

Rational memorization(const std::vector<int>& targets, const std::vector<int>& predictions) {
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) hits += targets[i] == predictions[i] ? 1 : 0;
  return Rational::of(hits, static_cast<std::int64_t>(targets.size()));
}

std::map<int, TagRatio> pos_ratios(const std::vector<int>& gold_tags, const std::vector<int>& targets,
                                   const std::vector<int>& predictions, const std::vector<int>& predicted_tags) {
  std::map<int, TagRatio> out;
  for (int tag = 0; tag < 6; ++tag) {
    std::int64_t n = 0, same = 0, exact = 0;
    for (std::size_t i = 0; i < gold_tags.size(); ++i) {
      if (gold_tags[i] != tag) continue;
      ++n;
      const bool hit = targets[i] == predictions[i];
      exact += hit;
      same += hit || predicted_tags[i] == tag;
    }
    if (n > 0) out[tag] = {Rational::of(same, n), Rational::of(exact, n)};
  }
  return out;
}

std::vector<Rational> rolling_average(const std::vector<std::int64_t>& numerators, std::int64_t denominator,
                                      std::size_t window) {
  std::vector<Rational> out;
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    std::int64_t sum = 0, count = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      if (i - j < window) {
        sum += numerators[j];
        ++count;
      }
    }
    out.push_back(Rational::of(sum, count * denominator));
  }
  return out;
}

UnitLengths memory_units(const std::vector<std::vector<int>>& bitmaps) {
  std::int64_t runs = 0, total = 0, squares = 0;
  for (const auto& b : bitmaps) {
    const std::size_t n = b.size();
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t e = s; e < n; ++e) {
        bool all = true;
        for (std::size_t k = s; k <= e; ++k) all = all && b[k] == 1;
        if (!all) continue;
        const bool left_closed = s == 0 || b[s - 1] == 0;
        const bool right_closed = e + 1 == n || b[e + 1] == 0;
        if (left_closed && right_closed) {
          const auto len = static_cast<std::int64_t>(e - s + 1);
          ++runs;
          total += len;
          squares += len * len;
        }
      }
    }
  }
  UnitLengths u;
  u.runs = static_cast<std::size_t>(runs);
  u.mean = runs == 0 ? Rational{0, 1} : Rational::of(total, runs);
  u.token_weighted = total == 0 ? Rational{0, 1} : Rational::of(squares, total);
  return u;
}

std::optional<std::size_t> first_crossing(const std::vector<std::int64_t>& numerators, std::int64_t denominator,
                                          std::int64_t tau_num, std::int64_t tau_den) {
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    // numerators[i] / denominator >= tau_num / tau_den, cross-multiplied.
    if (numerators[i] * tau_den >= tau_num * denominator) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> overfit_epoch(const std::vector<std::int64_t>& ppl) {
  for (std::size_t e = 2; e <= ppl.size(); ++e) {
    if (ppl[e - 1] > ppl[e - 2]) return e;
  }
  return std::nullopt;
}

}  // namespace oracle
