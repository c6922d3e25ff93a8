// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "memlab/errors.hpp"
#include "memlab/metrics.hpp"

namespace memlab {
namespace {

void check_unit(double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw UsageError("memorization value outside [0, 1]");
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

void MemorizationHistory::add_epoch(const EpochRecord& r) {
  check_unit(r.memorization);
  if (!epochs.empty() && r.epoch <= epochs.back().epoch) throw UsageError("epoch indices must strictly increase");
  epochs.push_back(r);
}

void MemorizationHistory::add_update(const UpdateRecord& r) {
  check_unit(r.memorization);
  if (!updates.empty() && r.update <= updates.back().update) throw UsageError("update indices must strictly increase");
  updates.push_back(r);
}

std::vector<double> MemorizationHistory::epoch_memorization() const {
  std::vector<double> out;
  for (const auto& e : epochs) out.push_back(e.memorization);
  return out;
}

std::vector<double> MemorizationHistory::update_memorization() const {
  std::vector<double> out;
  for (const auto& u : updates) out.push_back(u.memorization);
  return out;
}

std::vector<double> MemorizationHistory::validation_ppl() const {
  std::vector<double> out;
  for (const auto& e : epochs) out.push_back(e.validation_ppl);
  return out;
}

ThresholdCrossing threshold_crossing(std::span<const double> series, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (series.empty()) throw UsageError("threshold crossing on an empty history");
  ThresholdCrossing t;
  t.tau = tau;
  t.budget = series.size();
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] >= tau) {
      t.reached = true;
      t.index = i + 1;
      t.value = series[i];
      break;
    }
  }
  return t;
}

std::vector<double> rolling_average(std::span<const double> series, std::size_t window) {
  if (window == 0) throw UsageError("rolling window must be at least 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t k = lo; k <= i; ++k) s += series[k];
    out[i] = s / static_cast<double>(i + 1 - lo);
  }
  return out;
}

std::optional<std::size_t> detect_overfit_epoch(std::span<const double> validation_ppl) {
  if (validation_ppl.size() < 2) throw UsageError("overfit detection needs at least two epochs");
  for (std::size_t e = 1; e < validation_ppl.size(); ++e) {
    if (validation_ppl[e] > validation_ppl[e - 1]) return e + 1;
  }
  return std::nullopt;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("spearman needs two equal-length series of size >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace memlab
