// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "memlab/errors.hpp"
#include "memlab/optimizer.hpp"

namespace memlab {

LrSchedule LrSchedule::with_warmup_fraction(double max_lr, std::uint64_t total_tokens, double warmup_fraction) {
  LrSchedule s;
  s.max_lr = max_lr;
  s.total_tokens = total_tokens;
  const double w = std::round(static_cast<double>(total_tokens) * warmup_fraction);
  s.warmup_tokens = static_cast<std::uint64_t>(std::max(1.0, w));
  s.validate();
  return s;
}

void LrSchedule::validate() const {
  if (!(max_lr >= 0.0) || !std::isfinite(max_lr)) throw ConfigError("max_lr must be finite and non-negative");
  if (warmup_tokens == 0 || warmup_tokens >= total_tokens) {
    throw ConfigError("schedule needs 0 < warmup_tokens < total_tokens (got W=" + std::to_string(warmup_tokens) +
                      ", T=" + std::to_string(total_tokens) + ")");
  }
}

double LrSchedule::lr_at(std::uint64_t tokens) const {
  if (tokens <= warmup_tokens) {
    return max_lr * (static_cast<double>(tokens) / static_cast<double>(warmup_tokens));
  }
  if (tokens >= total_tokens) return 0.0;
  const double remaining = static_cast<double>(total_tokens - tokens);
  return max_lr * (remaining / static_cast<double>(total_tokens - warmup_tokens));
}

}  // namespace memlab
