// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "batched.hpp"
#include "memlab/errors.hpp"

namespace memlab {

std::size_t memorized_count(const ContextSet& contexts, std::span<const std::int32_t> predictions) {
  if (predictions.size() != contexts.size()) throw UsageError("one prediction per context required");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == contexts.contexts[i].target ? 1 : 0;
  return hits;
}

double exact_memorization(const ContextSet& contexts, std::span<const std::int32_t> predictions) {
  if (contexts.size() == 0) throw UsageError("empty context set");
  return static_cast<double>(memorized_count(contexts, predictions)) / static_cast<double>(contexts.size());
}

double exact_memorization(const ModelState<float>& model, const ContextSet& contexts) {
  return exact_memorization(contexts, predict_contexts(model, contexts));
}

double update_memorization(std::span<const float> logits, std::size_t vocab, std::span<const std::int32_t> targets,
                           std::span<const std::uint8_t> scored) {
  if (vocab == 0 || logits.size() != targets.size() * vocab) throw UsageError("logits and targets disagree in extent");
  if (!scored.empty() && scored.size() != targets.size()) throw UsageError("scored mask extent mismatch");
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (!scored.empty() && !scored[r]) continue;
    ++total;
    hits += argmax_lowest(logits.subspan(r * vocab, vocab)) == targets[r] ? 1 : 0;
  }
  if (total == 0) throw UsageError("update has no scored positions");
  return static_cast<double>(hits) / static_cast<double>(total);
}

double perplexity(const ModelState<float>& model, const ContextSet& contexts, std::size_t batch_tokens) {
  if (contexts.size() == 0) throw UsageError("empty context set");
  double nll = 0.0;
  detail::for_each_context_row(model, contexts, batch_tokens, [&](std::size_t i, std::span<const float> row) {
    double mx = row[0];
    for (float v : row) mx = std::max(mx, static_cast<double>(v));
    double z = 0.0;
    for (float v : row) z += std::exp(static_cast<double>(v) - mx);
    nll += mx + std::log(z) - static_cast<double>(row[static_cast<std::size_t>(contexts.contexts[i].target)]);
  });
  const double ppl = std::exp(nll / static_cast<double>(contexts.size()));
  if (!std::isfinite(ppl)) throw NumericError("validation perplexity is not finite");
  return ppl;
}

}  // namespace memlab
