// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>

#include "memlab/metrics.hpp"

namespace memlab::detail {

/// Runs the model over every sequence that owns at least one context and
/// hands the logits row for each context, in context order.
void for_each_context_row(const ModelState<float>& model, const ContextSet& contexts, std::size_t batch_tokens,
                          const std::function<void(std::size_t, std::span<const float>)>& visit);

}  // namespace memlab::detail
