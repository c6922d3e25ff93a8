// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <fmt/format.h>

#include "memlab/gradcheck.hpp"
#include "memlab/harness.hpp"
#include "memlab/ops.hpp"
#include "oracles.hpp"
#include "suite.hpp"

namespace acceptance {
namespace {

using namespace memlab;

constexpr double kGradTolerance = 1e-4;
constexpr std::size_t kOracleInstances = 200;
constexpr std::size_t kOverfitStepBudget = 2000;
constexpr double kRandomInitCeiling = 0.05;
constexpr double kMaskRateLow = 0.149;
constexpr double kMaskRateHigh = 0.151;
constexpr std::size_t kSanityVocab = 8192;
constexpr std::size_t kOverfitSequences = 8;
constexpr std::size_t kMaskPositions = 1'000'000;

Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor<double>(std::move(shape), std::move(v));
}

Tensor<double> weighted_sum(const Tensor<double>& y, GradTape<double>* tape) {
  return ops::sum(ops::mul(y, random_tensor(y.shape(), 4242), tape), tape);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

// ---------------------------------------------------------------------------
// 1. Gradient checks

Outcome gradient_checks() {
  std::vector<std::pair<std::string, GradCheckResult>> errors;
  auto check = [&](const std::string& name, const ScalarObjective& f, Tensor<double>& x) {
    errors.emplace_back(name, finite_difference_check(f, x));
  };

  auto a = random_tensor({3, 4}, 1), b = random_tensor({3, 4}, 2), w = random_tensor({4, 5}, 3);
  auto wt = random_tensor({5, 4}, 4), bias = random_tensor({5}, 5), g = random_tensor({4}, 6);
  auto beta = random_tensor({4}, 7), table = random_tensor({6, 4}, 8);
  auto qkv = random_tensor({8, 12}, 9), logits = random_tensor({5, 7}, 10);
  const std::vector<std::int32_t> ids = {0, 3, 3, 5, 1};
  const std::vector<std::int32_t> targets = {1, 6, 0, 2, 2};
  const std::vector<std::uint8_t> ignore = {0, 0, 1, 0, 0};

  check("add", [&](GradTape<double>* t) { return weighted_sum(ops::add(a, b, t), t); }, a);
  check("mul", [&](GradTape<double>* t) { return weighted_sum(ops::mul(a, b, t), t); }, b);
  check("scale", [&](GradTape<double>* t) { return weighted_sum(ops::scale(a, 0.7, t), t); }, a);
  check("sum", [&](GradTape<double>* t) { return ops::sum(ops::mul(a, a, t), t); }, a);
  check("matmul.a", [&](GradTape<double>* t) { return weighted_sum(ops::matmul(a, w, t), t); }, a);
  check("matmul.b", [&](GradTape<double>* t) { return weighted_sum(ops::matmul(a, w, t), t); }, w);
  check("matmul_nt.a", [&](GradTape<double>* t) { return weighted_sum(ops::matmul_nt(a, wt, t), t); }, a);
  check("matmul_nt.b", [&](GradTape<double>* t) { return weighted_sum(ops::matmul_nt(a, wt, t), t); }, wt);
  check("linear.x", [&](GradTape<double>* t) { return weighted_sum(ops::linear(a, w, bias, t), t); }, a);
  check("linear.w", [&](GradTape<double>* t) { return weighted_sum(ops::linear(a, w, bias, t), t); }, w);
  check("linear.b", [&](GradTape<double>* t) { return weighted_sum(ops::linear(a, w, bias, t), t); }, bias);
  check("gelu", [&](GradTape<double>* t) { return weighted_sum(ops::gelu(a, t), t); }, a);
  check("softmax.0", [&](GradTape<double>* t) { return weighted_sum(ops::softmax(a, 0, t), t); }, a);
  check("softmax.1", [&](GradTape<double>* t) { return weighted_sum(ops::softmax(a, 1, t), t); }, a);
  check("layer_norm.x", [&](GradTape<double>* t) { return weighted_sum(ops::layer_norm(a, g, beta, 1e-5, t), t); }, a);
  check("layer_norm.gain", [&](GradTape<double>* t) { return weighted_sum(ops::layer_norm(a, g, beta, 1e-5, t), t); },
        g);
  check("layer_norm.bias", [&](GradTape<double>* t) { return weighted_sum(ops::layer_norm(a, g, beta, 1e-5, t), t); },
        beta);
  check("embedding", [&](GradTape<double>* t) { return weighted_sum(ops::embedding(table, ids, t), t); }, table);
  for (bool causal : {true, false}) {
    const ops::AttentionLayout layout{2, 4, 2, {4, 3}, causal};
    check(causal ? "attention.causal" : "attention.bidirectional",
          [&](GradTape<double>* t) { return weighted_sum(ops::attention(qkv, layout, t), t); }, qkv);
  }
  check("cross_entropy", [&](GradTape<double>* t) { return ops::cross_entropy(logits, targets, ignore, t); }, logits);

  for (Task task : {Task::Causal, Task::Masked}) {
    TransformerConfig c;
    c.n_layers = 2;
    c.n_heads = 2;
    c.d_model = 8;
    c.d_ffn = 16;
    c.vocab_size = 13;
    c.max_seq_len = 6;
    c.task = task;
    auto model = build_model<double>(c, 17);
    const std::vector<std::int32_t> r0 = {4, 5, 6, 7, 8, 9};
    const std::vector<std::int32_t> r1 = {10, 2, 12, 4};
    const std::vector<std::span<const std::int32_t>> rows = {r0, r1};
    const auto batch = TokenBatch::from_sequences(rows);
    std::vector<std::int32_t> tg(batch.batch * batch.seq, 0);
    std::vector<std::uint8_t> ig(tg.size(), 1);
    for (std::size_t r = 0; r < batch.batch; ++r) {
      for (std::size_t t = 0; t < batch.lengths[r]; ++t) {
        const std::size_t i = r * batch.seq + t;
        if (task == Task::Causal && t + 1 < batch.lengths[r]) {
          tg[i] = batch.ids[i + 1];
          ig[i] = 0;
        } else if (task == Task::Masked && (t % 2 == 1)) {
          tg[i] = static_cast<std::int32_t>(4 + t);
          ig[i] = 0;
        }
      }
    }
    auto loss = [&](GradTape<double>* tape) {
      return ops::cross_entropy(forward(model, batch, tape), tg, ig, tape);
    };
    for (auto& [name, p] : model.named_parameters()) {
      Tensor<double> handle = p;
      check(fmt::format("transformer.{}.{}", to_string(task), name), loss, handle);
    }
  }

  auto worst = std::max_element(errors.begin(), errors.end(),
                                [](const auto& x, const auto& y) {
                                  return x.second.max_relative_error < y.second.max_relative_error;
                                });
  std::size_t failing = 0;
  for (const auto& [name, e] : errors) failing += !(e.max_relative_error < kGradTolerance);
  const auto& r = worst->second;
  return {1, "gradient checks", failing == 0,
          fmt::format("{} checks, {} failing, worst {}[{}] rel err {:.2e} (analytic {:.6e}, numeric {:.6e}; tol {:.0e})",
                      errors.size(), failing, worst->first, r.worst_coordinate, r.max_relative_error,
                      r.worst_analytic, r.worst_numeric, kGradTolerance)};
}

// ---------------------------------------------------------------------------
// 2. Metric oracles

struct RandomInstance {
  ContextSet contexts;
  std::vector<std::int32_t> predictions;
  std::vector<PosTag> predicted_tags;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomInstance inst;
  inst.contexts.task = Task::Causal;
  const int n_seq = uni(1, 10);
  const int vocab = uni(5, 9);
  for (int s = 0; s < n_seq; ++s) {
    const int len = uni(2, 16);
    std::vector<std::int32_t> ids(len);
    for (auto& id : ids) id = uni(4, vocab);
    inst.contexts.inputs.push_back(ids);
    for (int p = 1; p < len; ++p) {
      if (uni(0, 5) == 0) continue;  // gaps split memory units
      Context c;
      c.sequence = static_cast<std::uint32_t>(s);
      c.position = static_cast<std::uint32_t>(p);
      c.target = ids[p];
      c.tag = static_cast<PosTag>(uni(0, 5));
      inst.contexts.contexts.push_back(c);
      inst.predictions.push_back(uni(0, 2) == 0 ? ids[p] : uni(4, vocab));
      inst.predicted_tags.push_back(static_cast<PosTag>(uni(0, 5)));
    }
  }
  if (inst.contexts.contexts.empty()) return random_instance(rng);
  return inst;
}

Outcome metric_oracles() {
  std::mt19937_64 rng(20240229);
  std::size_t mismatches = 0;
  std::string first;
  auto expect = [&](bool ok, const std::string& what, std::size_t i) {
    if (ok) return;
    if (mismatches++ == 0) first = fmt::format("{} (instance {})", what, i);
  };

  for (std::size_t i = 0; i < kOracleInstances; ++i) {
    const auto inst = random_instance(rng);
    const auto& ctx = inst.contexts.contexts;
    std::vector<int> targets, preds, gold, ptags;
    for (std::size_t k = 0; k < ctx.size(); ++k) {
      targets.push_back(ctx[k].target);
      preds.push_back(inst.predictions[k]);
      gold.push_back(static_cast<int>(*ctx[k].tag));
      ptags.push_back(static_cast<int>(inst.predicted_tags[k]));
    }

    // exact_memorization
    const auto m = oracle::memorization(targets, preds);
    expect(exact_memorization(inst.contexts, inst.predictions) == m.value(), "exact_memorization", i);

    // pos_ratios
    const auto lib = pos_ratios(inst.contexts, inst.predictions, inst.predicted_tags);
    const auto ref = oracle::pos_ratios(gold, targets, preds, ptags);
    expect(lib.size() == ref.size(), "pos_ratios tag set", i);
    for (const auto& [tag, rr] : ref) {
      const auto it = lib.find(static_cast<PosTag>(tag));
      const bool ok = it != lib.end() && it->second.r == rr.r.value() && it->second.r_mem == rr.r_mem.value() &&
                      it->second.r_mem <= it->second.r;
      expect(ok, "pos_ratios values", i);
    }

    // memory_unit_lengths, over bitmaps rebuilt independently from contexts.
    std::vector<std::vector<int>> bitmaps(inst.contexts.inputs.size());
    std::vector<std::vector<std::uint8_t>> lib_bitmaps(inst.contexts.inputs.size());
    for (std::size_t k = 0; k < ctx.size(); ++k) {
      auto& b = bitmaps[ctx[k].sequence];
      if (k > 0 && ctx[k - 1].sequence == ctx[k].sequence && ctx[k - 1].position + 1 != ctx[k].position) {
        b.push_back(0);
      }
      b.push_back(targets[k] == preds[k] ? 1 : 0);
    }
    for (std::size_t s = 0; s < bitmaps.size(); ++s) lib_bitmaps[s].assign(bitmaps[s].begin(), bitmaps[s].end());
    const auto u = oracle::memory_units(bitmaps);
    const auto lu = memory_unit_lengths(lib_bitmaps);
    expect(lu.runs == u.runs && lu.mean_length == u.mean.value() && lu.token_weighted_mean == u.token_weighted.value(),
           "memory_unit_lengths", i);
    const auto from_ctx = memory_unit_lengths(memorization_bitmaps(inst.contexts, inst.predictions));
    expect(from_ctx.runs == u.runs && from_ctx.mean_length == u.mean.value(), "memorization_bitmaps", i);

    // Series metrics on dyadic values so every double operation is exact.
    const std::int64_t den = 64;
    const int len = std::uniform_int_distribution<int>(2, 16)(rng);
    std::vector<std::int64_t> nums(len), ppl(len);
    std::vector<double> series(len), ppl_d(len);
    for (int k = 0; k < len; ++k) {
      nums[k] = std::uniform_int_distribution<std::int64_t>(0, den)(rng);
      series[k] = static_cast<double>(nums[k]) / den;
      ppl[k] = std::uniform_int_distribution<std::int64_t>(1, 40)(rng);
      ppl_d[k] = static_cast<double>(ppl[k]);
    }
    const std::size_t window = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const auto ra = rolling_average(series, window);
    const auto rr = oracle::rolling_average(nums, den, window);
    for (int k = 0; k < len; ++k) expect(ra[k] == rr[k].value(), "rolling_average", i);

    const std::int64_t tau_num = std::uniform_int_distribution<std::int64_t>(1, 15)(rng);
    const double tau = static_cast<double>(tau_num) / 16.0;
    const auto tc = threshold_crossing(series, tau);
    const auto oc = oracle::first_crossing(nums, den, tau_num, 16);
    expect(tc.reached == oc.has_value() && (!oc || tc.index == *oc) && tc.budget == series.size(),
           "threshold_crossing", i);

    expect(detect_overfit_epoch(ppl_d) == oracle::overfit_epoch(ppl), "detect_overfit_epoch", i);
  }
  return {2, "metric oracles", mismatches == 0,
          mismatches == 0 ? fmt::format("{} random instances, 6 metrics, exact agreement", kOracleInstances)
                          : fmt::format("{} mismatches, first: {}", mismatches, first)};
}

// ---------------------------------------------------------------------------
// 3. Memorization sanity

Outcome memorization_sanity() {
  DatasetConfig dc;
  dc.train_documents = 3000;
  dc.valid_documents = 1;
  dc.vocab_size = kSanityVocab;
  dc.synthetic.nouns = 3000;
  dc.synthetic.proper_nouns = 3000;
  dc.synthetic.verbs = 1500;
  dc.synthetic.adjectives = 1500;
  const auto data = prepare_data(dc);

  const auto& preset = find_preset("desk-tiny");
  TransformerConfig mc = preset.config;
  mc.vocab_size = data->vocab.size();
  mc.max_seq_len = dc.max_seq_len;

  // Random init on the full corpus.
  const auto fresh = build_model<float>(mc, 11);
  const auto all_ctx = extract_contexts(data->train, Task::Causal);
  const double m_random = exact_memorization(fresh, all_ctx);

  // Overfit one batch of 8 sequences. Sequences holding <unk> are skipped:
  // two of them can share a context with different targets.
  std::vector<PackedSequence> batch_seqs;
  for (const auto& seq : data->train) {
    if (batch_seqs.size() == kOverfitSequences) break;
    if (std::find(seq.ids.begin(), seq.ids.end(), Vocabulary::kUnk) == seq.ids.end()) batch_seqs.push_back(seq);
  }
  const auto ctx = extract_contexts(batch_seqs, Task::Causal);
  std::vector<std::span<const std::int32_t>> rows;
  for (const auto& s : batch_seqs) rows.emplace_back(s.ids);
  const auto batch = TokenBatch::from_sequences(rows);
  std::vector<std::int32_t> targets(batch.batch * batch.seq, 0);
  std::vector<std::uint8_t> ignore(targets.size(), 1);
  for (std::size_t r = 0; r < batch.batch; ++r) {
    for (std::size_t t = 0; t + 1 < batch.lengths[r]; ++t) {
      targets[r * batch.seq + t] = batch.ids[r * batch.seq + t + 1];
      ignore[r * batch.seq + t] = 0;
    }
  }
  auto model = build_model<float>(mc, 12);
  auto params = model.parameters();
  auto adam = AdamState<float>::for_parameters(params);
  std::size_t reached_at = 0;
  double m = 0.0;
  for (std::size_t step = 1; step <= kOverfitStepBudget; ++step) {
    model.zero_grad();
    GradTape<float> tape;
    auto loss = ops::cross_entropy(forward(model, batch, &tape), targets, ignore, &tape);
    tape.backward(loss);
    adam_step<float>(params, adam, 1e-3);
    if (step % 10 == 0) {
      m = exact_memorization(model, ctx);
      if (m == 1.0) {
        reached_at = step;
        break;
      }
    }
  }
  const bool pass = batch_seqs.size() == kOverfitSequences && reached_at > 0 && m_random < kRandomInitCeiling && data->vocab.size() == kSanityVocab;
  return {3, "memorization sanity", pass,
          fmt::format("8-sequence batch: M=1.0 {} (budget {}); random init M={:.4f} < {} at V={}",
                      reached_at ? fmt::format("at step {}", reached_at) : fmt::format("not reached, M={:.4f}", m),
                      kOverfitStepBudget, m_random, kRandomInitCeiling, data->vocab.size())};
}

// ---------------------------------------------------------------------------
// 4. Determinism and resume

RunConfig determinism_config(Task task) {
  RunConfig c;
  c.preset = "micro-2";
  c.task = task;
  c.dataset.train_documents = 40;
  c.dataset.valid_documents = 6;
  c.dataset.vocab_size = 2000;
  c.batch_tokens = 512;
  c.max_epochs = 4;
  c.checkpoint_every = 1;
  c.seed = 5;
  return c;
}

std::string without_run_id(std::string text, const std::string& id) {
  const std::string needle = "\"run_id\":\"" + id + "\"";
  for (std::size_t p = 0; (p = text.find(needle, p)) != std::string::npos;) text.replace(p, needle.size(), "\"run_id\":\"\"");
  return text;
}

Outcome determinism(const std::filesystem::path& root) {
  std::filesystem::remove_all(root);
  std::vector<std::string> failures;
  for (Task task : {Task::Causal, Task::Masked}) {
    auto c = determinism_config(task);
    const auto data = prepare_data(c.dataset);
    const std::string base = "det-" + to_string(task);
    c.run_id = base + "-a";
    Trainer(c, data, root).run();
    c.run_id = base + "-b";
    Trainer(c, data, root).run();
    const auto a = read_text_file(root / (base + "-a") / "metrics.jsonl");
    const auto b = read_text_file(root / (base + "-b") / "metrics.jsonl");
    if (without_run_id(a, base + "-a") != without_run_id(b, base + "-b")) failures.push_back(base + " repeat");

    // Resume the first run from an interior checkpoint.
    c.run_id = base + "-a";
    Trainer(c, data, root).run(checkpoint_path(root / c.run_id, 2));
    if (read_text_file(root / c.run_id / "metrics.jsonl") != a) failures.push_back(base + " resume");
  }

  // Repeat a forgetting run: injection and the special-batch curve are deterministic too.
  auto c = determinism_config(Task::Causal);
  c.forgetting.inject_epoch = 1;
  const auto f1 = run_forgetting(c, root, "det-forget");
  const auto reference = read_text_file(f1.run.dir / "metrics.jsonl");
  std::filesystem::remove(f1.run.dir / "COMPLETE");
  const auto f2 = run_forgetting(c, root, "det-forget");
  if (read_text_file(f2.run.dir / "metrics.jsonl") != reference) failures.push_back("forgetting repeat");

  return {4, "determinism and resume", failures.empty(),
          failures.empty() ? "causal, masked and forgetting runs byte-identical on repeat; resume from epoch 2 reproduces the log"
                           : "mismatch: " + join(failures)};
}

// ---------------------------------------------------------------------------
// 5. Schedule, optimizer and mask contracts

Outcome contracts() {
  std::vector<std::string> failures;
  const LrSchedule s = LrSchedule::with_warmup_fraction(6e-4, 1'000'000);
  if (s.lr_at(0) != 0.0) failures.push_back("lr_at(0)");
  if (s.lr_at(s.warmup_tokens) != 6e-4) failures.push_back("lr_at(W)");
  if (s.lr_at(s.total_tokens) != 0.0) failures.push_back("lr_at(T)");

  TransformerConfig mc;
  mc.n_layers = 1;
  mc.d_model = 8;
  mc.d_ffn = 16;
  mc.n_heads = 2;
  mc.vocab_size = 20;
  mc.max_seq_len = 8;
  auto model = build_model<float>(mc, 3);
  auto params = model.parameters();
  auto adam = AdamState<float>::for_parameters(params);
  auto before = model.clone();
  model.zero_grad();
  for (int i = 0; i < 3; ++i) adam_step<float>(params, adam, 1e-2);
  const auto pa = before.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::equal(params[i].values().begin(), params[i].values().end(), pa[i].values().begin())) {
      failures.push_back("adam fixed point");
      break;
    }
  }

  PackedSequence seq;
  seq.ids.assign(1000, 7);
  std::size_t masked = 0;
  for (std::uint64_t k = 0; k < kMaskPositions / seq.ids.size(); ++k) {
    masked += apply_mlm_mask(seq, 99, k, {0.15, MaskStrategy::MaskOnly, 0}).mask->positions.size();
  }
  const double rate = static_cast<double>(masked) / static_cast<double>(kMaskPositions);
  if (!(rate >= kMaskRateLow && rate <= kMaskRateHigh)) failures.push_back("mask rate");

  return {5, "schedule, optimizer and mask contracts", failures.empty(),
          fmt::format("lr(0)={} lr(W)={} lr(T)={}; adam zero-grad fixed point {}; mask rate {:.5f} over {} positions",
                      s.lr_at(0), s.lr_at(s.warmup_tokens), s.lr_at(s.total_tokens),
                      std::find(failures.begin(), failures.end(), "adam fixed point") == failures.end() ? "holds"
                                                                                                        : "broken",
                      rate, kMaskPositions)};
}

}  // namespace

std::vector<Outcome> run_property_suite() {
  const auto root = std::filesystem::temp_directory_path() / "memlab-acceptance-property";
  std::vector<Outcome> out;
  for (auto f : {+[]() { return gradient_checks(); }, +[]() { return metric_oracles(); },
                 +[]() { return memorization_sanity(); }}) {
    out.push_back(f());
    print_outcome(out.back());
  }
  out.push_back(determinism(root));
  print_outcome(out.back());
  out.push_back(contracts());
  print_outcome(out.back());
  return out;
}

}  // namespace acceptance
