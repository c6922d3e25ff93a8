// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point for training runs, sweeps and figure export.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"

namespace {

using memlab::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUnreached = 4;
constexpr int kExitOther = 1;

enum class Kind { Uint, Double, Bool, String, UintList, DoubleList };

struct FieldFlag {
  const char* flag;
  const char* pointer;
  Kind kind;
  const char* help;
};

const std::vector<FieldFlag> kFieldFlags = {
    {"--run-id", "/run_id", Kind::String, "run directory name (default: run-<config hash>)"},
    {"--preset", "/preset", Kind::String, "model preset"},
    {"--n-layers", "/n_layers", Kind::Uint, "override layer count"},
    {"--n-heads", "/n_heads", Kind::Uint, "override head count"},
    {"--d-model", "/d_model", Kind::Uint, "override model width"},
    {"--d-ffn", "/d_ffn", Kind::Uint, "override feed-forward width"},
    {"--task", "/task", Kind::String, "causal | masked"},
    {"--tie-embeddings", "/tie_embeddings", Kind::Bool, "share input and output embeddings"},
    {"--seed", "/seed", Kind::Uint, "RNG seed"},
    {"--max-epochs", "/max_epochs", Kind::Uint, "stop after this many epochs"},
    {"--max-updates", "/max_updates", Kind::Uint, "stop after this many updates"},
    {"--batch-tokens", "/batch_tokens", Kind::Uint, "tokens per update (0: preset)"},
    {"--max-lr", "/max_lr", Kind::Double, "peak learning rate (0: preset)"},
    {"--warmup-fraction", "/warmup_fraction", Kind::Double, "warmup share of the schedule"},
    {"--eval-every", "/eval_every", Kind::Uint, "epochs between evaluations"},
    {"--checkpoint-every", "/checkpoint_every", Kind::Uint, "epochs between checkpoints"},
    {"--checkpoint-epochs", "/checkpoint_epochs", Kind::UintList, "extra checkpoint epochs"},
    {"--early-exit", "/early_exit_memorization", Kind::Double, "stop once M reaches this value"},
    {"--eval-mask-seed", "/eval_mask_seed", Kind::Uint, "seed of the fixed evaluation mask"},
    {"--mask-probability", "/mask_probability", Kind::Double, "masking rate"},
    {"--mask-strategy", "/mask_strategy", Kind::String, "mask-only | 80-10-10"},
    {"--allow-paper-scale", "/allow_paper_scale", Kind::Bool, "permit paper-scale presets"},
    {"--record-wall-time", "/record_wall_time", Kind::Bool, "log wall-clock seconds"},
    {"--log-updates", "/log_updates", Kind::Bool, "log per-update M"},
    {"--taus", "/taus", Kind::DoubleList, "memorization thresholds"},
    {"--inject-epoch", "/forgetting/inject_epoch", Kind::Uint, "epoch after which the special batch is injected"},
    {"--repetitions", "/forgetting/repetitions", Kind::Uint, "passes over the special batch"},
    {"--period", "/forgetting/period", Kind::Uint, "re-inject every N epochs"},
    {"--interleaved", "/forgetting/interleaved", Kind::Bool, "spread repetitions over consecutive epochs"},
    {"--data-source", "/dataset/source", Kind::String, "synthetic | files"},
    {"--train", "/dataset/train_path", Kind::String, "training text file"},
    {"--valid", "/dataset/valid_path", Kind::String, "validation text file"},
    {"--train-pos", "/dataset/train_pos_path", Kind::String, "POS annotations for the training text"},
    {"--train-documents", "/dataset/train_documents", Kind::Uint, "synthetic training documents"},
    {"--valid-documents", "/dataset/valid_documents", Kind::Uint, "synthetic validation documents"},
    {"--corpus-seed", "/dataset/synthetic/seed", Kind::Uint, "synthetic corpus seed"},
    {"--vocab-size", "/dataset/vocab_size", Kind::Uint, "vocabulary cap"},
    {"--min-freq", "/dataset/min_freq", Kind::Uint, "minimum token count"},
    {"--max-seq-len", "/dataset/max_seq_len", Kind::Uint, "packed sequence length"},
    {"--docid", "/dataset/docid", Kind::String, "control | vocab-only | prepend"},
};

json parse_value(Kind kind, const std::string& text, const std::string& flag) {
  try {
    switch (kind) {
      case Kind::Uint:
        return static_cast<std::uint64_t>(std::stoull(text, nullptr, 0));
      case Kind::Double:
        return std::stod(text);
      case Kind::Bool:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      case Kind::String:
        return text;
      case Kind::UintList:
      case Kind::DoubleList: {
        json arr = json::array();
        std::size_t start = 0;
        while (start <= text.size()) {
          const auto end = std::min(text.find(',', start), text.size());
          const auto item = text.substr(start, end - start);
          if (!item.empty()) {
            arr.push_back(kind == Kind::UintList ? json(std::stoull(item)) : json(std::stod(item)));
          }
          start = end + 1;
        }
        return arr;
      }
    }
  } catch (const std::exception&) {
  }
  throw memlab::ConfigError("bad value '" + text + "' for " + flag);
}

/// Run-config flags shared by every training subcommand.
class ConfigFlags {
 public:
  void attach(CLI::App* app) {
    app->add_option("--config", config_path_, "canonical JSON run config; flags override its fields");
    values_.resize(kFieldFlags.size());
    options_.resize(kFieldFlags.size());
    for (std::size_t i = 0; i < kFieldFlags.size(); ++i) {
      const auto& f = kFieldFlags[i];
      options_[i] = app->add_option(f.flag, values_[i], f.help);
    }
  }

  memlab::RunConfig build() const {
    json j = json::object();
    if (!config_path_.empty()) {
      try {
        j = json::parse(memlab::read_text_file(config_path_));
      } catch (const json::exception& e) {
        throw memlab::ConfigError(config_path_ + ": " + e.what());
      } catch (const memlab::IoError& e) {
        throw memlab::ConfigError(e.what());
      }
      if (j.contains("resolved")) j.erase("resolved");
    }
    for (std::size_t i = 0; i < kFieldFlags.size(); ++i) {
      if (options_[i]->count() == 0) continue;
      const auto& f = kFieldFlags[i];
      j[json::json_pointer(f.pointer)] = parse_value(f.kind, values_[i], f.flag);
    }
    auto cfg = memlab::RunConfig::from_json(j);
    if (cfg.max_epochs == 0 && cfg.max_updates == 0) cfg.max_epochs = 30;
    return cfg;
  }

 private:
  std::string config_path_;
  std::vector<std::string> values_;
  std::vector<CLI::Option*> options_;
};

std::filesystem::path log_root(const std::string& flag) {
  return flag.empty() ? memlab::default_log_root() : std::filesystem::path(flag);
}

std::string crossing_text(const memlab::ThresholdCrossing& c) {
  if (c.reached) return fmt::format("T={} (M={:.4f})", c.index, c.value);
  return fmt::format("unreached at budget {}", c.budget);
}

std::filesystem::path self_dir() {
  std::error_code ec;
  const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::filesystem::current_path() : exe.parent_path();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memlab: memorization dynamics experiments for small transformer language models"};
  app.require_subcommand(1);
  std::string root_flag;
  app.add_option("--log-root", root_flag, "log root (default: $MEMLAB_LOG_ROOT or ./runs)");
  bool strict = false;
  app.add_flag("--strict", strict, "exit 4 when a threshold is not reached");

  ConfigFlags train_flags, scale_flags, lr_flags, docid_flags, forget_flags;

  auto* train = app.add_subcommand("train", "train one run and log metrics");
  train_flags.attach(train);

  auto* sweep_scale = app.add_subcommand("sweep-scale", "train one run per preset and tabulate T(N, tau)");
  scale_flags.attach(sweep_scale);
  std::vector<std::string> scale_presets = {"desk-tiny", "desk-small", "desk-medium", "desk-large", "desk-xlarge"};
  std::string scale_id = "sweep-scale";
  sweep_scale->add_option("--presets", scale_presets, "presets to sweep")->delimiter(',');
  sweep_scale->add_option("--experiment-id", scale_id, "experiment directory name");

  auto* sweep_lr = app.add_subcommand("sweep-lr", "grid over learning rates for several presets");
  lr_flags.attach(sweep_lr);
  std::vector<std::string> lr_presets = {"desk-tiny", "desk-small"};
  std::vector<double> lrs = {1e-4, 2e-4, 4e-4, 8e-4, 1e-3};
  double lr_tau = 0.9;
  std::string lr_id = "sweep-lr";
  sweep_lr->add_option("--presets", lr_presets, "presets to sweep")->delimiter(',');
  sweep_lr->add_option("--lrs", lrs, "learning-rate grid")->delimiter(',');
  sweep_lr->add_option("--tau", lr_tau, "threshold whose crossing epoch is compared");
  sweep_lr->add_option("--experiment-id", lr_id, "experiment directory name");

  auto* docid = app.add_subcommand("docid", "control, vocab-only and prepend arms");
  docid_flags.attach(docid);
  std::string docid_id = "docid";
  docid->add_option("--experiment-id", docid_id, "experiment directory name");

  auto* forget = app.add_subcommand("forget", "inject the validation set once and track its memorization");
  forget_flags.attach(forget);
  std::string forget_id = "forget";
  std::vector<std::string> forget_presets;
  forget->add_option("--experiment-id", forget_id, "experiment directory name");
  forget->add_option("--presets", forget_presets, "run one forgetting experiment per preset")->delimiter(',');

  auto* figures = app.add_subcommand("emit-figures", "write figure CSVs for an experiment");
  std::string figure_id;
  figures->add_option("experiment_id", figure_id, "experiment directory name")->required();

  auto* verify = app.add_subcommand("verify", "run the property acceptance suite");

  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic corpus and its POS annotations");
  memlab::SyntheticCorpusOptions gen_opts;
  std::size_t gen_first = 0;
  std::size_t gen_count = 400;
  std::string gen_out;
  gen->add_option("--seed", gen_opts.seed, "generator seed");
  gen->add_option("--first", gen_first, "index of the first document");
  gen->add_option("--count", gen_count, "number of documents");
  gen->add_option("--out", gen_out, "output prefix (<out>.txt, <out>.pos)")->required();

  auto* export_tokens = app.add_subcommand("export-tokens", "print the token stream an annotation file must follow");
  std::string export_path;
  export_tokens->add_option("text", export_path, "corpus text file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto root = log_root(root_flag);
    if (train->parsed()) {
      auto cfg = train_flags.build();
      auto data = memlab::prepare_data(cfg.dataset);
      memlab::Trainer trainer(cfg, data, root);
      const auto r = trainer.run();
      fmt::print("run {} ({} parameters) -> {}\n", r.run_id, r.param_count, r.dir.string());
      bool unreached = false;
      const auto series = r.history.epoch_memorization();
      if (!series.empty()) {
        for (double t : cfg.taus) {
          const auto c = memlab::threshold_crossing(series, t);
          unreached |= !c.reached;
          fmt::print("  tau={:.2f}: {}\n", t, crossing_text(c));
        }
      }
      return strict && unreached ? kExitUnreached : kExitOk;
    }
    if (sweep_scale->parsed()) {
      const auto cfg = scale_flags.build();
      const auto res = memlab::run_scaling_sweep(cfg, scale_presets, cfg.taus, root, scale_id);
      bool unreached = false;
      for (std::size_t p = 0; p < res.presets.size(); ++p) {
        fmt::print("{:<14} N={:<10}", res.presets[p], res.runs[p].param_count);
        for (const auto& c : res.table[p]) {
          unreached |= !c.reached;
          fmt::print("  tau={:.2f}: {}", c.tau, crossing_text(c));
        }
        fmt::print("\n");
      }
      return strict && unreached ? kExitUnreached : kExitOk;
    }
    if (sweep_lr->parsed()) {
      const auto cfg = lr_flags.build();
      const auto res = memlab::run_lr_sweep(cfg, lr_presets, lrs, lr_tau, root, lr_id);
      bool unreached = false;
      for (std::size_t p = 0; p < res.presets.size(); ++p) {
        for (std::size_t j = 0; j < res.learning_rates.size(); ++j) {
          unreached |= !res.table[p][j].reached;
          fmt::print("{:<14} lr={:.2e}  {}\n", res.presets[p], res.learning_rates[j], crossing_text(res.table[p][j]));
        }
      }
      return strict && unreached ? kExitUnreached : kExitOk;
    }
    if (docid->parsed()) {
      const auto cfg = docid_flags.build();
      const auto res = memlab::run_docid_experiment(cfg, root, docid_id);
      for (std::size_t i = 0; i < res.arms.size(); ++i) {
        const auto series = res.runs[i].history.epoch_memorization();
        fmt::print("{:<11} final M={:.4f}  tau=0.80: {}\n", memlab::to_string(res.arms[i]), series.back(),
                   crossing_text(memlab::threshold_crossing(series, 0.8)));
      }
      return kExitOk;
    }
    if (forget->parsed()) {
      const auto cfg = forget_flags.build();
      if (!forget_presets.empty()) {
        const auto res = memlab::forgetting_baseline_vs_scale(cfg, forget_presets, root, forget_id);
        for (std::size_t i = 0; i < res.presets.size(); ++i) {
          fmt::print("{:<14} baseline={:.4f}\n", res.presets[i], res.results[i].curve.baseline());
        }
        return kExitOk;
      }
      const auto res = memlab::run_forgetting(cfg, root, forget_id);
      for (std::size_t i = 0; i < res.curve.values.size(); ++i) {
        fmt::print("epoch {:>4}  M_special={:.4f}\n", res.curve.epochs[i], res.curve.values[i]);
      }
      fmt::print("baseline={:.4f}\n", res.curve.baseline());
      return kExitOk;
    }
    if (figures->parsed()) {
      for (const auto& p : memlab::emit_figure_data(root, figure_id)) fmt::print("{}\n", p.string());
      return kExitOk;
    }
    if (verify->parsed()) {
      const auto exe = self_dir() / "memlab_acceptance";
      std::fflush(stdout);
      execl(exe.c_str(), exe.c_str(), "--suite", "property", static_cast<char*>(nullptr));
      std::perror(("cannot run " + exe.string()).c_str());
      return kExitOther;
    }
    if (gen->parsed()) {
      const auto c = memlab::generate_synthetic_corpus(gen_opts, gen_first, gen_count);
      memlab::write_text_file(gen_out + ".txt", c.text);
      memlab::write_text_file(gen_out + ".pos", c.annotations);
      fmt::print("{}.txt {}.pos\n", gen_out, gen_out);
      return kExitOk;
    }
    if (export_tokens->parsed()) {
      std::cout << memlab::export_token_stream(memlab::parse_corpus(memlab::read_text_file(export_path)));
      return kExitOk;
    }
  } catch (const memlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const memlab::NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOk;
}
