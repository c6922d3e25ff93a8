// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include <fmt/format.h>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"

namespace memlab {
namespace {

class CsvFile {
 public:
  CsvFile(std::filesystem::path path, const std::string& header) : path_(std::move(path)) {
    text_ = header + "\n";
  }

  template <typename... Args>
  void row(fmt::format_string<Args...> f, Args&&... args) {
    text_ += fmt::format(f, std::forward<Args>(args)...);
    text_ += '\n';
  }

  std::filesystem::path write() const {
    write_text_file(path_, text_);
    return path_;
  }

 private:
  std::filesystem::path path_;
  std::string text_;
};

std::string num(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<std::int64_t>());
  return fmt::format("{:.6g}", v.get<double>());
}

std::vector<std::string> flatten_ids(const json& runs) {
  std::vector<std::string> ids;
  for (const auto& r : runs) {
    if (r.is_array()) {
      for (const auto& x : r) ids.push_back(x.get<std::string>());
    } else {
      ids.push_back(r.get<std::string>());
    }
  }
  return ids;
}

std::map<std::string, RunResult> load_runs(const std::filesystem::path& root, const std::vector<std::string>& ids) {
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (!std::filesystem::exists(root / id / "metrics.jsonl") ||
        !std::filesystem::exists(root / id / "config.resolved.json")) {
      missing.push_back(id);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing run logs:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
  std::map<std::string, RunResult> out;
  for (const auto& id : ids) out.emplace(id, load_run(root / id));
  return out;
}

std::string preset_of(const RunResult& r) {
  const json cfg = json::parse(read_text_file(r.dir / "config.resolved.json"));
  return cfg.at("preset").get<std::string>();
}

void scale_figures(const json& m, const std::map<std::string, RunResult>& runs, const std::filesystem::path& dir,
                   std::vector<std::filesystem::path>& out) {
  const auto taus = m.at("taus").get<std::vector<double>>();
  CsvFile fig1(dir / "fig1_t_vs_n.csv", "run_id,preset,param_count,tau,T_epochs,reached,budget");
  CsvFile fig4(dir / "fig4_mem_before_overfit.csv", "run_id,preset,param_count,overfit_epoch,M_before_overfit,M_at_overfit");
  CsvFile fig9(dir / "fig9_pos.csv", "run_id,preset,param_count,epoch,M,tag,R,R_mem");
  CsvFile fig17(dir / "fig17_mul.csv", "run_id,preset,param_count,epoch,mean_L,mean_L_rolling5");
  for (const auto& id : flatten_ids(m.at("runs"))) {
    const auto& r = runs.at(id);
    const auto preset = preset_of(r);
    const auto series = r.history.epoch_memorization();
    for (double t : taus) {
      const auto c = threshold_crossing(series, t);
      fig1.row("{},{},{},{},{},{},{}", id, preset, r.param_count, t, c.reached ? std::to_string(c.index) : "",
               c.reached ? 1 : 0, c.budget);
    }
    const auto ppl = r.history.validation_ppl();
    if (ppl.size() >= 2) {
      if (const auto e = detect_overfit_epoch(ppl)) {
        fig4.row("{},{},{},{},{:.6g},{:.6g}", id, preset, r.param_count, *e, series[*e - 2], series[*e - 1]);
      } else {
        fig4.row("{},{},{},,,", id, preset, r.param_count);
      }
    }
    std::vector<double> mul;
    std::vector<std::size_t> mul_epochs;
    for (const auto& rec : r.of_kind("epoch")) {
      const auto epoch = rec.at("index").get<std::size_t>();
      if (rec.at("per_pos").is_object()) {
        for (const auto& [tag, v] : rec.at("per_pos").items()) {
          fig9.row("{},{},{},{},{},{},{},{}", id, preset, r.param_count, epoch, num(rec.at("M")), tag, num(v.at(0)),
                   num(v.at(1)));
        }
      }
      if (!rec.at("mean_L").is_null()) {
        mul.push_back(rec.at("mean_L").get<double>());
        mul_epochs.push_back(epoch);
      }
    }
    const auto smooth = rolling_average(mul, 5);
    for (std::size_t i = 0; i < mul.size(); ++i) {
      fig17.row("{},{},{},{},{:.6g},{:.6g}", id, preset, r.param_count, mul_epochs[i], mul[i], smooth[i]);
    }
  }
  out.push_back(fig1.write());
  out.push_back(fig4.write());
  out.push_back(fig9.write());
  out.push_back(fig17.write());
}

void lr_figure(const json& m, const std::map<std::string, RunResult>& runs, const std::filesystem::path& dir,
               std::vector<std::filesystem::path>& out) {
  const double tau = m.at("tau").get<double>();
  const auto lrs = m.at("learning_rates").get<std::vector<double>>();
  CsvFile fig7(dir / "fig7_lr.csv", "run_id,preset,param_count,max_lr,tau,T_epochs,reached,final_M");
  const auto& rows = m.at("runs");
  for (std::size_t p = 0; p < rows.size(); ++p) {
    for (std::size_t j = 0; j < rows[p].size(); ++j) {
      const auto& r = runs.at(rows[p][j].get<std::string>());
      const auto series = r.history.epoch_memorization();
      const auto c = series.empty() ? ThresholdCrossing{tau, false, 0, 0, 0.0} : threshold_crossing(series, tau);
      fig7.row("{},{},{},{:.6g},{},{},{},{}", r.run_id, preset_of(r), r.param_count, lrs.at(j), tau,
               c.reached ? std::to_string(c.index) : "", c.reached ? 1 : 0,
               series.empty() ? std::string() : fmt::format("{:.6g}", series.back()));
    }
  }
  out.push_back(fig7.write());
}

void docid_figure(const json& m, const std::map<std::string, RunResult>& runs, const std::filesystem::path& dir,
                  std::vector<std::filesystem::path>& out) {
  CsvFile fig8(dir / "fig8_docid.csv", "run_id,arm,epoch,M");
  const auto arms = m.at("arms").get<std::vector<std::string>>();
  const auto ids = flatten_ids(m.at("runs"));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (const auto& e : runs.at(ids[i]).history.epochs) {
      fig8.row("{},{},{},{:.6g}", ids[i], arms.at(i), e.epoch, e.memorization);
    }
  }
  out.push_back(fig8.write());
}

void forgetting_figures(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                        const std::map<std::string, RunResult>& runs, const std::filesystem::path& dir,
                        const std::string& curve_file, std::vector<std::filesystem::path>& out) {
  CsvFile curve(dir / curve_file, "run_id,label,param_count,epoch,M_special,baseline");
  CsvFile diff(dir / "fig16_diff.csv", "run_id,label,param_count,step,diff");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& r = runs.at(ids[i]);
    const auto c = forgetting_curve(r);
    if (c.values.empty()) continue;
    const double b = c.baseline();
    for (std::size_t k = 0; k < c.values.size(); ++k) {
      curve.row("{},{},{},{},{:.6g},{:.6g}", ids[i], labels.at(i), r.param_count, c.epochs[k], c.values[k], b);
    }
    const auto d = c.diff();
    for (std::size_t k = 0; k < d.size(); ++k) {
      diff.row("{},{},{},{},{:.6g}", ids[i], labels.at(i), r.param_count, k + 1, d[k]);
    }
  }
  out.push_back(curve.write());
  out.push_back(diff.write());
}

}  // namespace

std::vector<std::filesystem::path> emit_figure_data(const std::filesystem::path& log_root,
                                                    const std::string& experiment_id) {
  const auto exp_dir = log_root / experiment_id;
  const auto manifest_path = exp_dir / "experiment.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError("no experiment manifest at " + manifest_path.string());
  }
  const json m = json::parse(read_text_file(manifest_path));
  const auto kind = m.at("kind").get<std::string>();
  const auto ids = flatten_ids(m.at("runs"));
  const auto runs = load_runs(log_root, ids);
  const auto dir = exp_dir / "figures";
  std::filesystem::create_directories(dir);

  std::vector<std::filesystem::path> out;
  if (kind == "sweep-scale") {
    scale_figures(m, runs, dir, out);
  } else if (kind == "sweep-lr") {
    lr_figure(m, runs, dir, out);
  } else if (kind == "docid") {
    docid_figure(m, runs, dir, out);
  } else if (kind == "forget") {
    forgetting_figures(ids, m.at("presets").get<std::vector<std::string>>(), runs, dir, "fig10_forgetting.csv", out);
  } else if (kind == "forget-scale") {
    forgetting_figures(ids, m.at("presets").get<std::vector<std::string>>(), runs, dir, "fig10_forgetting.csv", out);
  } else if (kind == "forget-repetition") {
    forgetting_figures(ids, m.at("arms").get<std::vector<std::string>>(), runs, dir, "fig12_repetition.csv", out);
  } else {
    throw IoError("unknown experiment kind '" + kind + "' in " + manifest_path.string());
  }
  return out;
}

}  // namespace memlab
