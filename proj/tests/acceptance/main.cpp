// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: prints one PASS/FAIL line per criterion.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "memlab/harness.hpp"
#include "suite.hpp"

namespace acceptance {

void print_outcome(const Outcome& o) {
  fmt::print("{} [{:>2}] {}: {}\n", o.pass ? "PASS" : "FAIL", o.id, o.name, o.detail);
  std::fflush(stdout);
}

}  // namespace acceptance

int main(int argc, char** argv) {
  CLI::App app{"memlab acceptance criteria"};
  std::string suite = "property";
  std::string log_root;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  app.add_option("--suite", suite, "property | trend | all")->check(CLI::IsMember({"property", "trend", "all"}));
  app.add_option("--log-root", log_root, "where trend runs are written (reused when complete)");
  app.add_option("--seeds", seeds, "trend seeds")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::vector<acceptance::Outcome> outcomes;
  try {
    if (suite == "property" || suite == "all") {
      auto o = acceptance::run_property_suite();
      outcomes.insert(outcomes.end(), o.begin(), o.end());
    }
    if (suite == "trend" || suite == "all") {
      acceptance::TrendOptions opts;
      opts.log_root = log_root.empty() ? memlab::default_log_root() / "acceptance" : std::filesystem::path(log_root);
      opts.seeds = seeds;
      auto o = acceptance::run_trend_suite(opts);
      outcomes.insert(outcomes.end(), o.begin(), o.end());
    }
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << "\n";
    return 1;
  }

  std::size_t passed = 0;
  for (const auto& o : outcomes) passed += o.pass;
  fmt::print("{}/{} criteria passed\n", passed, outcomes.size());
  return passed == outcomes.size() ? 0 : 1;
}
