// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct TrendOptions {
  std::filesystem::path log_root;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
};

/// Criteria 1-5: exact checks that finish in minutes.
std::vector<Outcome> run_property_suite();

/// Criteria 6-16: qualitative trends on the desk grid, majority of seeds.
std::vector<Outcome> run_trend_suite(const TrendOptions& options);

void print_outcome(const Outcome& o);

}  // namespace acceptance
