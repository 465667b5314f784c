// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <cmath>

namespace mmcr::testing {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(MMCR_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ScoreVector two_way_scores(double a, double b) {
  ScoreVector sv;
  sv.lm = {std::log(a), std::log(1.0 - a)};
  sv.itm = {std::log(b), std::log(1.0 - b)};
  sv.joint = {0.5 * (sv.lm[0] + sv.itm[0]), 0.5 * (sv.lm[1] + sv.itm[1])};
  sv.degenerate = {false, false};
  sv.errors = {"", ""};
  sv.lm_ok = {true, true};
  return sv;
}

std::vector<ScoredItem> flip_fixture() {
  // Gold is always 0. With lambda = 0.5 the ensembled p(0) is (a + b) / 2.
  const double table[10][2] = {
      {0.40, 0.80},  // helpful: 0.40 -> 0.60
      {0.45, 0.70},  // helpful: 0.45 -> 0.575
      {0.60, 0.10},  // harmful: 0.60 -> 0.35
      {0.90, 0.50}, {0.70, 0.60}, {0.80, 0.90},  // right both ways
      {0.20, 0.30}, {0.30, 0.45}, {0.10, 0.60},  // wrong both ways
      {0.65, 0.40},                              // right both ways (0.525)
  };
  std::vector<ScoredItem> items;
  for (int i = 0; i < 10; ++i) {
    items.push_back({"flip-" + std::to_string(i), two_way_scores(table[i][0], table[i][1]), 0});
  }
  return items;
}

std::vector<ScoredItem> sweep_fixture() {
  // (1 - l) a + l b > 1/2 holds for l > 0.48 with (0.26, 0.76) and for
  // l < 0.52 with (0.76, 0.26).
  return {
      {"s1", two_way_scores(0.26, 0.76), 0},
      {"s2", two_way_scores(0.26, 0.76), 0},
      {"s3", two_way_scores(0.76, 0.26), 0},
      {"s4", two_way_scores(0.76, 0.26), 0},
  };
}

}  // namespace mmcr::testing
