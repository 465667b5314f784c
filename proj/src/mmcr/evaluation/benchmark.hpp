// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmcr/dataset/types.hpp"
#include "mmcr/inference/inference.hpp"

namespace mmcr {

// Format adapters for public multiple-choice benchmark files (JSON Lines):
//   normalized  {id, question, choices[], answer_index}        (our own format)
//   csqa        {id, question:{stem, choices[{label,text}]}, answerKey}
//               also ARC, OpenBookQA and QASC
//   piqa        {goal, sol1, sol2, label}
//   siqa        {context, question, answerA..C, label "1".."3"}
//   winogrande  {sentence with "_", option1, option2, answer "1"/"2"}
//   anli        {obs1, obs2, hyp1, hyp2, label 1/2}
//   sciq        {question, correct_answer, distractor1..3}
struct BenchmarkSpec {
  std::string name;
  std::string format = "normalized";
  int n_choices = 0;  // 0 accepts any count >= 2
  std::map<std::string, fs::path> splits;

  const fs::path& split(const std::string& split_name) const;
};

// Built-in spec for a known benchmark name (aNLI, CSQA, PIQA, SIQA, WG, QASC,
// SciQ, ARC-E, ARC-C, OBQA) with the given split files. InvalidInput for an
// unknown name.
BenchmarkSpec known_benchmark(const std::string& name, std::map<std::string, fs::path> splits);
std::vector<std::string> known_benchmark_names();

// Items in file order. Schema mismatches, wrong choice counts and
// out-of-range gold raise SchemaError carrying "path:line".
std::vector<QAPair> load_benchmark(const BenchmarkSpec& spec, const std::string& split = "dev");

struct Gold {
  std::string id;
  int answer_index = 0;
};

struct AccuracyResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;     // non-excluded
  std::size_t excluded = 0;  // predictions carrying an error
};

// Predictions and golds must list the same ids in the same order
// (AlignmentError otherwise). InvalidInput when every item is excluded.
AccuracyResult accuracy(std::span<const Prediction> predictions, std::span<const Gold> golds);

std::vector<Gold> golds_of(const std::vector<VQAPair>& pairs);

}  // namespace mmcr
