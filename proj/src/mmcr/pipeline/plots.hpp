// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mmcr/common/io.hpp"

namespace mmcr {

struct CurvePoint {
  double lambda = 0.0;
  double accuracy = 0.0;
};

// "lambda,accuracy" CSV as written by sweep. SchemaError (with line number)
// on malformed rows or when no data rows are present.
std::vector<CurvePoint> parse_sweep_csv(const std::string& text);

// Accuracy-vs-lambda line chart with the optimum (first maximum) marked.
std::string sweep_curve_svg(const std::vector<CurvePoint>& curve, const std::string& title);

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category
};

// Grouped bar chart; every series must have one value per category.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<BarSeries>& series, double y_max);

// Line chart of several named series over x = 1..n.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::vector<BarSeries>& series);

// Renders whatever `input` holds: a sweep CSV, or a JSON report from sweep,
// train or analyze. Writes <stem>.svg files into out_dir and returns them.
// Output bytes are a pure function of the input bytes.
std::vector<fs::path> emit_plots(const fs::path& input, const fs::path& out_dir);

}  // namespace mmcr
