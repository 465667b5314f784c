// SPDX-License-Identifier: Apache-2.0
#include "mmcr/pipeline/plots.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmcr/common/error.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 64, kRight = 24, kTop = 48, kBottom = 56;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Svg {
 public:
  Svg(const std::string& title) {
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight, kWidth, kHeight);
    out_ += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
    text(kWidth / 2, 28, title, "middle", 15);
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1) {
    out_ += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                        "stroke-width=\"{:.1f}\"/>\n",
                        x1, y1, x2, y2, stroke, width);
  }
  void rect(double x, double y, double w, double h, const std::string& fill) {
    out_ += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y, w,
                        h, fill);
  }
  void circle(double x, double y, double r, const std::string& fill) {
    out_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.1f}\" fill=\"{}\"/>\n", x, y, r, fill);
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    out_ += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + stroke + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out_ += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", pts[i].first, pts[i].second);
    }
    out_ += "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 12) {
    out_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n", x, y,
                        anchor, size, escape(s));
  }
  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

double px(double x, double lo, double hi) { return kLeft + (x - lo) / (hi - lo) * (kWidth - kLeft - kRight); }
double py(double y, double lo, double hi) { return kHeight - kBottom - (y - lo) / (hi - lo) * (kHeight - kTop - kBottom); }

void axes(Svg& svg, double y_lo, double y_hi, const std::string& y_fmt_suffix) {
  svg.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black");
  svg.line(kLeft, kTop, kLeft, kHeight - kBottom, "black");
  for (int k = 0; k <= 4; ++k) {
    const double v = y_lo + (y_hi - y_lo) * k / 4.0;
    const double y = py(v, y_lo, y_hi);
    svg.line(kLeft - 4, y, kLeft, y, "black");
    svg.text(kLeft - 8, y + 4, fmt::format("{:.2f}{}", v, y_fmt_suffix), "end");
  }
}

double nice_max(double v) {
  if (v <= 0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (v <= m * mag) return m * mag;
  }
  return 10 * mag;
}

void legend(Svg& svg, const std::vector<BarSeries>& series) {
  double x = kLeft + 8;
  for (std::size_t s = 0; s < series.size(); ++s) {
    svg.rect(x, kTop - 14, 10, 10, kPalette[s % 6]);
    svg.text(x + 14, kTop - 5, series[s].name);
    x += 24 + 7.0 * static_cast<double>(series[s].name.size());
  }
}

}  // namespace

std::vector<CurvePoint> parse_sweep_csv(const std::string& text) {
  std::vector<CurvePoint> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty()) continue;
    if (n == 1 && line == "lambda,accuracy") continue;
    const auto comma = line.find(',');
    CurvePoint p;
    std::size_t used_l = 0, used_a = 0;
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      p.lambda = std::stod(line.substr(0, comma), &used_l);
      p.accuracy = std::stod(line.substr(comma + 1), &used_a);
    } catch (const std::exception&) {
      fail(ErrorCode::SchemaError, fmt::format("line {}: expected 'lambda,accuracy', got '{}'", n, line));
    }
    require(used_l == comma && used_a == line.size() - comma - 1 && std::isfinite(p.lambda) &&
                std::isfinite(p.accuracy),
            ErrorCode::SchemaError, fmt::format("line {}: malformed row '{}'", n, line));
    out.push_back(p);
  }
  require(!out.empty(), ErrorCode::SchemaError, "sweep CSV has no data rows");
  return out;
}

std::string sweep_curve_svg(const std::vector<CurvePoint>& curve, const std::string& title) {
  require(!curve.empty(), ErrorCode::SchemaError, "empty curve");
  Svg svg(title);
  axes(svg, 0.0, 1.0, "");
  for (int k = 0; k <= 4; ++k) {
    const double x = px(k / 4.0, 0, 1);
    svg.line(x, kHeight - kBottom, x, kHeight - kBottom + 4, "black");
    svg.text(x, kHeight - kBottom + 18, fmt::format("{:.2f}", k / 4.0), "middle");
  }
  svg.text(kWidth / 2, kHeight - 14, "ensemble weight (lambda)", "middle");
  std::vector<std::pair<double, double>> pts;
  std::size_t best = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    pts.emplace_back(px(curve[i].lambda, 0, 1), py(curve[i].accuracy, 0, 1));
    const auto& b = curve[best];
    if (curve[i].accuracy > b.accuracy || (curve[i].accuracy == b.accuracy && curve[i].lambda < b.lambda)) best = i;
  }
  svg.polyline(pts, kPalette[0]);
  for (const auto& [x, y] : pts) svg.circle(x, y, 2.5, kPalette[0]);
  const auto [bx, by] = pts[best];
  svg.circle(bx, by, 5, kPalette[1]);
  svg.line(bx, by, bx, kHeight - kBottom, kPalette[1]);
  svg.text(bx + 6, by - 8, fmt::format("best lambda {:.2f}, accuracy {:.4f}", curve[best].lambda, curve[best].accuracy),
           bx > kWidth * 0.6 ? "end" : "start");
  return svg.finish();
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<BarSeries>& series, double y_max) {
  require(!categories.empty() && !series.empty(), ErrorCode::SchemaError, "bar chart needs data");
  for (const auto& s : series) {
    require(s.values.size() == categories.size(), ErrorCode::SchemaError, "series " + s.name + " has wrong length");
  }
  Svg svg(title);
  axes(svg, 0.0, y_max, "");
  legend(svg, series);
  const double group = (kWidth - kLeft - kRight) / static_cast<double>(categories.size());
  const double bar = group * 0.8 / static_cast<double>(series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x0 = kLeft + group * static_cast<double>(c) + group * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = std::clamp(series[s].values[c], 0.0, y_max);
      const double top = py(v, 0, y_max);
      svg.rect(x0 + bar * static_cast<double>(s), top, bar * 0.9, kHeight - kBottom - top, kPalette[s % 6]);
      svg.text(x0 + bar * (static_cast<double>(s) + 0.45), top - 3, fmt::format("{:.1f}", series[s].values[c]),
               "middle", 10);
    }
    svg.text(x0 + group * 0.4, kHeight - kBottom + 18, categories[c], "middle");
  }
  return svg.finish();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::vector<BarSeries>& series) {
  require(!series.empty() && !series.front().values.empty(), ErrorCode::SchemaError, "line chart needs data");
  double hi = 0;
  std::size_t n = 0;
  for (const auto& s : series) {
    for (double v : s.values) hi = std::max(hi, v);
    n = std::max(n, s.values.size());
  }
  hi = nice_max(hi);
  Svg svg(title);
  axes(svg, 0.0, hi, "");
  legend(svg, series);
  const double x_hi = n > 1 ? static_cast<double>(n) : 2.0;
  for (std::size_t i = 1; i <= n; ++i) {
    svg.text(px(static_cast<double>(i), 1, x_hi), kHeight - kBottom + 18, std::to_string(i), "middle");
  }
  svg.text(kWidth / 2, kHeight - 14, x_label, "middle");
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      pts.emplace_back(px(static_cast<double>(i + 1), 1, x_hi), py(series[s].values[i], 0, hi));
    }
    svg.polyline(pts, kPalette[s % 6]);
    for (const auto& [x, y] : pts) svg.circle(x, y, 3, kPalette[s % 6]);
  }
  return svg.finish();
}

std::vector<fs::path> emit_plots(const fs::path& input, const fs::path& out_dir) {
  require(fs::exists(input), ErrorCode::IoError, "plot input not found: " + input.string());
  const std::string text = read_text_file(input);
  const std::string stem = input.stem().string();
  std::vector<std::pair<std::string, std::string>> files;  // name, svg

  auto curve_of = [](const Json& arr) {
    std::vector<CurvePoint> c;
    for (const auto& p : arr) {
      require(p.contains("lambda") && p.contains("accuracy"), ErrorCode::SchemaError, "curve point lacks fields");
      c.push_back({p["lambda"].get<double>(), p["accuracy"].get<double>()});
    }
    require(!c.empty(), ErrorCode::SchemaError, "sweep report has an empty curve");
    return c;
  };

  if (input.extension() == ".csv") {
    files.emplace_back(stem + ".svg", sweep_curve_svg(parse_sweep_csv(text), "Accuracy vs ensemble weight"));
  } else {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      fail(ErrorCode::SchemaError, input.string() + ": " + e.what());
    }
    require(j.is_object(), ErrorCode::SchemaError, input.string() + ": report is not a JSON object");
    try {
      const std::string kind = j.value("kind", "");
      if (j.contains("curve")) {
        files.emplace_back(stem + ".svg", sweep_curve_svg(curve_of(j["curve"]), "Accuracy vs ensemble weight"));
      } else if (kind == "helpful-harmful") {
        std::vector<std::string> cats;
        BarSeries helpful{"helpful %", {}}, harmful{"harmful %", {}};
        for (const auto& r : j.at("rows")) {
          const auto name = r.at("benchmark").get<std::string>();
          cats.push_back(name.empty() ? "items" : name);
          helpful.values.push_back(r.at("helpful_pct").get<double>());
          harmful.values.push_back(r.at("harmful_pct").get<double>());
        }
        files.emplace_back(stem + ".svg", bar_chart_svg("Helpful and harmful image use", cats, {helpful, harmful}, 100));
      } else if (kind == "relevance") {
        const auto name = j.at("dataset").get<std::string>();
        files.emplace_back(stem + ".svg", bar_chart_svg("Image-text relevance", {name.empty() ? "items" : name},
                                                        {{"mean relevance", {j.at("mean_relevance").get<double>()}}},
                                                        100));
      } else if (j.contains("epochs")) {
        std::vector<BarSeries> series{{"lm", {}}, {"itm", {}}, {"joint", {}}, {"total", {}}};
        for (const auto& e : j.at("epochs")) {
          const auto& ml = e.at("mean_loss");
          series[0].values.push_back(ml.at("lm").get<double>());
          series[1].values.push_back(ml.at("itm").get<double>());
          series[2].values.push_back(ml.at("joint").get<double>());
          series[3].values.push_back(e.at("mean_total").get<double>());
        }
        files.emplace_back(stem + ".svg", line_chart_svg("Training loss per epoch", "epoch", series));
      } else {
        fail(ErrorCode::SchemaError, input.string() + ": not a sweep, train or analysis report");
      }
    } catch (const Json::exception& e) {
      fail(ErrorCode::SchemaError, input.string() + ": " + e.what());
    }
  }

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& [name, svg] : files) {
    written.push_back(out_dir / name);
    write_file_atomic(written.back(), svg);
  }
  return written;
}

}  // namespace mmcr
