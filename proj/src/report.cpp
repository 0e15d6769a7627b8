/* Copyright 2026 The Lowlight Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "lowlight/report.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lowlight/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace lowlight {
namespace {

std::string shortest(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string iou_tag(double iou) {
  return "C" + std::to_string(static_cast<int>(iou * 100.0 + 0.5));
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
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

ordered_json curve_json(const NamedCurve& nc) {
  ordered_json j;
  j["name"] = nc.name;
  j["iou"] = nc.iou;
  j["ap"] = nc.curve.ap;
  j["gt_count"] = nc.curve.gt_count;
  j["tp"] = nc.curve.tp_count;
  j["fp"] = nc.curve.fp_count;
  j["recall"] = nc.curve.recall;
  j["precision"] = nc.curve.precision;
  return j;
}

}  // namespace

std::vector<NamedCurve> report_curves(const EvalReport& report, bool per_class) {
  std::vector<NamedCurve> out;
  out.push_back({"C50", 0.50, report.pooled50});
  out.push_back({"C75", 0.75, report.pooled75});
  for (const ConditionCurves& c : report.conditions) {
    const std::string tag = iou_tag(c.iou_threshold);
    out.push_back({tag + " extreme-eliminated", c.iou_threshold, c.extreme_eliminated});
    out.push_back({tag + " other-eliminated", c.iou_threshold, c.other_eliminated});
  }
  if (per_class) {
    for (const ClassResult& r : report.per_class) {
      const std::string name(class_name(r.cls));
      out.push_back({name + " C50", 0.50, r.c50});
      out.push_back({name + " C75", 0.75, r.c75});
    }
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  ordered_json root;
  root["iou_thresholds"] = report.iou_thresholds;
  root["ap50"] = report.ap50;
  root["ap75"] = report.ap75;
  root["ap"] = report.ap;
  root["per_class"] = ordered_json::array();
  for (const ClassResult& r : report.per_class) {
    root["per_class"].push_back({{"class", std::string(class_name(r.cls))},
                                 {"gt_count", r.gt_count},
                                 {"ap50", r.ap50},
                                 {"ap75", r.ap75},
                                 {"ap", r.ap},
                                 {"ap_per_iou", r.ap_per_threshold}});
  }
  root["curves"] = ordered_json::array();
  for (const NamedCurve& nc : report_curves(report, true)) root["curves"].push_back(curve_json(nc));
  return root.dump(2);
}

std::vector<NamedCurve> curves_from_report_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("report: malformed JSON: ") + e.what());
  }
  std::vector<NamedCurve> out;
  try {
    for (const auto& c : root.at("curves")) {
      NamedCurve nc;
      nc.name = c.at("name").get<std::string>();
      nc.iou = c.at("iou").get<double>();
      nc.curve.ap = c.at("ap").get<double>();
      nc.curve.gt_count = c.at("gt_count").get<std::size_t>();
      nc.curve.tp_count = c.at("tp").get<std::size_t>();
      nc.curve.fp_count = c.at("fp").get<std::size_t>();
      const auto& rec = c.at("recall");
      const auto& prec = c.at("precision");
      if (rec.size() != PRCurve::kPoints || prec.size() != PRCurve::kPoints) {
        throw ValidationError("report: curve \"" + nc.name + "\" must have 101 points");
      }
      for (int i = 0; i < PRCurve::kPoints; ++i) {
        nc.curve.recall[i] = rec.at(i).get<double>();
        nc.curve.precision[i] = prec.at(i).get<double>();
      }
      out.push_back(std::move(nc));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: schema violation: ") + e.what());
  }
  return out;
}

std::string curves_csv(std::span<const NamedCurve> curves) {
  std::string out = "curve,iou,recall,precision\n";
  for (const NamedCurve& nc : curves) {
    for (int i = 0; i < PRCurve::kPoints; ++i) {
      out += nc.name + "," + shortest(nc.iou) + "," + shortest(nc.curve.recall[i]) + "," +
             shortest(nc.curve.precision[i]) + "\n";
    }
  }
  return out;
}

std::string pr_plot_svg(std::span<const NamedCurve> curves) {
  if (curves.empty()) throw ValidationError("PR plot needs at least one curve");

  constexpr double kWidth = 760;
  constexpr double kHeight = 480;
  constexpr double kLeft = 60;
  constexpr double kTop = 20;
  constexpr double kPlot = 400;  // square plot area
  constexpr double kLegendX = kLeft + kPlot + 30;
  static constexpr std::array<const char*, 8> kPalette = {
      "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  auto px = [&](double r) { return fixed(kLeft + r * kPlot, 2); };
  auto py = [&](double p) { return fixed(kTop + (1.0 - p) * kPlot, 2); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

  // Axes, grid and ticks.
  for (int i = 0; i <= 5; ++i) {
    const double t = i / 5.0;
    svg << "<line x1=\"" << px(t) << "\" y1=\"" << py(0) << "\" x2=\"" << px(t) << "\" y2=\""
        << py(1) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(t) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(t) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << px(t) << "\" y=\"" << fixed(kTop + kPlot + 18, 2)
        << "\" text-anchor=\"middle\">" << fixed(t, 1) << "</text>\n";
    svg << "<text x=\"" << fixed(kLeft - 8, 2) << "\" y=\"" << fixed(kTop + (1.0 - t) * kPlot + 4, 2)
        << "\" text-anchor=\"end\">" << fixed(t, 1) << "</text>\n";
  }
  svg << "<rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << fixed(kPlot, 2)
      << "\" height=\"" << fixed(kPlot, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << px(0.5) << "\" y=\"" << fixed(kTop + kPlot + 40, 2)
      << "\" text-anchor=\"middle\">Recall</text>\n";
  svg << "<text x=\"16\" y=\"" << py(0.5) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << py(0.5) << ")\">Precision</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const NamedCurve& nc = curves[i];
    const char* color = kPalette[i % kPalette.size()];
    const std::string ly = fixed(kTop + 10 + 20.0 * static_cast<double>(i), 2);
    if (nc.curve.defined()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (int k = 0; k < PRCurve::kPoints; ++k) {
        if (k) svg << ' ';
        svg << px(nc.curve.recall[k]) << ',' << py(nc.curve.precision[k]);
      }
      svg << "\"/>\n";
      svg << "<line x1=\"" << fixed(kLegendX, 2) << "\" y1=\"" << ly << "\" x2=\""
          << fixed(kLegendX + 20, 2) << "\" y2=\"" << ly << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << fixed(kLegendX + 26, 2) << "\" y=\"" << fixed(kTop + 14 + 20.0 * i, 2)
          << "\">" << xml_escape(nc.name) << " (AP " << fixed(nc.curve.ap * 100.0, 1)
          << ")</text>\n";
    } else {
      svg << "<text x=\"" << fixed(kLegendX + 26, 2) << "\" y=\"" << fixed(kTop + 14 + 20.0 * i, 2)
          << "\" fill=\"#888888\">" << xml_escape(nc.name) << " (no ground truth)</text>\n";
    }
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void emit_pr_plot(const EvalReport& report, const fs::path& out, bool per_class) {
  const auto curves = report_curves(report, per_class);
  write_text_file(out, pr_plot_svg(curves));
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot create " + path.string());
  out << text;
  out.flush();
  if (!out) throw WriteError("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw FileNotFoundError(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lowlight
