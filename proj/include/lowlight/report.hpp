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
#ifndef LOWLIGHT_REPORT_HPP_
#define LOWLIGHT_REPORT_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lowlight/eval.hpp"

namespace lowlight {

struct NamedCurve {
  std::string name;
  double iou = 0.5;
  PRCurve curve;
};

// Curves in a report, in a fixed order: pooled C50 and C75, then the
// elimination curves if present, then per-class curves when requested.
std::vector<NamedCurve> report_curves(const EvalReport& report, bool per_class = true);

// Full report as JSON. Every curve from report_curves(report, true) is
// embedded under "curves".
std::string report_json(const EvalReport& report);

// Reads back the "curves" array of a report_json document.
std::vector<NamedCurve> curves_from_report_json(std::string_view text);

// One row per curve point: curve,iou,recall,precision.
std::string curves_csv(std::span<const NamedCurve> curves);

// Precision-recall plot over [0,1] x [0,1], one polyline per defined curve.
// Curves without ground truth are listed in the legend but not drawn.
// Throws ValidationError when `curves` is empty.
std::string pr_plot_svg(std::span<const NamedCurve> curves);

void emit_pr_plot(const EvalReport& report, const std::filesystem::path& out,
                  bool per_class = false);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace lowlight

#endif  // LOWLIGHT_REPORT_HPP_
