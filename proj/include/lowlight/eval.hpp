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
#ifndef LOWLIGHT_EVAL_HPP_
#define LOWLIGHT_EVAL_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lowlight/annotations.hpp"

namespace lowlight {

// AP value reported when a curve has no ground truth to recall.
inline constexpr double kNoGroundTruth = -1.0;

double iou(const BBox& a, const BBox& b);

struct MatchSet {
  struct DetectionMatch {
    bool tp = false;
    std::optional<std::size_t> instance;  // index into the instance span
    double iou = 0.0;
  };

  double iou_threshold = 0.5;
  std::vector<DetectionMatch> detections;  // parallel to the input detections
  std::vector<bool> instance_matched;      // parallel to the input instances
};

// Greedy COCO matching within one (image, class) partition. Detections are
// visited by descending score, ties in input order; each takes the unmatched
// instance of highest IoU >= threshold (ties to the lower index) or becomes a
// false positive.
MatchSet match_detections(std::span<const Detection> dets,
                          std::span<const Instance> instances, double iou_threshold);

// One ranked detection outcome. `order` breaks score ties (lower first).
struct ScoredOutcome {
  double score = 0.0;
  bool tp = false;
  std::size_t order = 0;
};

// 101-point interpolated precision/recall curve.
struct PRCurve {
  static constexpr int kPoints = 101;

  std::array<double, kPoints> recall{};     // 0.00, 0.01, ..., 1.00
  std::array<double, kPoints> precision{};  // kNoGroundTruth when undefined
  double ap = kNoGroundTruth;
  std::size_t gt_count = 0;
  std::size_t tp_count = 0;
  std::size_t fp_count = 0;

  bool defined() const { return ap != kNoGroundTruth; }
};

// The recall sampling grid, computed the way pycocotools does (i * 0.01).
const std::array<double, PRCurve::kPoints>& recall_grid();

PRCurve pr_curve(std::span<const ScoredOutcome> outcomes, std::size_t gt_count);

// What happens to instances removed by EvalOptions::filter.
enum class ExcludedPolicy {
  kRemove,  // dropped from the ground truth; detections on them count as fp
  kIgnore,  // kept as ignore regions; detections matched to them are discarded
};

struct EvalOptions {
  InstanceFilter filter;
  ExcludedPolicy excluded = ExcludedPolicy::kRemove;
  std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                        0.75, 0.80, 0.85, 0.90, 0.95};
  bool extreme_analysis = false;
  double attribution_iou = 0.1;
  int jobs = 1;
};

struct ClassResult {
  ObjectClass cls = ObjectClass::kPerson;
  std::size_t gt_count = 0;
  std::vector<double> ap_per_threshold;
  double ap50 = kNoGroundTruth;
  double ap75 = kNoGroundTruth;
  double ap = kNoGroundTruth;
  PRCurve c50;
  PRCurve c75;
};

// Base curve and the two error-elimination curves at one IoU threshold.
struct ConditionCurves {
  double iou_threshold = 0.5;
  PRCurve base;
  PRCurve extreme_eliminated;
  PRCurve other_eliminated;
};

struct EvalReport {
  std::vector<double> iou_thresholds;
  double ap50 = kNoGroundTruth;  // mean over classes with ground truth
  double ap75 = kNoGroundTruth;
  double ap = kNoGroundTruth;    // mean over all thresholds
  std::vector<ClassResult> per_class;
  PRCurve pooled50;  // all classes ranked together
  PRCurve pooled75;
  std::vector<ConditionCurves> conditions;  // at 0.50 and 0.75 when requested
};

// Throws ValidationError for detections on unknown images or for threshold
// lists missing 0.50 / 0.75.
EvalReport evaluate(std::span<const Detection> dets, const AnnotationSet& set,
                    const EvalOptions& options = {});

// Error-elimination analysis. A missed instance is extreme-attributed iff it
// is flagged extreme. A false positive is extreme-attributed iff its max-IoU
// instance of the same image and class (IoU >= attribution_iou, ties to the
// lower index) is flagged extreme; otherwise, including when no instance
// qualifies, it is other-attributed. Curves are pooled over classes.
// Throws ValidationError if any instance lacks the extreme flag.
ConditionCurves conditional_eval(std::span<const Detection> dets,
                                 const AnnotationSet& set, double iou_threshold,
                                 double attribution_iou = 0.1, int jobs = 1);

}  // namespace lowlight

#endif  // LOWLIGHT_EVAL_HPP_
