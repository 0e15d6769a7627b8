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
#include "lowlight/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "lowlight/error.hpp"
#include "lowlight/parallel.hpp"

namespace lowlight {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

namespace {

enum class Outcome { kFp, kTp, kIgnored };

struct DetOutcome {
  Outcome kind = Outcome::kFp;
  std::optional<std::size_t> instance;
  double iou = 0.0;
};

// Visiting order for a partition's detections: score descending, stable.
std::vector<std::size_t> rank_by_score(std::span<const Detection> dets,
                                       std::span<const std::size_t> idx) {
  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

// Greedy matching over detection indices `det_idx` and instance indices
// `gt_idx` (both into the global arrays). Non-ignored instances are preferred;
// a detection that only overlaps an ignored instance is itself ignored.
// gt_matched is indexed by position in gt_idx.
void match_partition(std::span<const Detection> dets, std::span<const std::size_t> det_idx,
                     std::span<const Instance> gts, const std::vector<bool>& ignore,
                     std::span<const std::size_t> gt_idx, double threshold,
                     std::span<DetOutcome> det_out, std::vector<bool>& gt_matched) {
  gt_matched.assign(gt_idx.size(), false);
  const std::vector<std::size_t> order = rank_by_score(dets, det_idx);
  for (const std::size_t d : order) {
    DetOutcome result;
    for (const bool want_ignored : {false, true}) {
      double best = -1.0;
      std::optional<std::size_t> pick;
      for (std::size_t j = 0; j < gt_idx.size(); ++j) {
        const std::size_t g = gt_idx[j];
        if (gt_matched[j] || (!ignore.empty() && ignore[g]) != want_ignored) continue;
        const double v = iou(dets[d].bbox, gts[g].bbox);
        if (v >= threshold && v > best) {
          best = v;
          pick = j;
        }
      }
      if (pick) {
        gt_matched[*pick] = true;
        result = {want_ignored ? Outcome::kIgnored : Outcome::kTp, gt_idx[*pick], best};
        break;
      }
      if (ignore.empty()) break;
    }
    det_out[d] = result;
  }
}

struct GroundTruth {
  std::vector<Instance> instances;
  std::vector<bool> ignore;  // empty when nothing is ignored
};

// Detections and instances grouped by (image, class).
struct Partitions {
  std::vector<std::vector<std::size_t>> dets;
  std::vector<std::vector<std::size_t>> gts;
  std::vector<std::size_t> used;
};

Partitions partition(std::span<const Detection> dets, const GroundTruth& gt,
                     const AnnotationSet& set) {
  std::unordered_map<std::int64_t, std::size_t> image_pos;
  for (std::size_t i = 0; i < set.images.size(); ++i) image_pos.emplace(set.images[i].id, i);

  Partitions p;
  const std::size_t n = set.images.size() * kNumClasses;
  p.dets.resize(n);
  p.gts.resize(n);
  auto slot = [&](std::int64_t image_id, ObjectClass cls, const char* what, std::size_t i) {
    const auto it = image_pos.find(image_id);
    if (it == image_pos.end()) {
      throw ValidationError(std::string(what) + " #" + std::to_string(i) +
                            " references unknown image_id " + std::to_string(image_id));
    }
    return it->second * kNumClasses + static_cast<std::size_t>(cls);
  };
  for (std::size_t i = 0; i < dets.size(); ++i) {
    p.dets[slot(dets[i].image_id, dets[i].cls, "detection", i)].push_back(i);
  }
  for (std::size_t i = 0; i < gt.instances.size(); ++i) {
    p.gts[slot(gt.instances[i].image_id, gt.instances[i].cls, "instance", i)].push_back(i);
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!p.dets[s].empty() || !p.gts[s].empty()) p.used.push_back(s);
  }
  return p;
}

struct GlobalMatch {
  std::vector<DetOutcome> dets;
  std::vector<bool> gt_matched;
};

GlobalMatch match_all(std::span<const Detection> dets, const GroundTruth& gt,
                      const Partitions& parts, double threshold, int jobs) {
  GlobalMatch m;
  m.dets.resize(dets.size());
  // vector<bool> packs bits, so each partition gets its own scratch vector
  // and results are merged after the parallel section.
  std::vector<std::vector<bool>> matched(parts.used.size());
  parallel_for(parts.used.size(), jobs, [&](std::size_t k) {
    const std::size_t s = parts.used[k];
    match_partition(dets, parts.dets[s], gt.instances, gt.ignore, parts.gts[s], threshold,
                    m.dets, matched[k]);
  });
  m.gt_matched.assign(gt.instances.size(), false);
  for (std::size_t k = 0; k < parts.used.size(); ++k) {
    const auto& local = parts.gts[parts.used[k]];
    for (std::size_t j = 0; j < local.size(); ++j) {
      if (matched[k][j]) m.gt_matched[local[j]] = true;
    }
  }
  return m;
}

std::size_t counted_gts(const GroundTruth& gt, std::optional<ObjectClass> cls) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.instances.size(); ++i) {
    if (!gt.ignore.empty() && gt.ignore[i]) continue;
    if (cls && gt.instances[i].cls != *cls) continue;
    ++n;
  }
  return n;
}

std::vector<ScoredOutcome> outcomes_for(std::span<const Detection> dets,
                                        const GlobalMatch& m,
                                        std::optional<ObjectClass> cls) {
  std::vector<ScoredOutcome> out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (m.dets[i].kind == Outcome::kIgnored) continue;
    if (cls && dets[i].cls != *cls) continue;
    out.push_back({dets[i].score, m.dets[i].kind == Outcome::kTp, i});
  }
  return out;
}

double mean_defined(std::span<const double> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const double v : values) {
    if (v == kNoGroundTruth) continue;
    sum += v;
    ++n;
  }
  return n == 0 ? kNoGroundTruth : sum / static_cast<double>(n);
}

std::size_t threshold_index(std::span<const double> thresholds, double t) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (std::abs(thresholds[i] - t) < 1e-9) return i;
  }
  throw ValidationError("IoU threshold list must contain " + std::to_string(t));
}

ConditionCurves condition_curves(std::span<const Detection> dets, const GroundTruth& gt,
                                 const Partitions& parts, double threshold,
                                 double attribution_iou, int jobs) {
  for (std::size_t i = 0; i < gt.instances.size(); ++i) {
    if (!gt.ignore.empty() && gt.ignore[i]) continue;
    if (!gt.instances[i].extreme) {
      throw ValidationError("extreme-light analysis needs the extreme flag on every instance; "
                            "instance " + std::to_string(gt.instances[i].id) + " has none");
    }
  }
  const GlobalMatch m = match_all(dets, gt, parts, threshold, jobs);

  // Attribute each false positive through its best-overlapping instance.
  std::vector<bool> fp_extreme(dets.size(), false);
  for (const std::size_t s : parts.used) {
    for (const std::size_t d : parts.dets[s]) {
      if (m.dets[d].kind != Outcome::kFp) continue;
      double best = -1.0;
      std::optional<std::size_t> pick;
      for (const std::size_t g : parts.gts[s]) {
        if (!gt.ignore.empty() && gt.ignore[g]) continue;
        const double v = iou(dets[d].bbox, gt.instances[g].bbox);
        if (v >= attribution_iou && v > best) {
          best = v;
          pick = g;
        }
      }
      fp_extreme[d] = pick && *gt.instances[*pick].extreme;
    }
  }

  std::size_t total = 0;
  std::size_t missed_extreme = 0;
  std::size_t missed_other = 0;
  for (std::size_t g = 0; g < gt.instances.size(); ++g) {
    if (!gt.ignore.empty() && gt.ignore[g]) continue;
    ++total;
    if (m.gt_matched[g]) continue;
    if (*gt.instances[g].extreme) {
      ++missed_extreme;
    } else {
      ++missed_other;
    }
  }

  const std::vector<ScoredOutcome> all = outcomes_for(dets, m, std::nullopt);
  std::vector<ScoredOutcome> without_extreme;
  std::vector<ScoredOutcome> without_other;
  for (const ScoredOutcome& o : all) {
    const bool extreme_fp = !o.tp && fp_extreme[o.order];
    const bool other_fp = !o.tp && !fp_extreme[o.order];
    if (!extreme_fp) without_extreme.push_back(o);
    if (!other_fp) without_other.push_back(o);
  }

  ConditionCurves c;
  c.iou_threshold = threshold;
  c.base = pr_curve(all, total);
  c.extreme_eliminated = pr_curve(without_extreme, total - missed_extreme);
  c.other_eliminated = pr_curve(without_other, total - missed_other);
  return c;
}

GroundTruth ground_truth(const AnnotationSet& set, const EvalOptions& options) {
  GroundTruth gt;
  if (!options.filter.active()) {
    gt.instances = set.instances;
  } else if (options.excluded == ExcludedPolicy::kRemove) {
    gt.instances = filter_instances(set, options.filter).instances;
  } else {
    gt.instances = set.instances;
    gt.ignore.reserve(set.instances.size());
    for (const auto& inst : set.instances) gt.ignore.push_back(!keep_instance(inst, options.filter));
  }
  return gt;
}

}  // namespace

MatchSet match_detections(std::span<const Detection> dets,
                          std::span<const Instance> instances, double iou_threshold) {
  std::vector<std::size_t> det_idx(dets.size());
  std::iota(det_idx.begin(), det_idx.end(), 0);
  std::vector<std::size_t> gt_idx(instances.size());
  std::iota(gt_idx.begin(), gt_idx.end(), 0);

  std::vector<DetOutcome> out(dets.size());
  std::vector<bool> matched;
  const std::vector<bool> no_ignore;
  match_partition(dets, det_idx, instances, no_ignore, gt_idx, iou_threshold, out, matched);

  MatchSet m;
  m.iou_threshold = iou_threshold;
  m.instance_matched = std::move(matched);
  m.detections.reserve(out.size());
  for (const DetOutcome& o : out) {
    m.detections.push_back({o.kind == Outcome::kTp, o.instance, o.iou});
  }
  return m;
}

const std::array<double, PRCurve::kPoints>& recall_grid() {
  static const std::array<double, PRCurve::kPoints> grid = [] {
    std::array<double, PRCurve::kPoints> g{};
    for (int i = 0; i < PRCurve::kPoints; ++i) g[i] = static_cast<double>(i) * 0.01;
    g.back() = 1.0;
    return g;
  }();
  return grid;
}

PRCurve pr_curve(std::span<const ScoredOutcome> outcomes, std::size_t gt_count) {
  PRCurve curve;
  curve.recall = recall_grid();
  curve.gt_count = gt_count;
  for (const auto& o : outcomes) (o.tp ? curve.tp_count : curve.fp_count) += 1;
  if (gt_count == 0) {
    curve.precision.fill(kNoGroundTruth);
    curve.ap = kNoGroundTruth;
    return curve;
  }

  std::vector<ScoredOutcome> ranked(outcomes.begin(), outcomes.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const ScoredOutcome& a, const ScoredOutcome& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.order < b.order;
  });

  const std::size_t n = ranked.size();
  std::vector<double> rec(n);
  std::vector<double> prec(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked[i].tp) ++tp;
    rec[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
    prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Precision envelope: best precision at any equal or higher recall.
  for (std::size_t i = n; i-- > 1;) prec[i - 1] = std::max(prec[i - 1], prec[i]);

  double sum = 0.0;
  for (int t = 0; t < PRCurve::kPoints; ++t) {
    const auto it = std::lower_bound(rec.begin(), rec.end(), curve.recall[t]);
    const double p = it == rec.end() ? 0.0 : prec[static_cast<std::size_t>(it - rec.begin())];
    curve.precision[t] = p;
    sum += p;
  }
  curve.ap = sum / PRCurve::kPoints;
  return curve;
}

EvalReport evaluate(std::span<const Detection> dets, const AnnotationSet& set,
                    const EvalOptions& options) {
  if (options.iou_thresholds.empty()) throw ValidationError("no IoU thresholds given");
  for (const double t : options.iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("IoU thresholds must be in (0,1]");
  }
  const std::size_t i50 = threshold_index(options.iou_thresholds, 0.50);
  const std::size_t i75 = threshold_index(options.iou_thresholds, 0.75);

  const GroundTruth gt = ground_truth(set, options);
  const Partitions parts = partition(dets, gt, set);

  EvalReport report;
  report.iou_thresholds = options.iou_thresholds;
  for (const ObjectClass c : kAllClasses) {
    ClassResult r;
    r.cls = c;
    r.gt_count = counted_gts(gt, c);
    report.per_class.push_back(std::move(r));
  }

  std::vector<double> map_per_threshold;
  for (std::size_t t = 0; t < options.iou_thresholds.size(); ++t) {
    const GlobalMatch m = match_all(dets, gt, parts, options.iou_thresholds[t], options.jobs);
    std::vector<double> class_ap;
    for (ClassResult& r : report.per_class) {
      const PRCurve curve = pr_curve(outcomes_for(dets, m, r.cls), r.gt_count);
      r.ap_per_threshold.push_back(curve.ap);
      class_ap.push_back(curve.ap);
      if (t == i50) r.c50 = curve;
      if (t == i75) r.c75 = curve;
    }
    map_per_threshold.push_back(mean_defined(class_ap));
    if (t == i50 || t == i75) {
      const PRCurve pooled = pr_curve(outcomes_for(dets, m, std::nullopt), counted_gts(gt, std::nullopt));
      (t == i50 ? report.pooled50 : report.pooled75) = pooled;
    }
  }

  for (ClassResult& r : report.per_class) {
    r.ap50 = r.ap_per_threshold[i50];
    r.ap75 = r.ap_per_threshold[i75];
    r.ap = mean_defined(r.ap_per_threshold);
  }
  report.ap50 = map_per_threshold[i50];
  report.ap75 = map_per_threshold[i75];
  report.ap = mean_defined(map_per_threshold);

  if (options.extreme_analysis) {
    for (const double t : {0.50, 0.75}) {
      report.conditions.push_back(
          condition_curves(dets, gt, parts, t, options.attribution_iou, options.jobs));
    }
  }
  return report;
}

ConditionCurves conditional_eval(std::span<const Detection> dets, const AnnotationSet& set,
                                 double iou_threshold, double attribution_iou, int jobs) {
  GroundTruth gt;
  gt.instances = set.instances;
  const Partitions parts = partition(dets, gt, set);
  return condition_curves(dets, gt, parts, iou_threshold, attribution_iou, jobs);
}

}  // namespace lowlight
