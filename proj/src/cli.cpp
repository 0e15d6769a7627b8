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
#include "lowlight/cli.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowlight/annotations.hpp"
#include "lowlight/augment.hpp"
#include "lowlight/corrupt.hpp"
#include "lowlight/error.hpp"
#include "lowlight/eval.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/parallel.hpp"
#include "lowlight/report.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace lowlight::cli {
namespace {

constexpr const char* kRunManifest = "run.json";

// Effective parameters of a run. Output locations and --jobs are left out on
// purpose: neither changes the bytes written, and the manifest sits inside
// the output tree.
void write_run_manifest(const fs::path& path, const std::string& command,
                        const ordered_json& params) {
  ordered_json j;
  j["command"] = command;
  j["parameters"] = params;
  write_text_file(path, j.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw WriteError("cannot create " + dir.string() + ": " + ec.message());
}

// A file argument or every image inside a directory argument.
std::vector<fs::path> image_inputs(const fs::path& p) {
  std::error_code ec;
  if (fs::is_directory(p, ec)) return list_images(p);
  if (!fs::is_regular_file(p, ec)) throw FileNotFoundError(p.string());
  return {p};
}

struct AttrFlags {
  AttributeKeys keys;
  void add(CLI::App* app) {
    app->add_option("--attr-container", keys.container,
                    "annotation sub-object holding the lighting flags (empty: top level)")
        ->capture_default_str();
    app->add_option("--attr-extreme", keys.extreme, "key of the extreme flag")->capture_default_str();
    app->add_option("--attr-truncated", keys.truncated, "key of the truncated flag")
        ->capture_default_str();
    app->add_option("--attr-occluded", keys.occluded, "key of the occluded flag")
        ->capture_default_str();
  }
};

ordered_json to_json(const CorruptionConfig& c) {
  return {{"k_min", c.k_min},
          {"k_max", c.k_max},
          {"photon_scale_min", c.photon_scale_min},
          {"photon_scale_max", c.photon_scale_max},
          {"patch_side", c.patch_side}};
}

ordered_json to_json(const LightAugConfig& c) {
  return {{"alpha_limit", c.alpha_limit},
          {"delta_limit", c.delta_limit},
          {"patch_frac_min", c.patch_frac_min},
          {"patch_frac_max", c.patch_frac_max}};
}

ordered_json to_json(const ShuffleConfig& c) { return {{"block", c.block}, {"prob", c.prob}}; }

// ---------------------------------------------------------------------------

struct CorruptArgs {
  fs::path src_dir;
  fs::path out_dir;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  CorruptionConfig cfg;
};

void add_corrupt(CLI::App& app, CorruptArgs& a) {
  auto* sub = app.add_subcommand("corrupt", "generate (corrupted, clean) restoration pairs");
  sub->add_option("--src-dir,--src_dir", a.src_dir, "directory of clean source images")->required();
  sub->add_option("--out-dir,--out_dir", a.out_dir, "output directory")->required();
  sub->add_option("--count", a.count, "number of pairs")->capture_default_str();
  sub->add_option("--seed", a.seed, "master seed")->capture_default_str();
  sub->add_option("--jobs", a.jobs, "worker threads")->capture_default_str();
  sub->add_option("--k-min,--k_min", a.cfg.k_min)->capture_default_str();
  sub->add_option("--k-max,--k_max", a.cfg.k_max)->capture_default_str();
  sub->add_option("--photon-scale-min,--photon_scale_min", a.cfg.photon_scale_min)
      ->capture_default_str();
  sub->add_option("--photon-scale-max,--photon_scale_max", a.cfg.photon_scale_max)
      ->capture_default_str();
  sub->add_option("--patch-side,--patch_side", a.cfg.patch_side)->capture_default_str();
}

int run_corrupt(const CorruptArgs& a, std::ostream& err) {
  a.cfg.validate();
  generate_restoration_dataset(a.src_dir, a.cfg, a.out_dir, a.count, a.seed, a.jobs);
  ordered_json params = to_json(a.cfg);
  params["src_dir"] = a.src_dir.string();
  params["count"] = a.count;
  params["seed"] = a.seed;
  write_run_manifest(a.out_dir / kRunManifest, "corrupt", params);
  err << "wrote " << a.count << " pairs to " << a.out_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  fs::path input;
  fs::path out_dir;
  fs::path ann;
  std::string mode = "light";
  std::uint64_t seed = 0;
  int jobs = 1;
  LightAugConfig light;
  ShuffleConfig shuffle;
  AttrFlags attrs;
};

void add_augment(CLI::App& app, AugmentArgs& a) {
  auto* sub = app.add_subcommand("augment", "patch-wise light and/or block-shuffle augmentation");
  sub->add_option("--input,--input-dir,--input_dir", a.input, "image file or directory")->required();
  sub->add_option("--out-dir,--out_dir", a.out_dir, "output directory")->required();
  sub->add_option("--mode", a.mode, "light | shuffle | both")
      ->check(CLI::IsMember({"light", "shuffle", "both"}))
      ->capture_default_str();
  sub->add_option("--ann", a.ann, "COCO annotations supplying shuffle regions (by file_name)");
  sub->add_option("--seed", a.seed, "master seed")->capture_default_str();
  sub->add_option("--jobs", a.jobs, "worker threads")->capture_default_str();
  sub->add_option("--alpha-limit,--alpha_limit", a.light.alpha_limit)->capture_default_str();
  sub->add_option("--delta-limit,--delta_limit", a.light.delta_limit)->capture_default_str();
  sub->add_option("--patch-frac-min,--patch_frac_min", a.light.patch_frac_min)->capture_default_str();
  sub->add_option("--patch-frac-max,--patch_frac_max", a.light.patch_frac_max)->capture_default_str();
  sub->add_option("--block", a.shuffle.block)->capture_default_str();
  sub->add_option("--prob", a.shuffle.prob)->capture_default_str();
  a.attrs.add(sub);
}

// Integer pixel region covering a box, clipped to the image; invalid if empty.
Region box_region(const BBox& b, int width, int height) {
  const int x0 = std::clamp(static_cast<int>(std::lround(b.x)), 0, width);
  const int y0 = std::clamp(static_cast<int>(std::lround(b.y)), 0, height);
  const int x1 = std::clamp(static_cast<int>(std::lround(b.x + b.w)), 0, width);
  const int y1 = std::clamp(static_cast<int>(std::lround(b.y + b.h)), 0, height);
  return {x0, y0, x1 - x0, y1 - y0};
}

int run_augment(const AugmentArgs& a, std::ostream& err) {
  const bool light = a.mode != "shuffle";
  const bool shuffle = a.mode != "light";
  if (light) a.light.validate();
  if (shuffle) {
    a.shuffle.validate();
    if (a.ann.empty()) throw ValidationError("--mode " + a.mode + " needs --ann for regions");
  }

  std::map<std::string, std::vector<BBox>> boxes;
  if (shuffle) {
    const AnnotationSet set = load_annotations(a.ann, a.attrs.keys);
    for (const Instance& inst : set.instances) {
      boxes[set.find_image(inst.image_id)->file_name].push_back(inst.bbox);
    }
  }

  const std::vector<fs::path> inputs = image_inputs(a.input);
  ensure_dir(a.out_dir);
  parallel_for(inputs.size(), a.jobs, [&](std::size_t i) {
    const RngStream rng = item_stream(a.seed, i);
    ImageBuffer img = load_image(inputs[i]);
    if (light) {
      RngStream r = rng.derive(0);
      img = patch_light_augment(img, a.light, r);
    }
    if (shuffle) {
      std::vector<Region> regions;
      if (const auto it = boxes.find(inputs[i].filename().string()); it != boxes.end()) {
        for (const BBox& b : it->second) {
          const Region r = box_region(b, img.width(), img.height());
          if (r.valid()) regions.push_back(r);
        }
      }
      RngStream r = rng.derive(1);
      img = block_shuffle(img, regions, a.shuffle, r);
    }
    save_png(img, a.out_dir / (inputs[i].stem().string() + ".png"));
  });

  ordered_json params;
  params["input"] = a.input.string();
  params["mode"] = a.mode;
  params["seed"] = a.seed;
  if (light) params["light"] = to_json(a.light);
  if (shuffle) {
    params["shuffle"] = to_json(a.shuffle);
    params["ann"] = a.ann.string();
  }
  write_run_manifest(a.out_dir / kRunManifest, "augment", params);
  err << "augmented " << inputs.size() << " images into " << a.out_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EqualizeArgs {
  fs::path input;
  fs::path out_dir;
  int jobs = 1;
};

void add_equalize(CLI::App& app, EqualizeArgs& a) {
  auto* sub = app.add_subcommand("equalize", "per-channel histogram equalization baseline");
  sub->add_option("--input,--input-dir,--input_dir", a.input, "image file or directory")->required();
  sub->add_option("--out-dir,--out_dir", a.out_dir, "output directory")->required();
  sub->add_option("--jobs", a.jobs, "worker threads")->capture_default_str();
}

int run_equalize(const EqualizeArgs& a, std::ostream& err) {
  const std::vector<fs::path> inputs = image_inputs(a.input);
  ensure_dir(a.out_dir);
  parallel_for(inputs.size(), a.jobs, [&](std::size_t i) {
    save_png(histogram_equalize(load_image(inputs[i])),
             a.out_dir / (inputs[i].stem().string() + ".png"));
  });
  write_run_manifest(a.out_dir / kRunManifest, "equalize", {{"input", a.input.string()}});
  err << "equalized " << inputs.size() << " images into " << a.out_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
  fs::path reference;
  fs::path test;
  SSIMConfig ssim;
  LossWeights weights;
};

void add_metrics(CLI::App& app, MetricsArgs& a) {
  auto* sub = app.add_subcommand("metrics", "MSE / SSIM / restoration loss as CSV on stdout");
  sub->add_option("--reference", a.reference, "reference image or directory")->required();
  sub->add_option("--test", a.test, "test image or directory (paired by file name)")->required();
  sub->add_option("--window", a.ssim.window)->capture_default_str();
  sub->add_option("--sigma", a.ssim.sigma)->capture_default_str();
  sub->add_option("--k1", a.ssim.k1)->capture_default_str();
  sub->add_option("--k2", a.ssim.k2)->capture_default_str();
  sub->add_option("--lambda1", a.weights.lambda1)->capture_default_str();
  sub->add_option("--lambda2", a.weights.lambda2)->capture_default_str();
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  a.ssim.validate();
  a.weights.validate();
  std::vector<std::pair<fs::path, fs::path>> pairs;
  std::error_code ec;
  if (fs::is_directory(a.reference, ec)) {
    for (const auto& ref : list_images(a.reference)) {
      const fs::path test = a.test / ref.filename();
      if (!fs::is_regular_file(test, ec)) throw FileNotFoundError(test.string());
      pairs.emplace_back(ref, test);
    }
  } else {
    pairs.emplace_back(a.reference, a.test);
  }

  out << "name,mse,ssim,loss\n";
  for (const auto& [ref, test] : pairs) {
    const ImageBuffer r = load_image(ref);
    const ImageBuffer t = load_image(test);
    const double m = mse(r, t);
    const double s = ssim(r, t, a.ssim);
    const double loss = restoration_loss(r, t, a.weights, nullptr, a.ssim);
    out << ref.filename().string() << "," << format_double(m) << "," << format_double(s) << ","
        << format_double(loss) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::vector<fs::path> ann;
  AttrFlags attrs;
};

void add_stats(CLI::App& app, StatsArgs& a) {
  auto* sub = app.add_subcommand("stats", "dataset statistics for COCO annotation files");
  sub->add_option("--ann", a.ann, "annotation file(s)")->required();
  a.attrs.add(sub);
}

int run_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> names;
  std::vector<DatasetStats> stats;
  for (const auto& path : a.ann) {
    LoadReport rep;
    stats.push_back(dataset_stats(load_annotations(path, a.attrs.keys, &rep)));
    names.push_back(path.stem().string());
    if (rep.clipped || rep.dropped) {
      err << path.string() << ": clipped " << rep.clipped << " boxes, dropped " << rep.dropped
          << "\n";
    }
  }
  if (stats.size() > 1) {
    DatasetStats total;
    for (const auto& s : stats) {
      total.images += s.images;
      total.instances += s.instances;
      for (int c = 0; c < kNumClasses; ++c) total.per_class[c] += s.per_class[c];
      total.extreme_labeled += s.extreme_labeled;
      total.extreme += s.extreme;
      total.truncated_labeled += s.truncated_labeled;
      total.truncated += s.truncated;
      total.occluded_labeled += s.occluded_labeled;
      total.occluded += s.occluded;
    }
    stats.push_back(total);
    names.push_back("total");
  }

  out << "metric";
  for (const auto& n : names) out << "," << (stats.size() == 1 ? "value" : n);
  out << "\n";
  auto row = [&](const char* metric, auto field) {
    out << metric;
    for (const auto& s : stats) out << "," << field(s);
    out << "\n";
  };
  row("images", [](const DatasetStats& s) { return s.images; });
  row("instances", [](const DatasetStats& s) { return s.instances; });
  for (const ObjectClass c : kAllClasses) {
    const std::string name(class_name(c));
    row(name.c_str(), [c](const DatasetStats& s) { return s.per_class[static_cast<int>(c)]; });
  }
  row("extreme_labeled", [](const DatasetStats& s) { return s.extreme_labeled; });
  row("extreme", [](const DatasetStats& s) { return s.extreme; });
  row("truncated_labeled", [](const DatasetStats& s) { return s.truncated_labeled; });
  row("truncated", [](const DatasetStats& s) { return s.truncated; });
  row("occluded_labeled", [](const DatasetStats& s) { return s.occluded_labeled; });
  row("occluded", [](const DatasetStats& s) { return s.occluded; });
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  fs::path dets;
  fs::path ann;
  fs::path out;
  fs::path csv;
  fs::path svg;
  bool extreme_analysis = false;
  double attribution_iou = 0.1;
  std::string extreme = "all";
  bool exclude_truncated = false;
  bool exclude_occluded = false;
  std::string excluded = "remove";
  bool per_class_plot = false;
  int jobs = 1;
  AttrFlags attrs;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* sub = app.add_subcommand("eval", "COCO-style AP with optional extreme-light analysis");
  sub->add_option("--dets", a.dets, "COCO results JSON")->required();
  sub->add_option("--ann", a.ann, "COCO annotations JSON")->required();
  sub->add_option("--out", a.out, "report JSON path");
  sub->add_option("--csv", a.csv, "curve CSV path");
  sub->add_option("--svg", a.svg, "PR plot SVG path");
  sub->add_flag("--extreme-analysis,--extreme_analysis", a.extreme_analysis,
                "add extreme/other error-elimination curves at IoU 0.50 and 0.75");
  sub->add_option("--attribution-iou,--attribution_iou", a.attribution_iou)->capture_default_str();
  sub->add_option("--extreme", a.extreme, "all | only | exclude")
      ->check(CLI::IsMember({"all", "only", "exclude"}))
      ->capture_default_str();
  sub->add_flag("--exclude-truncated,--exclude_truncated", a.exclude_truncated);
  sub->add_flag("--exclude-occluded,--exclude_occluded", a.exclude_occluded);
  sub->add_option("--excluded", a.excluded, "remove | ignore: fate of filtered instances")
      ->check(CLI::IsMember({"remove", "ignore"}))
      ->capture_default_str();
  sub->add_flag("--per-class-plot,--per_class_plot", a.per_class_plot);
  sub->add_option("--jobs", a.jobs, "worker threads")->capture_default_str();
  a.attrs.add(sub);
}

std::string ap_text(double ap) { return ap == kNoGroundTruth ? "n/a" : format_double(ap); }

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.attribution_iou >= 0.0 && a.attribution_iou <= 1.0)) {
    throw ValidationError("--attribution-iou must be in [0,1]");
  }
  LoadReport rep;
  const AnnotationSet set = load_annotations(a.ann, a.attrs.keys, &rep);
  if (rep.clipped || rep.dropped) {
    err << a.ann.string() << ": clipped " << rep.clipped << " boxes, dropped " << rep.dropped
        << "\n";
  }
  const std::vector<Detection> dets = load_detections(a.dets, &set);

  EvalOptions opt;
  opt.filter.extreme = a.extreme == "only"      ? ExtremeFilter::kOnlyExtreme
                       : a.extreme == "exclude" ? ExtremeFilter::kOnlyNonExtreme
                                                : ExtremeFilter::kAll;
  opt.filter.exclude_truncated = a.exclude_truncated;
  opt.filter.exclude_occluded = a.exclude_occluded;
  opt.excluded = a.excluded == "ignore" ? ExcludedPolicy::kIgnore : ExcludedPolicy::kRemove;
  opt.extreme_analysis = a.extreme_analysis;
  opt.attribution_iou = a.attribution_iou;
  opt.jobs = a.jobs;
  const EvalReport report = evaluate(dets, set, opt);

  if (!a.out.empty()) {
    write_text_file(a.out, report_json(report) + "\n");
    ordered_json params;
    params["dets"] = a.dets.string();
    params["ann"] = a.ann.string();
    params["extreme"] = a.extreme;
    params["exclude_truncated"] = a.exclude_truncated;
    params["exclude_occluded"] = a.exclude_occluded;
    params["excluded"] = a.excluded;
    params["extreme_analysis"] = a.extreme_analysis;
    params["attribution_iou"] = a.attribution_iou;
    fs::path manifest = a.out;
    manifest.replace_extension(".run.json");
    write_run_manifest(manifest, "eval", params);
  }
  if (!a.csv.empty()) {
    write_text_file(a.csv, curves_csv(report_curves(report, true)));
  }
  if (!a.svg.empty()) emit_pr_plot(report, a.svg, a.per_class_plot);

  out << "metric,value\n";
  out << "AP50," << ap_text(report.ap50) << "\n";
  out << "AP75," << ap_text(report.ap75) << "\n";
  out << "AP," << ap_text(report.ap) << "\n";
  for (const ClassResult& r : report.per_class) {
    out << class_name(r.cls) << "_AP50," << ap_text(r.ap50) << "\n";
  }
  for (const ConditionCurves& c : report.conditions) {
    const std::string tag = std::to_string(static_cast<int>(c.iou_threshold * 100 + 0.5));
    out << "C" << tag << "_base_AP," << ap_text(c.base.ap) << "\n";
    out << "C" << tag << "_extreme_eliminated_AP," << ap_text(c.extreme_eliminated.ap) << "\n";
    out << "C" << tag << "_other_eliminated_AP," << ap_text(c.other_eliminated.ap) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PrCurveArgs {
  fs::path report;
  fs::path out;
  fs::path csv;
  bool per_class = false;
};

void add_prcurve(CLI::App& app, PrCurveArgs& a) {
  auto* sub = app.add_subcommand("prcurve", "render a saved eval report as an SVG PR plot");
  sub->add_option("--report", a.report, "report JSON written by eval --out")->required();
  sub->add_option("--out", a.out, "SVG output path")->required();
  sub->add_option("--csv", a.csv, "also write the curves as CSV");
  sub->add_flag("--per-class,--per_class", a.per_class, "include per-class curves");
}

int run_prcurve(const PrCurveArgs& a) {
  std::vector<NamedCurve> curves = curves_from_report_json(read_text_file(a.report));
  if (!a.per_class) {
    std::erase_if(curves, [](const NamedCurve& c) {
      return c.name.find(' ') != std::string::npos &&
             c.name.find("eliminated") == std::string::npos;
    });
  }
  write_text_file(a.out, pr_plot_svg(curves));
  if (!a.csv.empty()) write_text_file(a.csv, curves_csv(curves));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-light detection data toolkit", "lowlight"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file with option values; flags take precedence");
  // Settings live under [subcommand] tables; a key nothing consumes is an error.
  app.allow_config_extras(CLI::config_extras_mode::error);

  CorruptArgs corrupt;
  AugmentArgs augment;
  EqualizeArgs equalize;
  MetricsArgs metrics;
  StatsArgs stats;
  EvalArgs eval;
  PrCurveArgs prcurve;
  add_corrupt(app, corrupt);
  add_augment(app, augment);
  add_equalize(app, equalize);
  add_metrics(app, metrics);
  add_stats(app, stats);
  add_eval(app, eval);
  add_prcurve(app, prcurve);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "corrupt") return run_corrupt(corrupt, err);
    if (cmd == "augment") return run_augment(augment, err);
    if (cmd == "equalize") return run_equalize(equalize, err);
    if (cmd == "metrics") return run_metrics(metrics, out);
    if (cmd == "stats") return run_stats(stats, out, err);
    if (cmd == "eval") return run_eval(eval, out, err);
    if (cmd == "prcurve") return run_prcurve(prcurve);
    err << "unknown subcommand " << cmd << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  const int code = run(args, std::cout, std::cerr);
  std::cout.flush();
  return code;
}

}  // namespace lowlight::cli
