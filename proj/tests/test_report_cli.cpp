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
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "lowlight/annotations.hpp"
#include "lowlight/cli.hpp"
#include "lowlight/error.hpp"
#include "lowlight/eval.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/report.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace lowlight;
using lowlight::testing::fixture;
using lowlight::testing::slurp;
using lowlight::testing::TempDir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "lowlight");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

EvalReport fixture_report() {
  const AnnotationSet set = load_annotations(fixture("eval_ann.json"));
  const auto dets = load_detections(fixture("eval_dets.json"), &set);
  EvalOptions opt;
  opt.extreme_analysis = true;
  return evaluate(dets, set, opt);
}

std::vector<std::pair<double, double>> polyline_points(const std::string& svg, std::size_t which) {
  static const std::regex poly(R"re(<polyline[^>]*points="([^"]*)")re");
  auto it = std::sregex_iterator(svg.begin(), svg.end(), poly);
  for (std::size_t i = 0; i < which; ++i) ++it;
  std::vector<std::pair<double, double>> pts;
  std::istringstream in((*it)[1].str());
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
  }
  return pts;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("report curves and CSV") {
  const EvalReport r = fixture_report();
  const auto pooled = report_curves(r, false);
  REQUIRE(pooled.size() == 6);
  CHECK(pooled[0].name == "C50");
  CHECK(pooled[1].name == "C75");
  CHECK(pooled[2].name == "C50 extreme-eliminated");
  CHECK(pooled[3].name == "C50 other-eliminated");
  CHECK(pooled[4].name == "C75 extreme-eliminated");
  const auto all = report_curves(r, true);
  CHECK(all.size() == 12);
  CHECK(all[6].name == "person C50");

  const std::string csv = curves_csv(pooled);
  CHECK(csv.rfind("curve,iou,recall,precision\n", 0) == 0);
  CHECK(count_of(csv, "\n") == 1 + 6 * 101);
  CHECK(csv.find("C50,0.5,0,1\n") != std::string::npos);
  CHECK(csv.find("C50,0.5,0.5,1\n") != std::string::npos);
  CHECK(csv.find("C50,0.5,0.51,0.5\n") != std::string::npos);
  CHECK(csv.find("C50,0.5,1,0\n") != std::string::npos);
}

TEST_CASE("report JSON round-trips its curves") {
  const EvalReport r = fixture_report();
  const std::string text = report_json(r);
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("ap50").get<double>() == r.ap50);
  CHECK(j.at("per_class").size() == 3);
  const auto back = curves_from_report_json(text);
  const auto want = report_curves(r, true);
  REQUIRE(back.size() == want.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].name == want[i].name);
    CHECK(back[i].iou == want[i].iou);
    CHECK(back[i].curve.ap == want[i].curve.ap);
    CHECK(back[i].curve.precision == want[i].curve.precision);
    CHECK(back[i].curve.recall == want[i].curve.recall);
  }
  CHECK_THROWS_AS(curves_from_report_json("{}"), ValidationError);
  CHECK_THROWS_AS(curves_from_report_json("nope"), ValidationError);
}

TEST_CASE("PR plot SVG") {
  SUBCASE("a perfect curve is pinned at precision 1") {
    std::vector<ScoredOutcome> o = {{0.9, true, 0}, {0.5, true, 1}};
    const std::vector<NamedCurve> curves = {{"perfect", 0.5, pr_curve(o, 2)}};
    const std::string svg = pr_plot_svg(curves);
    const auto pts = polyline_points(svg, 0);
    REQUIRE(pts.size() == 101);
    for (const auto& p : pts) CHECK(p.second == pts[0].second);
    CHECK(pts.front().first < pts.back().first);
    CHECK(svg.find("perfect (AP 100.0)") != std::string::npos);
  }
  SUBCASE("a sentinel curve is listed but not drawn") {
    std::vector<ScoredOutcome> o = {{0.9, true, 0}, {0.5, false, 1}};
    const std::vector<NamedCurve> curves = {{"real", 0.5, pr_curve(o, 2)},
                                            {"empty", 0.5, pr_curve({}, 0)}};
    const std::string svg = pr_plot_svg(curves);
    CHECK(count_of(svg, "<polyline") == 1);
    CHECK(svg.find("empty (no ground truth)") != std::string::npos);
    CHECK(svg.find("real (AP 50.5)") != std::string::npos);
  }
  SUBCASE("an empty report is rejected") {
    CHECK_THROWS_AS(pr_plot_svg({}), ValidationError);
  }
  SUBCASE("golden plot of the synthetic fixture") {
    const std::string svg = pr_plot_svg(report_curves(fixture_report(), false));
    const fs::path golden = fs::path(LOWLIGHT_GOLDEN_DIR) / "eval_fixture_pr.svg";
    if (std::getenv("LOWLIGHT_UPDATE_GOLDEN")) {
      std::ofstream(golden, std::ios::binary) << svg;
    }
    REQUIRE(fs::exists(golden));
    CHECK(svg == slurp(golden));
  }
}

TEST_CASE("cli: argument handling and exit codes") {
  CHECK(cli_run({}).code == cli::kExitValidation);
  CHECK(cli_run({"frobnicate"}).code == cli::kExitValidation);
  CHECK(cli_run({"--help"}).code == cli::kExitOk);
  CHECK(cli_run({"corrupt"}).code == cli::kExitValidation);  // missing required flags
  CHECK(cli_run({"eval", "--dets", "x", "--ann", "y", "--extreme", "sometimes"}).code ==
        cli::kExitValidation);

  TempDir tmp("cli-codes");
  const auto missing = cli_run({"stats", "--ann", (tmp / "none.json").string()});
  CHECK(missing.code == cli::kExitIo);
  CHECK(missing.out.empty());
  CHECK(missing.err.find("none.json") != std::string::npos);

  { std::ofstream(tmp / "bad.json") << "{ broken"; }
  CHECK(cli_run({"stats", "--ann", (tmp / "bad.json").string()}).code == cli::kExitValidation);

  const auto bad_k = cli_run({"corrupt", "--src-dir", fixture("corpus").string(), "--out-dir",
                              (tmp / "o").string(), "--k-min", "1"});
  CHECK(bad_k.code == cli::kExitValidation);
  CHECK(bad_k.err.find("k_min") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "o" / "manifest.jsonl"));

  const auto no_src = cli_run({"corrupt", "--src-dir", (tmp / "nope").string(), "--out-dir",
                               (tmp / "o2").string()});
  CHECK(no_src.code == cli::kExitIo);
}

TEST_CASE("cli stats") {
  TempDir tmp("cli-stats");
  { std::ofstream(tmp / "empty.json") << R"({"images": [], "annotations": [], "categories": []})"; }
  const auto empty = cli_run({"stats", "--ann", (tmp / "empty.json").string()});
  CHECK(empty.code == cli::kExitOk);
  CHECK(empty.out ==
        "metric,value\nimages,0\ninstances,0\nperson,0\nbicycle,0\ncar,0\n"
        "extreme_labeled,0\nextreme,0\ntruncated_labeled,0\ntruncated,0\n"
        "occluded_labeled,0\noccluded,0\n");

  const auto two = cli_run({"stats", "--ann", fixture("eval_ann.json").string(), "--ann",
                            (tmp / "empty.json").string()});
  CHECK(two.code == cli::kExitOk);
  CHECK(two.out.rfind("metric,eval_ann,empty,total\nimages,2,0,2\ninstances,6,0,6\n", 0) == 0);
  CHECK(two.out.find("extreme,3,0,3\n") != std::string::npos);
}

TEST_CASE("cli eval on the synthetic fixture") {
  TempDir tmp("cli-eval");
  const auto r = cli_run({"eval", "--dets", fixture("eval_dets.json").string(), "--ann",
                          fixture("eval_ann.json").string(), "--extreme-analysis", "--out",
                          (tmp / "report.json").string(), "--csv", (tmp / "curves.csv").string(),
                          "--svg", (tmp / "plot.svg").string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("person_AP50,1\n") != std::string::npos);
  CHECK(r.out.find("bicycle_AP50,0\n") != std::string::npos);
  CHECK(r.out.find("C50_base_AP,0.5841584158\n") != std::string::npos);
  CHECK(r.out.find("C50_extreme_eliminated_AP,0.9174917492\n") != std::string::npos);
  CHECK(r.out.find("C50_other_eliminated_AP,0.6105610561\n") != std::string::npos);

  const EvalReport want = fixture_report();
  CHECK(slurp(tmp / "report.json") == report_json(want) + "\n");
  CHECK(slurp(tmp / "curves.csv") == curves_csv(report_curves(want, true)));
  CHECK(slurp(tmp / "plot.svg") == pr_plot_svg(report_curves(want, false)));
  const auto manifest = nlohmann::json::parse(slurp(tmp / "report.run.json"));
  CHECK(manifest.at("command") == "eval");
  CHECK(manifest.at("parameters").at("extreme_analysis") == true);

  // prcurve re-renders the same plot from the saved report.
  const auto p = cli_run({"prcurve", "--report", (tmp / "report.json").string(), "--out",
                          (tmp / "again.svg").string()});
  CHECK(p.code == cli::kExitOk);
  CHECK(slurp(tmp / "again.svg") == slurp(tmp / "plot.svg"));

  // Missing flags for the requested analysis is a validation failure.
  { std::ofstream(tmp / "plain.json") << R"({"images": [{"id": 1, "file_name": "a", "width": 9, "height": 9}],
      "annotations": [{"id": 1, "image_id": 1, "category_id": 1, "bbox": [0, 0, 2, 2]}],
      "categories": [{"id": 1, "name": "person"}]})"; }
  { std::ofstream(tmp / "none.json") << "[]"; }
  CHECK(cli_run({"eval", "--dets", (tmp / "none.json").string(), "--ann",
                 (tmp / "plain.json").string(), "--extreme-analysis"})
            .code == cli::kExitValidation);
  CHECK(cli_run({"eval", "--dets", (tmp / "none.json").string(), "--ann",
                 (tmp / "plain.json").string()})
            .code == cli::kExitOk);
}

TEST_CASE("cli corrupt, augment, equalize, metrics") {
  TempDir tmp("cli-img");
  const std::string corpus = fixture("corpus").string();

  SUBCASE("corrupt twice gives identical trees") {
    for (const char* name : {"a", "b"}) {
      const auto r = cli_run({"corrupt", "--src-dir", corpus, "--out-dir", (tmp / name).string(),
                              "--count", "10", "--seed", "7", "--patch-side", "48"});
      REQUIRE(r.code == cli::kExitOk);
    }
    const auto ta = testing::tree_contents(tmp / "a");
    CHECK(ta.size() == 22);
    CHECK(ta == testing::tree_contents(tmp / "b"));
    const auto manifest = nlohmann::json::parse(slurp(tmp / "a" / "run.json"));
    CHECK(manifest.at("parameters").at("seed") == 7);
    CHECK(manifest.at("parameters").at("k_max") == 8);
    CHECK(manifest.at("parameters").at("patch_side") == 48);
  }
  SUBCASE("augment modes") {
    const std::string ann = (tmp / "ann.json").string();
    {
      AnnotationSet set;
      set.images = {{1, "corpus_a.png", 120, 100}, {2, "corpus_b.png", 100, 80}};
      Instance i;
      i.id = 1;
      i.image_id = 1;
      i.bbox = {10.4, 10.6, 64, 48};
      set.instances.push_back(i);
      save_annotations(set, ann);
    }
    const auto light = cli_run({"augment", "--input", corpus, "--out-dir", (tmp / "l").string(),
                                "--seed", "3"});
    REQUIRE(light.code == cli::kExitOk);
    CHECK(fs::exists(tmp / "l" / "corpus_c_gray.png"));
    CHECK(load_image(tmp / "l" / "corpus_a.png") != load_image(fixture("corpus/corpus_a.png")));

    const auto shuf = cli_run({"augment", "--input", corpus, "--out-dir", (tmp / "s").string(),
                               "--mode", "shuffle", "--prob", "1", "--ann", ann});
    REQUIRE(shuf.code == cli::kExitOk);
    const ImageBuffer src = load_image(fixture("corpus/corpus_a.png"));
    const ImageBuffer out = load_image(tmp / "s" / "corpus_a.png");
    CHECK(out != src);
    // Only the box (rounded to pixels: x 10..74, y 11..59) may change.
    for (int y = 0; y < src.height(); ++y)
      for (int x = 0; x < src.width(); ++x)
        if (x < 10 || x >= 74 || y < 11 || y >= 59)
          for (int c = 0; c < 3; ++c) REQUIRE(out.at(x, y, c) == src.at(x, y, c));
    CHECK(load_image(tmp / "s" / "corpus_b.png") == load_image(fixture("corpus/corpus_b.png")));

    CHECK(cli_run({"augment", "--input", corpus, "--out-dir", (tmp / "x").string(), "--mode",
                   "both"})
              .code == cli::kExitValidation);
  }
  SUBCASE("equalize and metrics") {
    REQUIRE(cli_run({"equalize", "--input", fixture("natural_patch.png").string(), "--out-dir",
                     (tmp / "eq").string()})
                .code == cli::kExitOk);
    const auto m = cli_run({"metrics", "--reference", fixture("natural_patch.png").string(),
                            "--test", fixture("natural_patch.png").string()});
    REQUIRE(m.code == cli::kExitOk);
    CHECK(m.out == "name,mse,ssim,loss\nnatural_patch.png,0,1,0\n");
    const auto d = cli_run({"metrics", "--reference", fixture("natural_patch.png").string(),
                            "--test", (tmp / "eq" / "natural_patch.png").string(), "--lambda1",
                            "0"});
    REQUIRE(d.code == cli::kExitOk);
    CHECK(d.out.find("natural_patch.png,") != std::string::npos);
    CHECK(cli_run({"metrics", "--reference", fixture("natural_patch.png").string(), "--test",
                   fixture("known_2x2.png").string()})
              .code == cli::kExitValidation);
  }
}

TEST_CASE("cli TOML config: file values apply, flags win") {
  TempDir tmp("cli-toml");
  {
    std::ofstream(tmp / "run.toml") << "[corrupt]\n"
                                       "k_min = 3\n"
                                       "k_max = 3\n"
                                       "patch_side = 40\n"
                                       "seed = 11\n"
                                       "count = 4\n";
  }
  const std::string corpus = fixture("corpus").string();
  const auto r = cli_run({"--config", (tmp / "run.toml").string(), "corrupt", "--src-dir", corpus,
                          "--out-dir", (tmp / "o").string(), "--k-max", "5"});
  REQUIRE(r.code == cli::kExitOk);
  const auto params = nlohmann::json::parse(slurp(tmp / "o" / "run.json")).at("parameters");
  CHECK(params.at("k_min") == 3);
  CHECK(params.at("k_max") == 5);
  CHECK(params.at("patch_side") == 40);
  CHECK(params.at("seed") == 11);
  CHECK(params.at("count") == 4);

  { std::ofstream(tmp / "typo.toml") << "[corrupt]\nk_mni = 3\n"; }
  CHECK(cli_run({"--config", (tmp / "typo.toml").string(), "corrupt", "--src-dir", corpus,
                 "--out-dir", (tmp / "o3").string()})
            .code == cli::kExitValidation);

  { std::ofstream(tmp / "bad.toml") << "[corrupt]\nk_min = \"many\"\n"; }
  CHECK(cli_run({"--config", (tmp / "bad.toml").string(), "corrupt", "--src-dir", corpus,
                 "--out-dir", (tmp / "o2").string()})
            .code == cli::kExitValidation);
}
