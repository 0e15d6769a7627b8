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
#include "lowlight/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "lowlight/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace lowlight {
namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {"person", "bicycle",
                                                                   "car"};

std::string read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw FileNotFoundError(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot create " + path.string());
  out << text;
  out.flush();
  if (!out) throw WriteError("write failed: " + path.string());
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

[[noreturn]] void schema_error(const std::string& where, const std::string& msg) {
  throw ValidationError(where + ": " + msg);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing \"") + key + "\"");
  return *it;
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) schema_error(where, std::string("\"") + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

double get_number(const json& v, const std::string& where, const char* what) {
  if (!v.is_number()) schema_error(where, std::string(what) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where, std::string(what) + " must be finite");
  return d;
}

BBox get_bbox(const json& obj, const std::string& where) {
  const json& v = require(obj, "bbox", where);
  if (!v.is_array() || v.size() != 4) schema_error(where, "\"bbox\" must be [x, y, w, h]");
  BBox b{get_number(v[0], where, "bbox x"), get_number(v[1], where, "bbox y"),
         get_number(v[2], where, "bbox w"), get_number(v[3], where, "bbox h")};
  if (!(b.w > 0.0) || !(b.h > 0.0)) schema_error(where, "bbox extent must be positive");
  return b;
}

std::optional<bool> get_flag(const json& holder, const std::string& key,
                             const std::string& where) {
  if (!holder.is_object()) return std::nullopt;
  const auto it = holder.find(key);
  if (it == holder.end() || it->is_null()) return std::nullopt;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number_integer()) {
    const auto v = it->get<std::int64_t>();
    if (v == 0 || v == 1) return v == 1;
  }
  schema_error(where, "flag \"" + key + "\" must be a boolean");
}

}  // namespace

std::string_view class_name(ObjectClass c) { return kClassNames[static_cast<int>(c)]; }

std::optional<ObjectClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return static_cast<ObjectClass>(i);
  }
  return std::nullopt;
}

const ImageEntry* AnnotationSet::find_image(std::int64_t id) const {
  const auto it = std::find_if(images.begin(), images.end(),
                               [id](const ImageEntry& e) { return e.id == id; });
  return it == images.end() ? nullptr : &*it;
}

std::optional<ObjectClass> AnnotationSet::class_for_category(std::int64_t id) const {
  for (int i = 0; i < kNumClasses; ++i) {
    if (category_ids[i] == id) return static_cast<ObjectClass>(i);
  }
  return std::nullopt;
}

AnnotationSet parse_annotations(std::string_view text, const AttributeKeys& keys,
                                LoadReport* report) {
  const json root = parse_json(text, "annotations");
  if (!root.is_object()) schema_error("annotations", "top level must be an object");

  AnnotationSet set;
  LoadReport local;

  // Categories first: every one must be a known class; absent classes get
  // fresh ids so that all three stay addressable.
  const json& cats = require(root, "categories", "annotations");
  if (!cats.is_array()) schema_error("categories", "must be an array");
  std::array<bool, kNumClasses> seen{};
  std::set<std::int64_t> used_ids;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = "categories[" + std::to_string(i) + "]";
    const std::int64_t id = get_int(cats[i], "id", where);
    const json& name = require(cats[i], "name", where);
    if (!name.is_string()) schema_error(where, "\"name\" must be a string");
    const auto cls = class_from_name(name.get<std::string>());
    if (!cls) schema_error(where, "unknown category \"" + name.get<std::string>() + "\"");
    if (seen[static_cast<int>(*cls)]) schema_error(where, "duplicate category");
    if (!used_ids.insert(id).second) schema_error(where, "duplicate category id");
    seen[static_cast<int>(*cls)] = true;
    set.category_ids[static_cast<int>(*cls)] = id;
  }
  std::int64_t next_id = used_ids.empty() ? 1 : *used_ids.rbegin() + 1;
  for (int c = 0; c < kNumClasses; ++c) {
    if (!seen[c]) set.category_ids[c] = next_id++;
  }

  const json& images = require(root, "images", "annotations");
  if (!images.is_array()) schema_error("images", "must be an array");
  std::unordered_map<std::int64_t, std::size_t> image_index;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    ImageEntry e;
    e.id = get_int(images[i], "id", where);
    const json& fname = require(images[i], "file_name", where);
    if (!fname.is_string()) schema_error(where, "\"file_name\" must be a string");
    e.file_name = fname.get<std::string>();
    const auto w = get_int(images[i], "width", where);
    const auto h = get_int(images[i], "height", where);
    if (w <= 0 || h <= 0) schema_error(where, "image size must be positive");
    e.width = static_cast<int>(w);
    e.height = static_cast<int>(h);
    if (!image_index.emplace(e.id, set.images.size()).second) {
      schema_error(where, "duplicate image id " + std::to_string(e.id));
    }
    set.images.push_back(std::move(e));
  }

  const auto anns_it = root.find("annotations");
  if (anns_it != root.end()) {
    const json& anns = *anns_it;
    if (!anns.is_array()) schema_error("annotations", "\"annotations\" must be an array");
    for (std::size_t i = 0; i < anns.size(); ++i) {
      const std::string where = "annotations[" + std::to_string(i) + "]";
      const json& a = anns[i];
      Instance inst;
      inst.id = get_int(a, "id", where);
      inst.image_id = get_int(a, "image_id", where);
      const auto img = image_index.find(inst.image_id);
      if (img == image_index.end()) {
        schema_error(where, "unknown image_id " + std::to_string(inst.image_id));
      }
      const auto cat = get_int(a, "category_id", where);
      const auto cls = set.class_for_category(cat);
      if (!cls) schema_error(where, "unknown category id " + std::to_string(cat));
      inst.cls = *cls;
      if (const auto crowd = a.find("iscrowd");
          crowd != a.end() && crowd->is_number() && crowd->get<double>() != 0.0) {
        schema_error(where, "crowd annotations are not supported");
      }

      const BBox raw = get_bbox(a, where);
      const ImageEntry& entry = set.images[img->second];
      const double x0 = std::max(raw.x, 0.0);
      const double y0 = std::max(raw.y, 0.0);
      const double x1 = std::min(raw.x + raw.w, static_cast<double>(entry.width));
      const double y1 = std::min(raw.y + raw.h, static_cast<double>(entry.height));
      if (!(x1 > x0) || !(y1 > y0)) {
        ++local.dropped;
        continue;
      }
      inst.bbox = {x0, y0, x1 - x0, y1 - y0};
      if (inst.bbox != raw) ++local.clipped;

      const json& holder = keys.container.empty()
                               ? a
                               : (a.contains(keys.container) ? a.at(keys.container) : json());
      inst.extreme = get_flag(holder, keys.extreme, where);
      inst.truncated = get_flag(holder, keys.truncated, where);
      inst.occluded = get_flag(holder, keys.occluded, where);
      set.instances.push_back(inst);
    }
  }

  if (report) *report = local;
  return set;
}

AnnotationSet load_annotations(const fs::path& path, const AttributeKeys& keys,
                               LoadReport* report) {
  return parse_annotations(read_file(path), keys, report);
}

std::string dump_annotations(const AnnotationSet& set, const AttributeKeys& keys) {
  ordered_json root;
  root["images"] = ordered_json::array();
  for (const auto& e : set.images) {
    root["images"].push_back(
        {{"id", e.id}, {"file_name", e.file_name}, {"width", e.width}, {"height", e.height}});
  }
  root["annotations"] = ordered_json::array();
  for (const auto& inst : set.instances) {
    ordered_json a;
    a["id"] = inst.id;
    a["image_id"] = inst.image_id;
    a["category_id"] = set.category_id(inst.cls);
    a["bbox"] = {inst.bbox.x, inst.bbox.y, inst.bbox.w, inst.bbox.h};
    a["area"] = inst.bbox.w * inst.bbox.h;
    a["iscrowd"] = 0;
    ordered_json flags = ordered_json::object();
    if (inst.extreme) flags[keys.extreme] = *inst.extreme;
    if (inst.truncated) flags[keys.truncated] = *inst.truncated;
    if (inst.occluded) flags[keys.occluded] = *inst.occluded;
    if (!flags.empty()) {
      if (keys.container.empty()) {
        for (auto& [k, v] : flags.items()) a[k] = v;
      } else {
        a[keys.container] = flags;
      }
    }
    root["annotations"].push_back(std::move(a));
  }
  root["categories"] = ordered_json::array();
  for (ObjectClass c : kAllClasses) {
    root["categories"].push_back(
        {{"id", set.category_id(c)}, {"name", std::string(class_name(c))}});
  }
  return root.dump(1);
}

void save_annotations(const AnnotationSet& set, const fs::path& path,
                      const AttributeKeys& keys) {
  write_file(path, dump_annotations(set, keys) + "\n");
}

std::vector<Detection> parse_detections(std::string_view text, const AnnotationSet* set) {
  const json root = parse_json(text, "detections");
  if (!root.is_array()) schema_error("detections", "top level must be an array");
  const AnnotationSet defaults;
  const AnnotationSet& cats = set ? *set : defaults;

  std::vector<Detection> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const std::string where = "detection #" + std::to_string(i);
    const json& d = root[i];
    Detection det;
    det.image_id = get_int(d, "image_id", where);
    const auto cat = get_int(d, "category_id", where);
    const auto cls = cats.class_for_category(cat);
    if (!cls) schema_error(where, "unknown category id " + std::to_string(cat));
    det.cls = *cls;
    det.bbox = get_bbox(d, where);
    det.score = get_number(require(d, "score", where), where, "score");
    if (det.score < 0.0 || det.score > 1.0) {
      schema_error(where, "score " + std::to_string(det.score) + " outside [0,1]");
    }
    out.push_back(det);
  }
  return out;
}

std::vector<Detection> load_detections(const fs::path& path, const AnnotationSet* set) {
  return parse_detections(read_file(path), set);
}

std::string dump_detections(const std::vector<Detection>& dets, const AnnotationSet* set) {
  const AnnotationSet defaults;
  const AnnotationSet& cats = set ? *set : defaults;
  ordered_json root = ordered_json::array();
  for (const auto& d : dets) {
    root.push_back({{"image_id", d.image_id},
                    {"category_id", cats.category_id(d.cls)},
                    {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                    {"score", d.score}});
  }
  return root.dump();
}

void save_detections(const std::vector<Detection>& dets, const fs::path& path,
                     const AnnotationSet* set) {
  write_file(path, dump_detections(dets, set) + "\n");
}

DatasetStats dataset_stats(const AnnotationSet& set) {
  DatasetStats s;
  s.images = set.images.size();
  s.instances = set.instances.size();
  for (const auto& inst : set.instances) {
    ++s.per_class[static_cast<int>(inst.cls)];
    if (inst.extreme) {
      ++s.extreme_labeled;
      s.extreme += *inst.extreme ? 1 : 0;
    }
    if (inst.truncated) {
      ++s.truncated_labeled;
      s.truncated += *inst.truncated ? 1 : 0;
    }
    if (inst.occluded) {
      ++s.occluded_labeled;
      s.occluded += *inst.occluded ? 1 : 0;
    }
  }
  return s;
}

bool keep_instance(const Instance& inst, const InstanceFilter& filter) {
  auto need = [&](const std::optional<bool>& flag, const char* name) {
    if (!flag) {
      throw ValidationError(std::string("filter on \"") + name + "\" requested but instance " +
                            std::to_string(inst.id) + " has no such flag");
    }
    return *flag;
  };
  if (filter.extreme != ExtremeFilter::kAll) {
    const bool extreme = need(inst.extreme, "extreme");
    if (filter.extreme == ExtremeFilter::kOnlyExtreme && !extreme) return false;
    if (filter.extreme == ExtremeFilter::kOnlyNonExtreme && extreme) return false;
  }
  if (filter.exclude_truncated && need(inst.truncated, "truncated")) return false;
  if (filter.exclude_occluded && need(inst.occluded, "occluded")) return false;
  return true;
}

AnnotationSet filter_instances(const AnnotationSet& set, const InstanceFilter& filter) {
  AnnotationSet out;
  out.images = set.images;
  out.category_ids = set.category_ids;
  for (const auto& inst : set.instances) {
    if (keep_instance(inst, filter)) out.instances.push_back(inst);
  }
  return out;
}

}  // namespace lowlight
