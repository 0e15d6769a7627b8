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
#ifndef LOWLIGHT_ANNOTATIONS_HPP_
#define LOWLIGHT_ANNOTATIONS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lowlight {

enum class ObjectClass { kPerson = 0, kBicycle = 1, kCar = 2 };
inline constexpr int kNumClasses = 3;
inline constexpr std::array<ObjectClass, kNumClasses> kAllClasses = {
    ObjectClass::kPerson, ObjectClass::kBicycle, ObjectClass::kCar};

std::string_view class_name(ObjectClass c);
std::optional<ObjectClass> class_from_name(std::string_view name);

// COCO-style box: top-left corner plus extent, in pixels.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Instance {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  ObjectClass cls = ObjectClass::kPerson;
  BBox bbox;
  std::optional<bool> extreme;
  std::optional<bool> truncated;
  std::optional<bool> occluded;
  friend bool operator==(const Instance&, const Instance&) = default;
};

struct ImageEntry {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct AnnotationSet {
  std::vector<ImageEntry> images;
  std::vector<Instance> instances;
  // COCO category id used in the source file for each class.
  std::array<std::int64_t, kNumClasses> category_ids = {1, 2, 3};

  const ImageEntry* find_image(std::int64_t id) const;
  std::int64_t category_id(ObjectClass c) const {
    return category_ids[static_cast<int>(c)];
  }
  std::optional<ObjectClass> class_for_category(std::int64_t category_id) const;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

struct Detection {
  std::int64_t image_id = 0;
  ObjectClass cls = ObjectClass::kPerson;
  BBox bbox;
  double score = 0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

// Where the lighting flags live in each COCO annotation object. An empty
// container means the flags are top-level keys of the annotation.
struct AttributeKeys {
  std::string container = "attributes";
  std::string extreme = "extreme";
  std::string truncated = "truncated";
  std::string occluded = "occluded";
};

struct LoadReport {
  std::size_t clipped = 0;  // boxes shrunk to the image bounds
  std::size_t dropped = 0;  // boxes with no area left inside the image
};

// Throws FileNotFoundError, or ValidationError for malformed JSON, schema
// violations and categories other than person/bicycle/car.
AnnotationSet load_annotations(const std::filesystem::path& path,
                               const AttributeKeys& keys = {},
                               LoadReport* report = nullptr);
AnnotationSet parse_annotations(std::string_view json_text,
                                const AttributeKeys& keys = {},
                                LoadReport* report = nullptr);
std::string dump_annotations(const AnnotationSet& set, const AttributeKeys& keys = {});
void save_annotations(const AnnotationSet& set, const std::filesystem::path& path,
                      const AttributeKeys& keys = {});

// COCO results format: [{image_id, category_id, bbox, score}, ...].
// Category ids are resolved through `set`; without a set, ids 1/2/3 map to
// person/bicycle/car.
std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       const AnnotationSet* set = nullptr);
std::vector<Detection> parse_detections(std::string_view json_text,
                                        const AnnotationSet* set = nullptr);
std::string dump_detections(const std::vector<Detection>& dets,
                            const AnnotationSet* set = nullptr);
void save_detections(const std::vector<Detection>& dets,
                     const std::filesystem::path& path,
                     const AnnotationSet* set = nullptr);

struct DatasetStats {
  std::size_t images = 0;
  std::size_t instances = 0;
  std::array<std::size_t, kNumClasses> per_class{};
  // Instances carrying each flag at all, and how many have it set.
  std::size_t extreme_labeled = 0;
  std::size_t extreme = 0;
  std::size_t truncated_labeled = 0;
  std::size_t truncated = 0;
  std::size_t occluded_labeled = 0;
  std::size_t occluded = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const AnnotationSet& set);

enum class ExtremeFilter { kAll, kOnlyExtreme, kOnlyNonExtreme };

struct InstanceFilter {
  ExtremeFilter extreme = ExtremeFilter::kAll;
  bool exclude_truncated = false;
  bool exclude_occluded = false;

  bool active() const {
    return extreme != ExtremeFilter::kAll || exclude_truncated || exclude_occluded;
  }
};

// Throws ValidationError if a flag-based predicate is requested and some
// instance lacks that flag.
bool keep_instance(const Instance& inst, const InstanceFilter& filter);
AnnotationSet filter_instances(const AnnotationSet& set, const InstanceFilter& filter);

}  // namespace lowlight

#endif  // LOWLIGHT_ANNOTATIONS_HPP_
