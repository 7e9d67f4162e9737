// SPDX-License-Identifier: Apache-2.0
//
// COCO-style annotation and result files.
//
// Annotations: {"images": [{id, file_name, width, height, split?}],
// "annotations": [{image_id, category_id, bbox: [x, y, w, h]}],
// "categories": [{id, name}], "split"?}. A per-image "split" overrides the
// top-level one; with neither, images are "train". Patched files add
// "parent_id" and "patch_offset": [x, y] per image. Boxes are clipped to the
// image on load.
//
// Results: [{image_id, category_id, bbox, score}].
//
// Every parse failure is an IoError whose message names the line (for JSON
// syntax) or the JSON path of the offending field.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lskdet/dataset.hpp"
#include "lskdet/nms.hpp"

namespace lskdet {

Dataset parse_coco_annotations(std::string_view text);
Dataset load_coco_annotations(const std::filesystem::path& path);
/// Pixels are not serialized. Output is deterministic (image order kept).
std::string coco_annotations_json(const Dataset& ds);

using DetectionsByImage = std::map<std::int64_t, std::vector<Detection>>;

/// Category and image ids are resolved against `ds`; unknown ones raise an
/// IoError listing every offender.
DetectionsByImage parse_coco_results(std::string_view text, const Dataset& ds);
DetectionsByImage load_coco_results(const std::filesystem::path& path, const Dataset& ds);
std::string coco_results_json(const DetectionsByImage& dets, const Dataset& ds);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace lskdet
