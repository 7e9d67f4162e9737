// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "lskdet/coco_io.hpp"
#include "lskdet/eval.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return LSKDET_SOURCE_DIR; }
inline std::filesystem::path fixture(const char* name) { return source_dir() / "tests" / "fixtures" / name; }

/// Pairs every annotated image with its detections (gt area = box area).
inline std::vector<lskdet::EvalImage> eval_images(const lskdet::Dataset& ds, const lskdet::DetectionsByImage& dets) {
  std::vector<lskdet::EvalImage> out;
  for (const lskdet::AnnotatedImage& img : ds.images) {
    lskdet::EvalImage e;
    e.image_id = img.image_id;
    for (const lskdet::Instance& inst : img.instances) e.gts.push_back({inst.box, inst.class_id, inst.box.area()});
    if (auto it = dets.find(img.image_id); it != dets.end()) e.dets = it->second;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace testing_support
