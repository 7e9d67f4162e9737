// SPDX-License-Identifier: Apache-2.0
#include "lskdet/coco_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lskdet/error.hpp"

namespace lskdet {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    throw IoError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw IoError("field " + path + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing");
  return *it;
}

const json& array_member(const json& obj, const char* key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_array()) field_error(path + "." + key, "expected an array");
  return v;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  field_error(path, "expected an integer");
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) field_error(path, "expected a finite number");
  return d;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) field_error(path, "expected a string");
  return v.get<std::string>();
}

Split as_split(const json& v, const std::string& path) {
  const auto s = parse_split(as_string(v, path));
  if (!s) field_error(path, "expected one of train, val, test");
  return *s;
}

/// [x, y, w, h] with w, h >= 0.
Box as_bbox(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) field_error(path, "expected [x, y, w, h]");
  const double x = as_number(v[0], path + "[0]");
  const double y = as_number(v[1], path + "[1]");
  const double w = as_number(v[2], path + "[2]");
  const double h = as_number(v[3], path + "[3]");
  if (w < 0.0 || h < 0.0) field_error(path, "negative width or height");
  return from_xywh(x, y, w, h);
}

Box clip_to(const Box& b, int width, int height) {
  auto cx = [&](double v) { return std::clamp(v, 0.0, static_cast<double>(width)); };
  auto cy = [&](double v) { return std::clamp(v, 0.0, static_cast<double>(height)); };
  return {cx(b.x1), cy(b.y1), cx(b.x2), cy(b.y2)};
}

ordered_json bbox_json(const Box& b) { return ordered_json::array({b.x1, b.y1, b.x2 - b.x1, b.y2 - b.y1}); }

std::string join(const std::set<std::int64_t>& ids) {
  std::string out;
  for (std::int64_t id : ids) out += (out.empty() ? "" : ", ") + std::to_string(id);
  return out;
}

}  // namespace

Dataset parse_coco_annotations(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_object()) field_error("$", "expected an object");

  Dataset ds;
  const json& cats = array_member(root, "categories", "$");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string path = "categories[" + std::to_string(i) + "]";
    const std::int64_t id = as_int(member(cats[i], "id", path), path + ".id");
    if (ds.class_index(id)) field_error(path + ".id", "duplicate category id " + std::to_string(id));
    ds.category_ids.push_back(id);
    ds.class_names.push_back(as_string(member(cats[i], "name", path), path + ".name"));
  }

  Split default_split = Split::kTrain;
  if (root.contains("split")) default_split = as_split(root["split"], "split");

  std::map<std::int64_t, std::size_t> index;
  const json& images = array_member(root, "images", "$");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = "images[" + std::to_string(i) + "]";
    const json& j = images[i];
    AnnotatedImage img;
    img.image_id = as_int(member(j, "id", path), path + ".id");
    img.file_name = j.contains("file_name") ? as_string(j["file_name"], path + ".file_name") : std::string();
    const std::int64_t w = as_int(member(j, "width", path), path + ".width");
    const std::int64_t h = as_int(member(j, "height", path), path + ".height");
    if (w < 1 || h < 1 || w > (1 << 24) || h > (1 << 24)) field_error(path, "width and height must be positive");
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.split = j.contains("split") ? as_split(j["split"], path + ".split") : default_split;
    if (j.contains("parent_id")) img.parent_id = as_int(j["parent_id"], path + ".parent_id");
    if (j.contains("patch_offset")) {
      const json& off = j["patch_offset"];
      if (!off.is_array() || off.size() != 2) field_error(path + ".patch_offset", "expected [x, y]");
      img.offset_x = static_cast<int>(as_int(off[0], path + ".patch_offset[0]"));
      img.offset_y = static_cast<int>(as_int(off[1], path + ".patch_offset[1]"));
    }
    if (!index.emplace(img.image_id, ds.images.size()).second) {
      field_error(path + ".id", "duplicate image id " + std::to_string(img.image_id));
    }
    ds.images.push_back(std::move(img));
  }

  const json& anns = array_member(root, "annotations", "$");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string path = "annotations[" + std::to_string(i) + "]";
    const std::int64_t image_id = as_int(member(anns[i], "image_id", path), path + ".image_id");
    const auto it = index.find(image_id);
    if (it == index.end()) field_error(path + ".image_id", "unknown image id " + std::to_string(image_id));
    const std::int64_t cat = as_int(member(anns[i], "category_id", path), path + ".category_id");
    const auto cls = ds.class_index(cat);
    if (!cls) field_error(path + ".category_id", "unknown category id " + std::to_string(cat));
    AnnotatedImage& img = ds.images[it->second];
    const Box b = clip_to(as_bbox(member(anns[i], "bbox", path), path + ".bbox"), img.width, img.height);
    img.instances.push_back({b, *cls});
  }
  return ds;
}

std::string coco_annotations_json(const Dataset& ds) {
  ordered_json root;
  ordered_json images = ordered_json::array();
  ordered_json anns = ordered_json::array();
  std::int64_t ann_id = 1;
  for (const AnnotatedImage& img : ds.images) {
    ordered_json j;
    j["id"] = img.image_id;
    j["file_name"] = img.file_name;
    j["width"] = img.width;
    j["height"] = img.height;
    j["split"] = std::string(to_string(img.split));
    if (img.parent_id) {
      j["parent_id"] = *img.parent_id;
      j["patch_offset"] = ordered_json::array({img.offset_x, img.offset_y});
    }
    images.push_back(std::move(j));
    for (const Instance& inst : img.instances) {
      ordered_json a;
      a["id"] = ann_id++;
      a["image_id"] = img.image_id;
      a["category_id"] = ds.category_ids.at(static_cast<std::size_t>(inst.class_id));
      a["bbox"] = bbox_json(inst.box);
      a["area"] = inst.box.area();
      a["iscrowd"] = 0;
      anns.push_back(std::move(a));
    }
  }
  ordered_json cats = ordered_json::array();
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
    cats.push_back({{"id", ds.category_ids[i]}, {"name", ds.class_names[i]}});
  }
  root["images"] = std::move(images);
  root["annotations"] = std::move(anns);
  root["categories"] = std::move(cats);
  return root.dump(1) + "\n";
}

DetectionsByImage parse_coco_results(std::string_view text, const Dataset& ds) {
  const json root = parse_json(text);
  if (!root.is_array()) field_error("$", "expected an array of detections");
  std::set<std::int64_t> known_images;
  for (const AnnotatedImage& img : ds.images) known_images.insert(img.image_id);

  DetectionsByImage out;
  std::set<std::int64_t> bad_categories;
  std::set<std::int64_t> bad_images;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const std::string path = "[" + std::to_string(i) + "]";
    const std::int64_t image_id = as_int(member(root[i], "image_id", path), path + ".image_id");
    const std::int64_t cat = as_int(member(root[i], "category_id", path), path + ".category_id");
    Detection d;
    d.box = as_bbox(member(root[i], "bbox", path), path + ".bbox");
    d.score = as_number(member(root[i], "score", path), path + ".score");
    if (d.score < 0.0 || d.score > 1.0) field_error(path + ".score", "expected a score in [0, 1]");
    const auto cls = ds.class_index(cat);
    if (!cls) bad_categories.insert(cat);
    if (!known_images.count(image_id)) bad_images.insert(image_id);
    if (!cls || !known_images.count(image_id)) continue;
    d.class_id = *cls;
    out[image_id].push_back(d);
  }
  if (!bad_categories.empty()) throw IoError("detections use unknown category id(s): " + join(bad_categories));
  if (!bad_images.empty()) throw IoError("detections reference unknown image id(s): " + join(bad_images));
  return out;
}

std::string coco_results_json(const DetectionsByImage& dets, const Dataset& ds) {
  ordered_json root = ordered_json::array();
  for (const auto& [image_id, list] : dets) {
    for (const Detection& d : list) {
      ordered_json j;
      j["image_id"] = image_id;
      j["category_id"] = ds.category_ids.at(static_cast<std::size_t>(d.class_id));
      j["bbox"] = bbox_json(d.box);
      j["score"] = d.score;
      root.push_back(std::move(j));
    }
  }
  return root.dump(1) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_coco_annotations(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_coco_annotations(text);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

DetectionsByImage load_coco_results(const std::filesystem::path& path, const Dataset& ds) {
  const std::string text = read_text_file(path);
  try {
    return parse_coco_results(text, ds);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace lskdet
