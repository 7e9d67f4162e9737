// SPDX-License-Identifier: Apache-2.0
#include "lskdet/patchify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "lskdet/error.hpp"

namespace lskdet {
namespace {

bool contains(const Box& window, const Box& b) {
  return b.x1 >= window.x1 && b.y1 >= window.y1 && b.x2 <= window.x2 && b.y2 <= window.y2;
}

std::string patch_name(const std::string& file_name, int x0, int y0, int size) {
  const std::filesystem::path p(file_name.empty() ? std::string("image") : file_name);
  return p.stem().string() + "_" + std::to_string(y0) + "_" + std::to_string(y0 + size) + "_" +
         std::to_string(x0) + "_" + std::to_string(x0 + size) + p.extension().string();
}

ImageData crop_padded(const ImageData& src, int x0, int y0, int size) {
  ImageData out(size, size, src.channels, 0);
  const int rows = std::max(0, std::min(size, src.height - y0));
  const int cols = std::max(0, std::min(size, src.width - x0));
  for (int y = 0; y < rows; ++y) {
    const auto* from = &src.pixels[(static_cast<std::size_t>(y0 + y) * src.width + x0) * src.channels];
    std::copy(from, from + static_cast<std::size_t>(cols) * src.channels,
              &out.pixels[static_cast<std::size_t>(y) * size * src.channels]);
  }
  return out;
}

}  // namespace

void PatchSpec::validate() const {
  if (patch_size < 1) throw ConfigError("patch size must be >= 1");
  if (stride < 1 || stride > patch_size) throw ConfigError("patch stride must satisfy 0 < stride <= patch size");
  if (!(min_area_ratio > 0.0 && min_area_ratio <= 1.0)) throw ConfigError("min_area_ratio must lie in (0, 1]");
}

std::vector<int> patch_positions(int extent, const PatchSpec& spec) {
  spec.validate();
  if (extent < 1) throw DomainError("extent must be >= 1");
  if (extent <= spec.patch_size) return {0};
  std::vector<int> out;
  int off = 0;
  for (; off + spec.patch_size < extent; off += spec.stride) out.push_back(off);
  const int last = extent - spec.patch_size;
  if (out.back() != last) out.push_back(last);
  return out;
}

std::vector<AnnotatedImage> patchify(const AnnotatedImage& img, const PatchSpec& spec) {
  spec.validate();
  if (img.width < 1 || img.height < 1) throw ShapeError("patchify needs a non-empty image");
  const std::vector<int> xs = patch_positions(img.width, spec);
  const std::vector<int> ys = patch_positions(img.height, spec);
  const int size = spec.patch_size;
  std::vector<AnnotatedImage> out;
  out.reserve(xs.size() * ys.size());
  for (int y0 : ys) {
    for (int x0 : xs) {
      AnnotatedImage p;
      p.image_id = static_cast<std::int64_t>(out.size());
      p.file_name = patch_name(img.file_name, x0, y0, size);
      p.width = size;
      p.height = size;
      p.split = img.split;
      p.parent_id = img.image_id;
      p.offset_x = x0;
      p.offset_y = y0;
      const Box window{static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + size),
                       static_cast<double>(y0 + size)};
      for (const Instance& inst : img.instances) {
        const Box clipped = intersection(inst.box, window);
        const double area = inst.box.area();
        const bool keep = area > 0.0 ? clipped.area() / area >= spec.min_area_ratio : contains(window, inst.box);
        if (keep) p.instances.push_back({clipped.translated(-x0, -y0), inst.class_id});
      }
      if (img.pixels) p.pixels = crop_padded(*img.pixels, x0, y0, size);
      out.push_back(std::move(p));
    }
  }
  return out;
}

Dataset patchify_dataset(const Dataset& ds, const PatchSpec& spec) {
  Dataset out;
  out.class_names = ds.class_names;
  out.category_ids = ds.category_ids;
  for (const AnnotatedImage& img : ds.images) {
    for (AnnotatedImage& p : patchify(img, spec)) {
      p.image_id = static_cast<std::int64_t>(out.images.size()) + 1;
      out.images.push_back(std::move(p));
    }
  }
  return out;
}

AnnotatedImage flip(const AnnotatedImage& img, FlipAxis axis) {
  AnnotatedImage out = img;
  const double w = img.width;
  const double h = img.height;
  for (Instance& inst : out.instances) {
    const Box b = inst.box;
    inst.box = axis == FlipAxis::kHorizontal ? Box{w - b.x2, b.y1, w - b.x1, b.y2} : Box{b.x1, h - b.y2, b.x2, h - b.y1};
  }
  if (img.pixels) {
    const ImageData& src = *img.pixels;
    ImageData& dst = *out.pixels;
    for (int y = 0; y < src.height; ++y) {
      for (int x = 0; x < src.width; ++x) {
        const int sx = axis == FlipAxis::kHorizontal ? src.width - 1 - x : x;
        const int sy = axis == FlipAxis::kVertical ? src.height - 1 - y : y;
        for (int c = 0; c < src.channels; ++c) dst.at(y, x, c) = src.at(sy, sx, c);
      }
    }
  }
  return out;
}

AnnotatedImage photometric_jitter(const AnnotatedImage& img, double brightness_delta, double contrast_factor) {
  if (!(contrast_factor > 0.0)) throw DomainError("contrast factor must be positive");
  AnnotatedImage out = img;
  if (!img.pixels || img.pixels->pixels.empty()) return out;
  double sum = 0.0;
  for (std::uint8_t v : img.pixels->pixels) sum += v;
  const double mean = sum / static_cast<double>(img.pixels->pixels.size());
  for (std::uint8_t& v : out.pixels->pixels) {
    const double adjusted = std::round(contrast_factor * (v - mean) + mean + brightness_delta);
    v = static_cast<std::uint8_t>(std::clamp(adjusted, 0.0, 255.0));
  }
  return out;
}

std::vector<SplitViolation> check_split_integrity(const std::vector<AnnotatedImage>& patches) {
  std::map<std::int64_t, std::set<Split>> by_parent;
  for (const AnnotatedImage& p : patches) by_parent[p.parent_id.value_or(p.image_id)].insert(p.split);
  std::vector<SplitViolation> out;
  for (const auto& [parent, splits] : by_parent) {
    if (splits.size() < 2) continue;
    SplitViolation v;
    v.parent_id = parent;
    v.splits.assign(splits.begin(), splits.end());
    v.message = "image " + std::to_string(parent) + " has patches in splits";
    for (Split s : splits) v.message += " " + std::string(to_string(s));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace lskdet
