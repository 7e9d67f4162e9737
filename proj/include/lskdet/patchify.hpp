// SPDX-License-Identifier: Apache-2.0
//
// Tiling of large images into overlapping square patches, flips, photometric
// jitter and the split-leakage check.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lskdet/dataset.hpp"

namespace lskdet {

struct PatchSpec {
  int patch_size = 800;
  int stride = 600;
  /// An instance is kept in a patch when clipped_area / area >= this.
  double min_area_ratio = 0.5;

  /// Throws ConfigError unless 0 < stride <= patch_size and
  /// 0 < min_area_ratio <= 1.
  void validate() const;
};

/// 0, stride, 2 stride, ... and a final offset extent - patch_size when the
/// regular grid stops short; [0] when extent <= patch_size.
std::vector<int> patch_positions(int extent, const PatchSpec& spec);

/// Patches in row-major window order. Each patch is patch_size square
/// (zero-padded past the image border), inherits the split, records its
/// parent and offset, and is named "{stem}_{y0}_{y1}_{x0}_{x1}{ext}". Patch
/// ids are 0, 1, ... within the parent. Zero-area instances are kept only
/// when they lie inside the window.
std::vector<AnnotatedImage> patchify(const AnnotatedImage& img, const PatchSpec& spec);

/// patchify over every image; patch ids are renumbered 1..n in output order.
Dataset patchify_dataset(const Dataset& ds, const PatchSpec& spec);

enum class FlipAxis { kHorizontal, kVertical };

/// Horizontal: (x1, y1, x2, y2) -> (W - x2, y1, W - x1, y2); vertical is the
/// same rule on y. Pixels are mirrored when present.
AnnotatedImage flip(const AnnotatedImage& img, FlipAxis axis);

/// p -> clamp(round(contrast (p - mean) + mean + brightness), 0, 255) with
/// the mean over all pixel values. Boxes are untouched; images without
/// pixels come back unchanged. Throws DomainError for contrast <= 0.
AnnotatedImage photometric_jitter(const AnnotatedImage& img, double brightness_delta, double contrast_factor);

struct SplitViolation {
  std::int64_t parent_id = 0;
  std::vector<Split> splits;
  std::string message;
};

/// One violation per parent whose patches disagree on the split. Images
/// without a parent count as their own parent.
std::vector<SplitViolation> check_split_integrity(const std::vector<AnnotatedImage>& patches);

}  // namespace lskdet
