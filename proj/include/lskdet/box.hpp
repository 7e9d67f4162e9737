// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <compare>

namespace lskdet {

/// Axis-aligned box in corner form. Pixel coordinates unless stated otherwise.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return std::max(0.0, x2 - x1); }
  double height() const { return std::max(0.0, y2 - y1); }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  /// Swaps inverted corners so that x1 <= x2 and y1 <= y2.
  Box normalized() const {
    return {std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
  }
  bool is_normalized() const { return x1 <= x2 && y1 <= y2; }
  bool is_degenerate() const { return !(x2 > x1 && y2 > y1); }

  Box translated(double dx, double dy) const { return {x1 + dx, y1 + dy, x2 + dx, y2 + dy}; }

  std::array<double, 4> as_array() const { return {x1, y1, x2, y2}; }

  auto operator<=>(const Box&) const = default;
};

/// Center/size form, used only at conversion boundaries.
struct CenterSize {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const CenterSize&) const = default;
};

inline CenterSize to_center_size(const Box& b) {
  return {b.center_x(), b.center_y(), b.x2 - b.x1, b.y2 - b.y1};
}

inline Box from_center_size(const CenterSize& c) {
  return {c.cx - 0.5 * c.w, c.cy - 0.5 * c.h, c.cx + 0.5 * c.w, c.cy + 0.5 * c.h};
}

/// COCO [x, y, w, h] to corner form.
inline Box from_xywh(double x, double y, double w, double h) { return {x, y, x + w, y + h}; }

inline Box intersection(const Box& a, const Box& b) {
  Box r{std::max(a.x1, b.x1), std::max(a.y1, b.y1), std::min(a.x2, b.x2), std::min(a.y2, b.y2)};
  if (r.x2 < r.x1) r.x2 = r.x1;
  if (r.y2 < r.y1) r.y2 = r.y1;
  return r;
}

inline Box enclosing(const Box& a, const Box& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

/// Intersection over union. Two zero-area boxes give 0, never NaN.
double iou(const Box& pred, const Box& gt);

}  // namespace lskdet
