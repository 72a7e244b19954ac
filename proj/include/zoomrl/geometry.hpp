#pragma once

#include <algorithm>

namespace zoomrl {

/// Axis-aligned box in relative coordinates of some reference image.
/// Valid boxes satisfy 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 1.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool is_valid() const {
    return 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 && y2 <= 1.0;
  }

  bool contains(const BBox& inner) const {
    return x1 <= inner.x1 && y1 <= inner.y1 && inner.x2 <= x2 && inner.y2 <= y2;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline constexpr BBox kFullFrame{0.0, 0.0, 1.0, 1.0};

/// Area of a ∩ b; zero when they do not overlap.
inline double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

/// Intersection-over-union. Symmetric bit-for-bit: both operand orders
/// evaluate the same floating point expressions.
double iou(const BBox& a, const BBox& b);

/// Maps `child`, given relative to the window `parent`, into the coordinate
/// frame that `parent` is expressed in.
inline BBox compose(const BBox& parent, const BBox& child) {
  const double w = parent.x2 - parent.x1;
  const double h = parent.y2 - parent.y1;
  return BBox{parent.x1 + child.x1 * w, parent.y1 + child.y1 * h,
              parent.x1 + child.x2 * w, parent.y1 + child.y2 * h};
}

/// Inverse of compose(): expresses `box` relative to `window`. The result is
/// not clipped and may fall outside [0,1].
inline BBox relative_to(const BBox& window, const BBox& box) {
  const double w = window.x2 - window.x1;
  const double h = window.y2 - window.y1;
  return BBox{(box.x1 - window.x1) / w, (box.y1 - window.y1) / h,
              (box.x2 - window.x1) / w, (box.y2 - window.y1) / h};
}

}  // namespace zoomrl
