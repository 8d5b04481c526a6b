#pragma once

#include <cmath>

namespace vmimo {

struct Point2D {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

inline double squared_distance(const Point2D& a, const Point2D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point2D& a, const Point2D& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Axis-aligned simulation region anchored at the origin.
struct Rect {
  double width = 0.0;   // meters
  double height = 0.0;  // meters

  double area() const { return width * height; }
  Point2D center() const { return {width / 2.0, height / 2.0}; }
  bool contains(const Point2D& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
};

}  // namespace vmimo
