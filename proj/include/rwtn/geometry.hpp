#pragma once

#include <algorithm>

#include "rwtn/errors.hpp"

namespace rwtn {

/// Axis-aligned box in unit-square coordinates, corners (x0,y0)-(x1,y1).
struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    bool operator==(const Box&) const = default;
};

inline double intersection_area(const Box& a, const Box& b) {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    return w > 0 && h > 0 ? w * h : 0.0;
}

/// ir(b, b') = area(b intersect b') / area(b): how much of b lies inside b'.
inline double inclusion_ratio(const Box& b, const Box& bp) {
    const double a = b.area();
    if (a <= 0.0) throw DimensionError("inclusion_ratio: degenerate box");
    return intersection_area(b, bp) / a;
}

}  // namespace rwtn
