#pragma once

#include <array>
#include <span>

namespace comfort {

using Point = std::array<double, 2>;

double polygon_area(std::span<const Point> ring);

// True if no two non-adjacent edges intersect and no edge degenerates.
bool polygon_is_simple(std::span<const Point> ring);

bool point_on_segment(const Point& p, const Point& a, const Point& b);

// Even-odd rule; points on the boundary count as inside.
bool point_in_polygon(const Point& p, std::span<const Point> ring);

}  // namespace comfort
