#include "comfort/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace comfort {

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool bbox_overlap(const Point& a1, const Point& a2, const Point& b1, const Point& b2) {
    return std::min(a1[0], a2[0]) <= std::max(b1[0], b2[0]) &&
           std::min(b1[0], b2[0]) <= std::max(a1[0], a2[0]) &&
           std::min(a1[1], a2[1]) <= std::max(b1[1], b2[1]) &&
           std::min(b1[1], b2[1]) <= std::max(a1[1], a2[1]);
}

bool segments_intersect(const Point& a1, const Point& a2, const Point& b1, const Point& b2) {
    if (!bbox_overlap(a1, a2, b1, b2)) return false;
    const double d1 = cross(b1, b2, a1);
    const double d2 = cross(b1, b2, a2);
    const double d3 = cross(a1, a2, b1);
    const double d4 = cross(a1, a2, b2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && point_on_segment(a1, b1, b2)) return true;
    if (d2 == 0 && point_on_segment(a2, b1, b2)) return true;
    if (d3 == 0 && point_on_segment(b1, a1, a2)) return true;
    if (d4 == 0 && point_on_segment(b2, a1, a2)) return true;
    return false;
}

}  // namespace

double polygon_area(std::span<const Point> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        sum += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(sum) / 2.0;
}

bool point_on_segment(const Point& p, const Point& a, const Point& b) {
    if (cross(a, b, p) != 0.0) return false;
    return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
           std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
}

bool polygon_is_simple(std::span<const Point> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a1 = ring[i];
        const Point& a2 = ring[(i + 1) % n];
        if (a1 == a2) return false;  // degenerate edge
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (sharing a vertex).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Point& b1 = ring[j];
            const Point& b2 = ring[(j + 1) % n];
            if (segments_intersect(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

bool point_in_polygon(const Point& p, std::span<const Point> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (point_on_segment(p, ring[i], ring[(i + 1) % n])) return true;
    }
    // Even-odd ray cast toward +x.
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a[1] > p[1]) != (b[1] > p[1])) {
            const double x_at = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if (p[0] < x_at) inside = !inside;
        }
    }
    return inside;
}

}  // namespace comfort
