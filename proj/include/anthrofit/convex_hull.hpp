#pragma once

#include "anthrofit/geometry.hpp"

#include <vector>

namespace anthrofit {

// 2D convex hull, monotone chain. Hull vertices come back in counter-clockwise
// order starting from the lexicographically smallest point (x first, then y).
// Points strictly inside and points interior to hull edges are excluded.
// Degenerate inputs: one distinct point -> that point; all collinear -> the
// two extreme points (a segment, perimeter 2 x length).
std::vector<int> convex_hull_indices(const std::vector<Vec2>& points);
std::vector<Vec2> convex_hull(const std::vector<Vec2>& points);

double polygon_perimeter(const std::vector<Vec2>& polygon);

}  // namespace anthrofit
