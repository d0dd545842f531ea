#include "anthrofit/convex_hull.hpp"

#include <algorithm>

namespace anthrofit {

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<int> convex_hull_indices(const std::vector<Vec2>& points) {
    std::vector<int> order(points.size());
    for (size_t i = 0; i < points.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const Vec2& a = points[i];
        const Vec2& b = points[j];
        if (a.x() != b.x()) return a.x() < b.x();
        if (a.y() != b.y()) return a.y() < b.y();
        return i < j;
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](int i, int j) {
                                return points[i].x() == points[j].x() && points[i].y() == points[j].y();
                            }),
                order.end());
    const int n = static_cast<int>(order.size());
    if (n <= 2) return order;

    std::vector<int> hull(2 * n);
    int k = 0;
    auto at = [&](int rank) -> const Vec2& { return points[order[rank]]; };
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross2(points[hull[k - 2]], points[hull[k - 1]], at(i)) <= 0.0) --k;
        hull[k++] = order[i];
    }
    const int lower = k + 1;
    for (int i = n - 2; i >= 0; --i) {
        while (k >= lower && cross2(points[hull[k - 2]], points[hull[k - 1]], at(i)) <= 0.0) --k;
        hull[k++] = order[i];
    }
    hull.resize(k - 1);  // the walk ends back at the start point
    if (hull.size() < 2) return {order.front(), order.back()};  // all collinear
    return hull;
}

std::vector<Vec2> convex_hull(const std::vector<Vec2>& points) {
    std::vector<Vec2> out;
    for (int i : convex_hull_indices(points)) out.push_back(points[i]);
    return out;
}

double polygon_perimeter(const std::vector<Vec2>& polygon) {
    const size_t n = polygon.size();
    if (n < 2) return 0.0;
    if (n == 2) return 2.0 * (polygon[1] - polygon[0]).norm();
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) total += (polygon[(i + 1) % n] - polygon[i]).norm();
    return total;
}

}  // namespace anthrofit
