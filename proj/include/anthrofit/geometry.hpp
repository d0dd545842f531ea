#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <utility>

namespace anthrofit {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct Plane {
    Vec3 point;
    Vec3 normal; // unit length
};

inline double signed_distance(const Plane& plane, const Vec3& p) {
    return (p - plane.point).dot(plane.normal);
}

// Orthonormal in-plane basis (u, v) for a unit normal. The axis with the
// smallest |component| of the normal seeds u, so the frame is a fixed
// function of the normal alone.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& normal) {
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(normal[i]) < std::abs(normal[k])) k = i;
    }
    Vec3 axis = Vec3::Zero();
    axis[k] = 1.0;
    Vec3 u = normal.cross(axis).normalized();
    Vec3 v = normal.cross(u);
    return {u, v};
}

} // namespace anthrofit
