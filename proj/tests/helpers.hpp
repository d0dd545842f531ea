#pragma once

#include "anthrofit/mesh.hpp"
#include "anthrofit/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

namespace testutil {

using anthrofit::TriangleMesh;
using anthrofit::Vec3;

inline TriangleMesh make_mesh(std::vector<Vec3> vertices,
                              std::vector<std::array<int, 3>> triangles) {
    TriangleMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    return mesh;
}

inline TriangleMesh single_triangle() {
    return make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
}

// Two triangles sharing the edge 0-2.
inline TriangleMesh two_triangles() {
    return make_mesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

// Unit square triangulated with the 0-2 diagonal.
inline TriangleMesh square_with_diagonal() {
    return make_mesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

// Vertices 0..5: (+-1,0,0), (0,+-1,0), (0,0,+-1).
inline TriangleMesh octahedron() {
    return make_mesh(
        {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}},
        {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}});
}

// Open fan: apex 0, rim 1..n+1, n triangles.
inline TriangleMesh triangle_fan(int n) {
    std::vector<Vec3> vertices{{0, 0, 0}};
    std::vector<std::array<int, 3>> triangles;
    for (int i = 0; i <= n; ++i) {
        double angle = 3.14159265358979323846 * i / n;
        vertices.push_back({std::cos(angle), std::sin(angle), 1.0});
    }
    for (int i = 1; i <= n; ++i) triangles.push_back({0, i, i + 1});
    return make_mesh(std::move(vertices), std::move(triangles));
}

// Triangulated tube over a notched square cross-section, rings at z = 0, 1, 2.
// The notch cuts into the x = 1 face; the hull of any ring bridges it, so the
// hull perimeter equals the plain square's perimeter, 8.
inline TriangleMesh notched_prism() {
    const std::vector<std::pair<double, double>> ring = {
        {1, -1}, {1, -0.3}, {0.5, -0.3}, {0.5, 0.3}, {1, 0.3}, {1, 1}, {-1, 1}, {-1, -1}};
    const int n = static_cast<int>(ring.size());
    std::vector<Vec3> vertices;
    for (int level = 0; level < 3; ++level)
        for (const auto& [x, y] : ring) vertices.push_back({x, y, static_cast<double>(level)});
    std::vector<std::array<int, 3>> triangles;
    for (int level = 0; level < 2; ++level) {
        const int lo = level * n;
        const int hi = lo + n;
        for (int k = 0; k < n; ++k) {
            const int kn = (k + 1) % n;
            triangles.push_back({lo + k, lo + kn, hi + kn});
            triangles.push_back({lo + k, hi + kn, hi + k});
        }
    }
    return make_mesh(std::move(vertices), std::move(triangles));
}

// Flat strip of 2(n+1) vertices along x, length n.
inline TriangleMesh bar_strip(int n) {
    std::vector<Vec3> vertices;
    for (int i = 0; i <= n; ++i) {
        vertices.push_back({static_cast<double>(i), 0, 0});
        vertices.push_back({static_cast<double>(i), 1, 0});
    }
    std::vector<std::array<int, 3>> triangles;
    for (int i = 0; i < n; ++i) {
        const int a = 2 * i;
        triangles.push_back({a, a + 2, a + 1});
        triangles.push_back({a + 1, a + 2, a + 3});
    }
    return make_mesh(std::move(vertices), std::move(triangles));
}

// Connected random mesh with 4..max_vertices vertices: a triangle spine over
// a shuffled vertex order plus a few extra random triangles.
inline TriangleMesh random_small_mesh(anthrofit::Rng& rng, int max_vertices) {
    const int n = 4 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_vertices - 3)));
    std::vector<Vec3> vertices;
    for (int i = 0; i < n; ++i)
        vertices.push_back({rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 100)});
    std::vector<std::array<int, 3>> triangles;
    for (int i = 0; i + 2 < n; ++i) triangles.push_back({i, i + 1, i + 2});
    const int extra = static_cast<int>(rng.index(4));
    for (int t = 0; t < extra; ++t) {
        int a = static_cast<int>(rng.index(n));
        int b = static_cast<int>(rng.index(n));
        int c = static_cast<int>(rng.index(n));
        if (a == b || b == c || a == c) continue;
        triangles.push_back({a, b, c});
    }
    return make_mesh(std::move(vertices), std::move(triangles));
}

// Shortest-path oracle: exhaustive search over simple paths. Only viable for
// tiny graphs.
inline double brute_force_geodesic(const TriangleMesh& mesh, int a, int b) {
    const int n = mesh.vertex_count();
    std::vector<std::vector<std::pair<int, double>>> adjacency(n);
    std::set<std::pair<int, int>> seen;
    for (const auto& tri : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int i = tri[e];
            int j = tri[(e + 1) % 3];
            auto key = std::minmax(i, j);
            if (!seen.insert(key).second) continue;
            double len = (mesh.vertices[i] - mesh.vertices[j]).norm();
            adjacency[i].push_back({j, len});
            adjacency[j].push_back({i, len});
        }
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> visited(n, 0);
    auto dfs = [&](auto&& self, int v, double acc) -> void {
        if (acc >= best) return;
        if (v == b) {
            best = acc;
            return;
        }
        visited[v] = 1;
        for (const auto& [w, len] : adjacency[v])
            if (!visited[w]) self(self, w, acc + len);
        visited[v] = 0;
    };
    dfs(dfs, a, 0.0);
    return best;
}

}  // namespace testutil
