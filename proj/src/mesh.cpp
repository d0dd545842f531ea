#include "anthrofit/mesh.hpp"

#include "anthrofit/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace anthrofit {

ValidationReport validate(const TriangleMesh& mesh) {
    const int m = mesh.vertex_count();
    std::vector<char> referenced(m, 0);
    std::map<std::pair<int, int>, int> edge_use;

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= m) {
                throw InputError("triangle " + std::to_string(t) + " references vertex " +
                                 std::to_string(tri[k]) + " outside [0, " + std::to_string(m) + ")");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw InputError("triangle " + std::to_string(t) + " has a repeated vertex index");
        }
        for (int k = 0; k < 3; ++k) {
            referenced[tri[k]] = 1;
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_use[{a, b}] += 1;
        }
    }

    for (int v = 0; v < m; ++v) {
        if (!referenced[v]) {
            throw InputError("vertex " + std::to_string(v) + " is not referenced by any triangle");
        }
    }

    ValidationReport report;
    for (const auto& [edge, count] : edge_use) {
        if (count > 2) {
            report.warnings.push_back("non-manifold edge (" + std::to_string(edge.first) + ", " +
                                      std::to_string(edge.second) + ") used by " +
                                      std::to_string(count) + " triangles");
        }
    }
    return report;
}

EdgeGraph build_edge_graph(const TriangleMesh& mesh) {
    std::set<std::pair<int, int>> edges;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.insert({a, b});
        }
    }

    EdgeGraph graph;
    graph.adjacency.resize(mesh.vertex_count());
    for (const auto& [a, b] : edges) {
        const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
        if (len == 0.0) {
            throw InputError("degenerate geometry: zero-length edge (" + std::to_string(a) +
                             ", " + std::to_string(b) + ")");
        }
        graph.adjacency[a].emplace_back(b, len);
        graph.adjacency[b].emplace_back(a, len);
    }
    for (auto& nbrs : graph.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
    }
    return graph;
}

std::vector<int> one_ring(const TriangleMesh& mesh, int v) {
    if (v < 0 || v >= mesh.vertex_count()) {
        throw InputError("one_ring: vertex index " + std::to_string(v) + " out of range");
    }
    std::set<int> ring;
    for (const auto& tri : mesh.triangles) {
        if (tri[0] == v || tri[1] == v || tri[2] == v) {
            for (int k = 0; k < 3; ++k) {
                if (tri[k] != v) ring.insert(tri[k]);
            }
        }
    }
    return {ring.begin(), ring.end()};
}

Eigen::VectorXd flatten(const TriangleMesh& mesh) {
    Eigen::VectorXd coords(3 * mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        coords.segment<3>(3 * v) = mesh.vertices[v];
    }
    return coords;
}

TriangleMesh unflatten(const Eigen::VectorXd& coords, std::vector<std::array<int, 3>> triangles) {
    if (coords.size() % 3 != 0) {
        throw InputError("unflatten: coordinate vector length " + std::to_string(coords.size()) +
                         " is not divisible by 3");
    }
    TriangleMesh mesh;
    mesh.vertices.resize(coords.size() / 3);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        mesh.vertices[v] = coords.segment<3>(3 * static_cast<int>(v));
    }
    mesh.triangles = std::move(triangles);
    return mesh;
}

bool same_topology(const TriangleMesh& a, const TriangleMesh& b) {
    return a.vertex_count() == b.vertex_count() && a.triangles == b.triangles;
}

std::pair<Vec3, Vec3> bounding_box(const TriangleMesh& mesh) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& p : mesh.vertices) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

double bbox_diagonal(const TriangleMesh& mesh) {
    auto [lo, hi] = bounding_box(mesh);
    return (hi - lo).norm();
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
    for (const auto& tri : mesh.triangles) {
        const Vec3 n = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                           .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
        for (int k = 0; k < 3; ++k) normals[tri[k]] += n; // |n| = 2 * area
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 0.0) n /= len;
    }
    return normals;
}

} // namespace anthrofit
