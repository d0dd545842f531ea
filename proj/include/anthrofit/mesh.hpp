#pragma once

#include "anthrofit/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace anthrofit {

// Indexed triangle surface. All of the corresponded meshes in a training set
// share one triangle list and vertex count; positions are in millimetres.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
};

struct ValidationReport {
    std::vector<std::string> warnings; // non-manifold edges and similar
};

// Checks index ranges, repeated indices within a triangle, and that every
// vertex is referenced. Hard violations throw InputError; non-manifold edges
// only produce warnings.
ValidationReport validate(const TriangleMesh& mesh);

// Undirected edge adjacency with Euclidean edge lengths.
struct EdgeGraph {
    // adjacency[v] = sorted list of (neighbor, length)
    std::vector<std::vector<std::pair<int, double>>> adjacency;

    int vertex_count() const { return static_cast<int>(adjacency.size()); }
};

// One entry per unique mesh edge; throws on zero-length edges.
EdgeGraph build_edge_graph(const TriangleMesh& mesh);

// Vertices sharing a triangle with v, excluding v, sorted ascending.
std::vector<int> one_ring(const TriangleMesh& mesh, int v);

// Component order (x0, y0, z0, x1, ...).
Eigen::VectorXd flatten(const TriangleMesh& mesh);
TriangleMesh unflatten(const Eigen::VectorXd& coords, std::vector<std::array<int, 3>> triangles);

bool same_topology(const TriangleMesh& a, const TriangleMesh& b);

std::pair<Vec3, Vec3> bounding_box(const TriangleMesh& mesh);
double bbox_diagonal(const TriangleMesh& mesh);

// Area-weighted per-vertex normals (normalized; zero for degenerate stars).
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

} // namespace anthrofit
