#pragma once

#include "anthrofit/geometry.hpp"
#include "anthrofit/mesh.hpp"

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anthrofit {

enum class MeasurementType { euclidean, geodesic, circumference };

std::string to_string(MeasurementType type);
MeasurementType measurement_type_from_string(const std::string& text);

// Tagged union flattened into one struct; the type tag says which fields apply.
// euclidean/geodesic use a,b; circumference uses anchor, normal, region.
struct MeasurementSpec {
    std::string name;
    std::string group;  // empty = ungrouped; composite measurements share a label
    MeasurementType type = MeasurementType::euclidean;
    int a = -1;
    int b = -1;
    int anchor = -1;
    Vec3 normal = Vec3::Zero();
    std::vector<int> region;
};

struct MeasurementProfile {
    std::vector<MeasurementSpec> specs;
    // Counts of the mesh family the profile was authored for; -1 = unbound.
    int reference_vertex_count = -1;
    int reference_triangle_count = -1;

    size_t size() const { return specs.size(); }
};

// Structural checks: unique names, unit normals, non-empty regions, index
// ranges against the reference counts when bound. Throws InputError.
void validate(const MeasurementProfile& profile);
// Validates against a concrete mesh and records its counts on the profile.
void bind_profile(MeasurementProfile& profile, const TriangleMesh& mesh);

struct MeasurementVector {
    std::vector<std::string> names;
    Eigen::VectorXd values;
};

struct GeodesicPath {
    std::vector<int> vertices;        // a ... b, consecutive entries adjacent
    std::vector<double> edge_lengths; // vertices.size() - 1 entries
    double total = 0.0;
};

// q = alpha * p_a + (1 - alpha) * p_b; alpha == 1 encodes the mesh vertex a.
struct SectionPoint {
    int a = -1;
    int b = -1;
    double alpha = 1.0;

    Vec3 position(const TriangleMesh& mesh) const {
        return alpha * mesh.vertices[a] + (1.0 - alpha) * mesh.vertices[b];
    }
};

struct SectionChain {
    std::vector<SectionPoint> points;
    bool closed = false;
};

struct CircumferencePolygon {
    std::vector<SectionPoint> points;  // convex hull, counter-clockwise
    std::vector<double> edge_lengths;  // closing edge included; size == points.size()
    double perimeter = 0.0;
};

double euclidean_length(const TriangleMesh& mesh, const MeasurementSpec& spec);

GeodesicPath geodesic_path(const TriangleMesh& mesh, const EdgeGraph& graph, int a, int b);
GeodesicPath geodesic_path(const TriangleMesh& mesh, const MeasurementSpec& spec);

// Intersects the region's triangles with the plane. Chain points are mesh
// vertices (within 1e-9 of the plane) or edge crossings. Deterministic:
// chains ordered open-then-closed-then-isolated by discovery.
std::vector<SectionChain> plane_section(const TriangleMesh& mesh, const std::vector<int>& region,
                                        const Plane& plane);

// Plane through the anchor vertex with the spec normal; picks the chain
// containing the anchor, else the nearest one, and returns the convex hull
// of its points in the section plane. Throws MeasurementUndefined when the
// section is empty or collapses below two distinct points.
CircumferencePolygon circumference(const TriangleMesh& mesh, const MeasurementSpec& spec);

double evaluate(const TriangleMesh& mesh, const EdgeGraph& graph, const MeasurementSpec& spec);

MeasurementVector measure_all(const TriangleMesh& mesh, const MeasurementProfile& profile);

}  // namespace anthrofit
