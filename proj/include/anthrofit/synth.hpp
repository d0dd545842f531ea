#pragma once

#include "anthrofit/measurement.hpp"
#include "anthrofit/mesh.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anthrofit {

// Linear synthetic shape family: shape = template + sum c_k * mode_k with
// modes as flattened 3m displacement fields and c_k ~ N(0, stddev_k^2).
struct ShapeFamily {
    TriangleMesh template_mesh;
    std::vector<Eigen::VectorXd> modes;
    Eigen::VectorXd stddevs;
};

// Template plus the construction's landmark vertices and per-part triangle
// regions. Landmarks include head_top, neck, bottom, hand_l/r, shoulder_l/r,
// foot_l/r, waist_0/q/h/3q, chest_0/h, hip_0/h, head_ring_0, wrist_l_0..3,
// knee_l_0..3, knee_l; regions include torso, head, arm_l/r, leg_l/r.
struct BuiltTemplate {
    TriangleMesh mesh;
    std::map<std::string, int> landmarks;
    std::map<std::string, std::vector<int>> regions;
};

// kind: "mannequin" (capsule torso, head, two arms, two legs, merged into one
// closed surface) or "blob" (radially deformed sphere). resolution is the
// equatorial segment count; the default 32 gives ~2500 mannequin vertices.
BuiltTemplate build_template(const std::string& kind, int resolution = 32);
TriangleMesh make_template(const std::string& kind, int resolution = 32);

// 14 point distances, 4 circumferences, and 2 four-geodesic groups on the
// mannequin at the same resolution.
MeasurementProfile body_profile(int resolution = 32);
// 7 geodesic arcs on the blob.
MeasurementProfile face_profile(int resolution = 32);

// K low-frequency displacement fields; per-vertex magnitude capped at 5% of
// the bounding-box diagonal and per-edge variation at half the edge length.
std::vector<Eigen::VectorXd> make_modes(const TriangleMesh& template_mesh, int k, uint64_t seed);

ShapeFamily make_family(const std::string& kind, int resolution, int k, uint64_t seed);

std::vector<TriangleMesh> sample_family(const ShapeFamily& family, int n, uint64_t seed);

// Raised-bump deformation: vertices within the geodesic radius move along
// their normals by amplitude * cos^2(pi * d / (2 * radius)).
TriangleMesh add_local_bump(const TriangleMesh& mesh, int center, double radius, double amplitude);

struct MeasurementGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd cholesky;  // L with L * L^T = covariance

    int dimension() const { return static_cast<int>(mean.size()); }
};

MeasurementGaussian fit_gaussian(const std::vector<Eigen::VectorXd>& samples);

// Draws from N(mean, covariance); redraws any sample with a non-positive
// component, since measurements are lengths.
std::vector<Eigen::VectorXd> sample_close(const MeasurementGaussian& gaussian, int count,
                                          uint64_t seed);

// Points at exact Mahalanobis distance k: x = mean + k * L * u with u uniform
// on the unit sphere.
std::vector<Eigen::VectorXd> sample_ellipsoid(const MeasurementGaussian& gaussian, double k,
                                              int count, uint64_t seed);

// The degenerate single-point variant x = mean + k * diag(covariance).
Eigen::VectorXd diagonal_offset_point(const MeasurementGaussian& gaussian, double k);

}  // namespace anthrofit
