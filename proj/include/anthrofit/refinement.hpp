#pragma once

#include "anthrofit/measurement.hpp"
#include "anthrofit/mesh.hpp"
#include "anthrofit/shape_model.hpp"
#include "anthrofit/solver.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace anthrofit {

struct EuclideanTerm {
    std::string name;
    int a = -1;
    int b = -1;
    double target = 0.0;  // l_t(d), mm
};

struct EdgeTerm {
    int k = -1;
    int l = -1;
    double target = 0.0;  // l_t(e), mm
};

struct HullPoint {
    int a = -1;
    int b = -1;
    double alpha = 1.0;  // q = alpha p_a + (1 - alpha) p_b
};

struct HullEdgeTerm {
    HullPoint i;
    HullPoint j;
    double target = 0.0;
};

struct GeodesicTerm {
    std::string name;
    double target = 0.0;  // l_t(P)
    std::vector<EdgeTerm> edges;
};

struct CircumferenceTerm {
    std::string name;
    double target = 0.0;  // l_t(C)
    std::vector<HullEdgeTerm> edges;
};

// One freeze of the constraint topology: geodesic paths and hull encodings
// pinned to the mesh they were computed on, targets split per edge in
// proportion to current lengths.
struct FrozenConstraints {
    std::vector<EuclideanTerm> euclidean;
    std::vector<GeodesicTerm> geodesics;
    std::vector<CircumferenceTerm> circumferences;
    std::vector<std::string> dropped;  // specs undefined on this mesh (drop policy)
};

enum class UndefinedPolicy { raise, drop };

FrozenConstraints freeze_constraints(const TriangleMesh& mesh, const MeasurementProfile& profile,
                                     const MeasurementVector& targets,
                                     UndefinedPolicy policy = UndefinedPolicy::raise);

struct EnergyResult {
    double energy = 0.0;
    Eigen::VectorXd gradient;  // 3m, flatten() ordering
};

EnergyResult energy_euclidean(const TriangleMesh& mesh, const FrozenConstraints& frozen);
EnergyResult energy_geodesic(const TriangleMesh& mesh, const FrozenConstraints& frozen);
EnergyResult energy_circumference(const TriangleMesh& mesh, const FrozenConstraints& frozen);
EnergyResult measurement_energy(const TriangleMesh& mesh, const FrozenConstraints& frozen);

EnergyResult energy_smoothness(const TriangleMesh& mesh, const TriangleMesh& reference);
EnergyResult energy_smoothness(const TriangleMesh& mesh, const TriangleMesh& reference,
                               const EdgeGraph& graph);

struct RefinementConfig {
    double l = 3.0;        // clamp multiplier
    double lambda = 0.1;   // smoothness weight in [0, 1]
    int s = 3;             // constraint-recomputation count, stage 1
    int s_vertex = -1;     // stage 2 count; negative = same as s
    SolveConfig solver;
    UndefinedPolicy undefined = UndefinedPolicy::drop;

    int stage2_count() const { return s_vertex >= 0 ? s_vertex : s; }
};

void validate(const RefinementConfig& config);

// One frozen-constraint inner solve. Stage 1 optimizes E_m; stage 2 the
// combined (1 - lambda) E_m + lambda E_s.
struct SolveRecord {
    double energy_start = 0.0;
    double energy_end = 0.0;
    double energy_after_clamp = 0.0;  // == energy_end in stage 2 (no clamping there)
    int iterations = 0;
    StopReason reason = StopReason::iteration_cap;
    std::vector<std::string> dropped;
};

struct StageReport {
    std::vector<SolveRecord> solves;
};

ShapeWeights optimize_weights(const PcaModel& model, const MeasurementProfile& profile,
                              const MeasurementVector& targets, const ShapeWeights& w0,
                              const RefinementConfig& config, StageReport* report = nullptr);

TriangleMesh optimize_vertices(const TriangleMesh& x_pca, const MeasurementProfile& profile,
                               const MeasurementVector& targets, const RefinementConfig& config,
                               StageReport* report = nullptr);

struct PredictReport {
    std::vector<std::string> names;
    Eigen::VectorXd targets;
    ShapeWeights w_init;   // clamped feature-analysis weights
    ShapeWeights w_stage1;
    StageReport stage1;
    StageReport stage2;
    // E_m with constraints frozen on each stage's own output mesh, so the
    // three values are directly comparable.
    double em_init = 0.0;
    double em_stage1 = 0.0;
    double em_stage2 = 0.0;
    // Measured values on the init / stage-1 / stage-2 meshes; NaN where a
    // measurement is undefined on that mesh.
    Eigen::VectorXd measured_init;
    Eigen::VectorXd measured_stage1;
    Eigen::VectorXd measured_stage2;

    Eigen::VectorXd residuals_init() const { return (measured_init - targets).cwiseAbs(); }
    Eigen::VectorXd residuals_stage1() const { return (measured_stage1 - targets).cwiseAbs(); }
    Eigen::VectorXd residuals_stage2() const { return (measured_stage2 - targets).cwiseAbs(); }
};

TriangleMesh predict_shape(const PcaModel& model, const FeatureMap& featmap,
                           const MeasurementProfile& profile, const MeasurementVector& targets,
                           const RefinementConfig& config, PredictReport* report = nullptr);

nlohmann::ordered_json predict_report_to_json(const PredictReport& report);

// measure_all, but undefined measurements come back NaN instead of throwing;
// their names are appended to *undefined when given.
MeasurementVector measure_all_lenient(const TriangleMesh& mesh, const MeasurementProfile& profile,
                                      std::vector<std::string>* undefined = nullptr);

}  // namespace anthrofit
