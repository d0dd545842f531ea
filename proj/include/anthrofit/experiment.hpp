#pragma once

#include "anthrofit/refinement.hpp"
#include "anthrofit/report.hpp"
#include "anthrofit/shape_model.hpp"
#include "anthrofit/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace anthrofit {

// Self-contained protocol run: build a synthetic family, train, sample
// targets, then predict each target twice — the clamped feature-analysis
// baseline and the full two-stage pipeline — and evaluate both.
//
// protocol: "close"          targets near the training distribution
//           "ellipsoid"      targets at Mahalanobis distance ellipsoid_k
//           "heldout"        targets measured on unseen family samples
//           "small-training" held-out samples carry a local bump that the
//                            training family cannot express
struct ExperimentConfig {
    std::string protocol = "heldout";
    double ellipsoid_k = 3.0;
    std::uint64_t seed = 1;
    int threads = 1;
    bool clamp_baseline = true;
    int resolution = 32;
    int train_count = 40;
    int test_count = 10;
    int mode_count = 8;
    double bump_radius = 70.0;     // mm, small-training only
    double bump_amplitude = 25.0;  // mm, small-training only
    RefinementConfig refinement;
};

void validate(const ExperimentConfig& config);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> names;
    std::vector<std::string> groups;   // per-dimension composite label
    Eigen::MatrixXd targets;           // test_count x q
    EvaluationReport baseline;
    EvaluationReport refined;
    std::vector<TriangleMesh> baseline_meshes;
    std::vector<TriangleMesh> refined_meshes;
    // Frozen-constraint E_m per subject at each pipeline stage.
    Eigen::VectorXd em_init;
    Eigen::VectorXd em_stage1;
    Eigen::VectorXd em_stage2;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

nlohmann::ordered_json experiment_to_json(const ExperimentResult& result);
std::string experiment_table(const ExperimentResult& result);

// Writes report.json, report.txt, targets.csv, and the per-subject baseline
// and refined OBJ meshes into the directory (created if missing).
void write_experiment_bundle(const ExperimentResult& result, const std::string& directory);

struct GradientCheck {
    std::string term;
    double max_relative_error = 0.0;

    bool pass() const { return max_relative_error < 1e-6; }
};

// Compares the analytic gradients of the four energies and their stage-2
// combination against central finite differences on seeded perturbed meshes.
// Returns one row per term.
std::vector<GradientCheck> check_gradients(std::uint64_t seed, int cases = 20);

}  // namespace anthrofit
