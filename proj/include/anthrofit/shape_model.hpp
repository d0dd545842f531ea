#pragma once

#include "anthrofit/measurement.hpp"
#include "anthrofit/mesh.hpp"

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anthrofit {

struct PcaModel {
    Eigen::VectorXd mean;       // 3m, mm
    Eigen::MatrixXd basis;      // 3m x r, orthonormal columns
    Eigen::VectorXd variances;  // r, mm^2, non-increasing
    Eigen::VectorXd stddevs;    // sqrt(variances)
    std::vector<std::array<int, 3>> triangles;
    int training_count = 0;

    int vertex_count() const { return static_cast<int>(mean.size()) / 3; }
    int rank() const { return static_cast<int>(basis.cols()); }
};

using ShapeWeights = Eigen::VectorXd;

enum class WeightNormalization { eigenvalue, stddev };

std::string to_string(WeightNormalization norm);
WeightNormalization weight_normalization_from_string(const std::string& text);

// Maps [P; 1] (q measurements plus a trailing constant) to normalized PCA
// weights; the normalization records the per-dimension divisor convention.
struct FeatureMap {
    Eigen::MatrixXd matrix;  // r x (q + 1)
    WeightNormalization normalization = WeightNormalization::eigenvalue;

    int measurement_count() const { return static_cast<int>(matrix.cols()) - 1; }
};

// r < 0 keeps every component with nonzero variance (at most n - 1).
PcaModel train_pca(const std::vector<TriangleMesh>& meshes, int r = -1);

ShapeWeights project(const PcaModel& model, const TriangleMesh& mesh);
TriangleMesh synthesize(const PcaModel& model, const ShapeWeights& weights);

FeatureMap train_feature_map(const PcaModel& model, const std::vector<Eigen::VectorXd>& measurements,
                             const std::vector<ShapeWeights>& weights,
                             WeightNormalization normalization = WeightNormalization::eigenvalue);

ShapeWeights predict_weights(const FeatureMap& featmap, const PcaModel& model,
                             const Eigen::VectorXd& measurements);

ShapeWeights clamp_weights(const PcaModel& model, const ShapeWeights& weights, double l);

// One trained artifact: shape space, measurement-to-weights map, and the
// profile the map was trained on, so prediction needs no extra inputs.
struct TrainedModel {
    PcaModel pca;
    FeatureMap feature_map;
    MeasurementProfile profile;
};

TrainedModel read_model(const std::string& path);
void write_model(const std::string& path, const TrainedModel& model);

}  // namespace anthrofit
