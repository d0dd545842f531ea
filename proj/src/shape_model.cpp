#include "anthrofit/shape_model.hpp"

#include "anthrofit/errors.hpp"
#include "anthrofit/profile_io.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace anthrofit {

std::string to_string(WeightNormalization norm) {
    return norm == WeightNormalization::eigenvalue ? "eigenvalue" : "stddev";
}

WeightNormalization weight_normalization_from_string(const std::string& text) {
    if (text == "eigenvalue") return WeightNormalization::eigenvalue;
    if (text == "stddev") return WeightNormalization::stddev;
    throw InputError("unknown weight normalization '" + text + "'");
}

namespace {

// Largest-magnitude entry made positive, first index winning ties, so
// retraining on the same data reproduces the same basis signs.
void fix_column_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index at = 0;
        basis.col(j).cwiseAbs().maxCoeff(&at);
        if (basis(at, j) < 0.0) basis.col(j) = -basis.col(j);
    }
}

Eigen::VectorXd normalization_divisors(const PcaModel& model, WeightNormalization norm) {
    return norm == WeightNormalization::eigenvalue ? model.variances : model.stddevs;
}

}  // namespace

PcaModel train_pca(const std::vector<TriangleMesh>& meshes, int r) {
    const int n = static_cast<int>(meshes.size());
    if (n < 2) throw InputError("PCA training needs at least 2 meshes, got " + std::to_string(n));
    for (int i = 1; i < n; ++i)
        if (!same_topology(meshes[0], meshes[i]))
            throw InputError("training mesh " + std::to_string(i) + " does not match the topology of mesh 0");
    if (r > n - 1)
        throw InputError("requested " + std::to_string(r) + " components but only " +
                         std::to_string(n - 1) + " are available from " + std::to_string(n) + " meshes");

    const Eigen::Index dim = static_cast<Eigen::Index>(meshes[0].vertex_count()) * 3;
    Eigen::MatrixXd data(dim, n);
    for (int i = 0; i < n; ++i) data.col(i) = flatten(meshes[i]);
    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;

    // Snapshot decomposition: eigenvectors of the n x n Gram matrix lift to
    // covariance eigenvectors as D w / sqrt(s), with lambda = s / (n - 1).
    const Eigen::MatrixXd gram = data.transpose() * data;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("Gram matrix eigendecomposition failed");

    const Eigen::VectorXd s = eig.eigenvalues();  // ascending
    const double s_max = s.size() ? std::max(0.0, s[s.size() - 1]) : 0.0;
    const double cutoff = s_max * 1e-12;
    std::vector<int> keep;
    for (int i = n - 1; i >= 0 && static_cast<int>(keep.size()) < n - 1; --i)
        if (s[i] > cutoff) keep.push_back(i);
    if (r >= 0 && static_cast<int>(keep.size()) > r) keep.resize(r);

    PcaModel model;
    model.mean = mean;
    model.triangles = meshes[0].triangles;
    model.training_count = n;
    const int rank = static_cast<int>(keep.size());
    model.basis.resize(dim, rank);
    model.variances.resize(rank);
    for (int j = 0; j < rank; ++j) {
        const int i = keep[j];
        model.basis.col(j) = data * (eig.eigenvectors().col(i) / std::sqrt(s[i]));
        model.variances[j] = s[i] / (n - 1);
    }
    if (rank > 0) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(model.basis);
        model.basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim, rank);
        fix_column_signs(model.basis);
    }
    model.stddevs = model.variances.cwiseSqrt();
    return model;
}

ShapeWeights project(const PcaModel& model, const TriangleMesh& mesh) {
    if (mesh.vertex_count() != model.vertex_count() || mesh.triangles != model.triangles)
        throw InputError("mesh topology does not match the model");
    return model.basis.transpose() * (flatten(mesh) - model.mean);
}

TriangleMesh synthesize(const PcaModel& model, const ShapeWeights& weights) {
    if (weights.size() != model.rank())
        throw InputError("weight vector has length " + std::to_string(weights.size()) +
                         " but the model has " + std::to_string(model.rank()) + " components");
    return unflatten(model.mean + model.basis * weights, model.triangles);
}

FeatureMap train_feature_map(const PcaModel& model, const std::vector<Eigen::VectorXd>& measurements,
                             const std::vector<ShapeWeights>& weights, WeightNormalization normalization) {
    const int n = static_cast<int>(measurements.size());
    if (n < 2) throw InputError("feature-map training needs at least 2 subjects");
    if (weights.size() != measurements.size())
        throw InputError("measurement and weight lists are not aligned");
    const Eigen::Index q = measurements[0].size();
    const Eigen::Index r = model.rank();
    const Eigen::VectorXd divisors = normalization_divisors(model, normalization);

    Eigen::MatrixXd phi(n, q + 1);
    Eigen::MatrixXd targets(n, r);
    for (int i = 0; i < n; ++i) {
        if (measurements[i].size() != q) throw InputError("measurement vectors differ in length");
        if (weights[i].size() != r) throw InputError("weight vector length does not match the model");
        phi.row(i).head(q) = measurements[i].transpose();
        phi(i, q) = 1.0;
        targets.row(i) = (weights[i].array() / divisors.array()).transpose();
    }

    Eigen::MatrixXd normal = phi.transpose() * phi;
    const double ridge = 1e-8 * normal.trace() / static_cast<double>(q + 1);
    normal.diagonal().array() += ridge;
    const Eigen::MatrixXd solution = normal.ldlt().solve(phi.transpose() * targets);

    FeatureMap featmap;
    featmap.matrix = solution.transpose();
    featmap.normalization = normalization;
    return featmap;
}

ShapeWeights predict_weights(const FeatureMap& featmap, const PcaModel& model,
                             const Eigen::VectorXd& measurements) {
    const Eigen::Index q = featmap.matrix.cols() - 1;
    if (measurements.size() != q)
        throw InputError("expected " + std::to_string(q) + " measurements, got " +
                         std::to_string(measurements.size()));
    if ((measurements.array() <= 0.0).any())
        throw InputError("measurements must be positive lengths");
    if (featmap.matrix.rows() != model.rank())
        throw InputError("feature map does not match the model's component count");
    Eigen::VectorXd augmented(q + 1);
    augmented.head(q) = measurements;
    augmented[q] = 1.0;
    const Eigen::VectorXd divisors = normalization_divisors(model, featmap.normalization);
    return (featmap.matrix * augmented).cwiseProduct(divisors);
}

ShapeWeights clamp_weights(const PcaModel& model, const ShapeWeights& weights, double l) {
    if (l <= 0.0) throw InputError("clamp multiple must be positive");
    if (weights.size() != model.rank()) throw InputError("weight vector length does not match the model");
    ShapeWeights clamped = weights;
    for (Eigen::Index i = 0; i < clamped.size(); ++i) {
        const double bound = l * model.stddevs[i];
        clamped[i] = std::copysign(std::min(std::abs(weights[i]), bound), weights[i]);
    }
    return clamped;
}

TrainedModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    ordered_json doc;
    try {
        in >> doc;
    } catch (const ordered_json::exception& e) {
        throw InputError("cannot parse '" + path + "': " + e.what());
    }
    try {
        TrainedModel model;
        const int m = doc.at("m").get<int>();
        const int r = doc.at("r").get<int>();
        model.pca.training_count = doc.at("n").get<int>();
        const auto mean = doc.at("mean").get<std::vector<double>>();
        if (static_cast<int>(mean.size()) != 3 * m) throw InputError("mean length does not match m");
        model.pca.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
        const auto& basis = doc.at("basis");
        if (static_cast<int>(basis.size()) != r) throw InputError("basis column count does not match r");
        model.pca.basis.resize(3 * m, r);
        for (int j = 0; j < r; ++j) {
            const auto column = basis.at(j).get<std::vector<double>>();
            if (static_cast<int>(column.size()) != 3 * m) throw InputError("basis column length mismatch");
            model.pca.basis.col(j) = Eigen::Map<const Eigen::VectorXd>(column.data(), column.size());
        }
        const auto variances = doc.at("variances").get<std::vector<double>>();
        if (static_cast<int>(variances.size()) != r) throw InputError("variances length does not match r");
        model.pca.variances = Eigen::Map<const Eigen::VectorXd>(variances.data(), variances.size());
        model.pca.stddevs = model.pca.variances.cwiseSqrt();
        const auto triangles = doc.at("triangles").get<std::vector<std::vector<int>>>();
        for (const auto& t : triangles) {
            if (t.size() != 3) throw InputError("triangle record must have 3 indices");
            model.pca.triangles.push_back({t[0], t[1], t[2]});
        }
        const auto& fm = doc.at("feature_map");
        const auto rows = fm.at("matrix").get<std::vector<std::vector<double>>>();
        if (static_cast<int>(rows.size()) != r) throw InputError("feature map row count does not match r");
        if (!rows.empty()) {
            model.feature_map.matrix.resize(r, static_cast<Eigen::Index>(rows[0].size()));
            for (int i = 0; i < r; ++i) {
                if (rows[i].size() != rows[0].size()) throw InputError("ragged feature map matrix");
                model.feature_map.matrix.row(i) =
                    Eigen::Map<const Eigen::VectorXd>(rows[i].data(), rows[i].size()).transpose();
            }
        }
        model.feature_map.normalization =
            weight_normalization_from_string(fm.at("normalization").get<std::string>());
        model.profile = profile_from_json(doc.at("profile"));
        model.profile.reference_vertex_count = m;
        model.profile.reference_triangle_count = static_cast<int>(model.pca.triangles.size());
        validate(model.profile);
        return model;
    } catch (const ordered_json::exception& e) {
        throw InputError("malformed model file '" + path + "': " + e.what());
    }
}

void write_model(const std::string& path, const TrainedModel& model) {
    ordered_json doc;
    doc["m"] = model.pca.vertex_count();
    doc["r"] = model.pca.rank();
    doc["n"] = model.pca.training_count;
    doc["mean"] = std::vector<double>(model.pca.mean.data(), model.pca.mean.data() + model.pca.mean.size());
    ordered_json basis = ordered_json::array();
    for (int j = 0; j < model.pca.rank(); ++j) {
        const auto& col = model.pca.basis.col(j);
        basis.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    doc["basis"] = std::move(basis);
    doc["variances"] = std::vector<double>(model.pca.variances.data(),
                                           model.pca.variances.data() + model.pca.variances.size());
    ordered_json triangles = ordered_json::array();
    for (const auto& t : model.pca.triangles) triangles.push_back({t[0], t[1], t[2]});
    doc["triangles"] = std::move(triangles);
    ordered_json fm;
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < model.feature_map.matrix.rows(); ++i) {
        std::vector<double> row(model.feature_map.matrix.cols());
        for (int j = 0; j < model.feature_map.matrix.cols(); ++j) row[j] = model.feature_map.matrix(i, j);
        rows.push_back(std::move(row));
    }
    fm["matrix"] = std::move(rows);
    fm["normalization"] = to_string(model.feature_map.normalization);
    doc["feature_map"] = std::move(fm);
    doc["profile"] = profile_to_json(model.profile);

    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw InputError("write to '" + path + "' failed");
}

}  // namespace anthrofit
