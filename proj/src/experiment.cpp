#include "anthrofit/experiment.hpp"

#include "anthrofit/csv.hpp"
#include "anthrofit/errors.hpp"
#include "anthrofit/obj_io.hpp"
#include "anthrofit/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace anthrofit {

void validate(const ExperimentConfig& config) {
    static const char* known[] = {"close", "ellipsoid", "heldout", "small-training"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* p) { return config.protocol == p; }) == std::end(known))
        throw InputError("unknown protocol: " + config.protocol);
    if (config.ellipsoid_k < 0.0) throw InputError("ellipsoid radius must be non-negative");
    if (config.threads < 1) throw InputError("thread count must be positive");
    if (config.train_count < 2) throw InputError("training count must be at least 2");
    if (config.test_count < 1) throw InputError("test count must be positive");
    if (config.mode_count < 1) throw InputError("mode count must be positive");
    if (config.bump_radius <= 0.0) throw InputError("bump radius must be positive");
    if (config.bump_amplitude < 0.0) throw InputError("bump amplitude must be non-negative");
    validate(config.refinement);
}

namespace {

// Runs job(0..count-1) on up to `threads` workers; the first exception wins.
void parallel_for(int count, int threads, const std::function<void(int)>& job) {
    int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate(config);

    ExperimentResult result;
    result.config = config;

    MeasurementProfile profile = body_profile(config.resolution);
    for (const auto& spec : profile.specs) {
        result.names.push_back(spec.name);
        result.groups.push_back(spec.group);
    }
    const Eigen::Index q = static_cast<Eigen::Index>(profile.size());

    ShapeFamily family =
        make_family("mannequin", config.resolution, config.mode_count, config.seed);
    std::vector<TriangleMesh> train = sample_family(family, config.train_count, config.seed + 1);

    std::vector<Eigen::VectorXd> train_rows(train.size());
    for (size_t i = 0; i < train.size(); ++i) train_rows[i] = measure_all(train[i], profile).values;

    PcaModel pca = train_pca(train);
    std::vector<ShapeWeights> weights(train.size());
    for (size_t i = 0; i < train.size(); ++i) weights[i] = project(pca, train[i]);
    FeatureMap featmap = train_feature_map(pca, train_rows, weights);

    result.targets.resize(config.test_count, q);
    if (config.protocol == "close" || config.protocol == "ellipsoid") {
        MeasurementGaussian gaussian = fit_gaussian(train_rows);
        std::vector<Eigen::VectorXd> samples =
            config.protocol == "close"
                ? sample_close(gaussian, config.test_count, config.seed + 2)
                : sample_ellipsoid(gaussian, config.ellipsoid_k, config.test_count,
                                   config.seed + 2);
        for (int i = 0; i < config.test_count; ++i) result.targets.row(i) = samples[i].transpose();
    } else {
        std::vector<TriangleMesh> held =
            sample_family(family, config.test_count, config.seed + 2);
        if (config.protocol == "small-training") {
            int anchor = -1;
            for (const auto& spec : profile.specs)
                if (spec.name == "waist_circ") anchor = spec.anchor;
            if (anchor < 0) throw NumericalError("body profile lacks waist_circ");
            for (auto& mesh : held)
                mesh = add_local_bump(mesh, anchor, config.bump_radius, config.bump_amplitude);
        }
        for (int i = 0; i < config.test_count; ++i)
            result.targets.row(i) = measure_all(held[i], profile).values.transpose();
    }

    const int n = config.test_count;
    result.baseline_meshes.resize(n);
    result.refined_meshes.resize(n);
    Eigen::MatrixXd baseline_measured(n, q);
    Eigen::MatrixXd refined_measured(n, q);
    result.em_init.resize(n);
    result.em_stage1.resize(n);
    result.em_stage2.resize(n);

    parallel_for(n, config.threads, [&](int i) {
        MeasurementVector target{result.names, result.targets.row(i).transpose()};
        ShapeWeights w_fa = predict_weights(featmap, pca, target.values);
        ShapeWeights w_base =
            config.clamp_baseline ? clamp_weights(pca, w_fa, config.refinement.l) : w_fa;
        result.baseline_meshes[i] = synthesize(pca, w_base);
        baseline_measured.row(i) = measure_all(result.baseline_meshes[i], profile).values.transpose();

        PredictReport report;
        result.refined_meshes[i] =
            predict_shape(pca, featmap, profile, target, config.refinement, &report);
        refined_measured.row(i) = measure_all(result.refined_meshes[i], profile).values.transpose();
        result.em_init[i] = report.em_init;
        result.em_stage1[i] = report.em_stage1;
        result.em_stage2[i] = report.em_stage2;
    });

    result.baseline = evaluate_errors(result.names, result.groups, baseline_measured,
                                      result.targets);
    result.refined = evaluate_errors(result.names, result.groups, refined_measured,
                                     result.targets);
    return result;
}

namespace {

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string subject_stem(int index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 2) digits.insert(digits.begin(), '0');
    return digits;
}

}  // namespace

nlohmann::ordered_json experiment_to_json(const ExperimentResult& result) {
    const ExperimentConfig& config = result.config;
    nlohmann::ordered_json doc;
    doc["protocol"] = config.protocol;
    doc["seed"] = config.seed;
    if (config.protocol == "ellipsoid") doc["ellipsoid_k"] = config.ellipsoid_k;
    doc["resolution"] = config.resolution;
    doc["train_count"] = config.train_count;
    doc["test_count"] = config.test_count;
    doc["mode_count"] = config.mode_count;
    if (config.protocol == "small-training") {
        doc["bump_radius"] = config.bump_radius;
        doc["bump_amplitude"] = config.bump_amplitude;
    }
    doc["clamped_baseline"] = config.clamp_baseline;
    doc["refinement"] = {{"l", config.refinement.l},
                         {"lambda", config.refinement.lambda},
                         {"s", config.refinement.s},
                         {"s_vertex", config.refinement.stage2_count()}};
    doc["dimensions"] = result.names;
    doc["targets"] = matrix_to_json(result.targets);
    doc["baseline"] = report_to_json(result.baseline);
    doc["refined"] = report_to_json(result.refined);
    nlohmann::ordered_json subjects = nlohmann::ordered_json::array();
    for (int i = 0; i < result.em_init.size(); ++i)
        subjects.push_back({{"em_init", result.em_init[i]},
                            {"em_stage1", result.em_stage1[i]},
                            {"em_stage2", result.em_stage2[i]}});
    doc["subjects"] = std::move(subjects);
    doc["summary"] = {{"baseline_overall", result.baseline.overall_average},
                      {"refined_overall", result.refined.overall_average}};
    return doc;
}

std::string experiment_table(const ExperimentResult& result) {
    std::string head = "protocol: " + result.config.protocol + "\n" +
                       "seed: " + std::to_string(result.config.seed) + "\n" +
                       "subjects: " + std::to_string(result.config.test_count) + "\n\n";
    return head + comparison_table(result.baseline, result.refined, "feature analysis", "refined");
}

std::vector<GradientCheck> check_gradients(std::uint64_t seed, int cases) {
    if (cases < 1) throw InputError("case count must be positive");
    BuiltTemplate blob = build_template("blob", 8);
    const TriangleMesh& base = blob.mesh;

    MeasurementProfile profile;
    MeasurementSpec length;
    length.name = "length";
    length.type = MeasurementType::euclidean;
    length.a = blob.landmarks.at("top");
    length.b = blob.landmarks.at("bottom");
    profile.specs.push_back(length);
    MeasurementSpec arc;
    arc.name = "arc";
    arc.type = MeasurementType::geodesic;
    arc.a = blob.landmarks.at("high_0");
    arc.b = blob.landmarks.at("low_h");
    profile.specs.push_back(arc);
    MeasurementSpec girth;
    girth.name = "girth";
    girth.type = MeasurementType::circumference;
    girth.anchor = blob.landmarks.at("mid_0");
    girth.normal = Vec3::UnitZ();
    girth.region = blob.regions.at("all");
    profile.specs.push_back(girth);
    bind_profile(profile, base);

    const double lambda = 0.1;
    std::vector<GradientCheck> rows = {
        {"euclidean", 0.0}, {"geodesic", 0.0}, {"circumference", 0.0},
        {"smoothness", 0.0}, {"combined", 0.0}};

    Rng rng(seed);
    for (int c = 0; c < cases; ++c) {
        TriangleMesh mesh = base;
        for (auto& p : mesh.vertices)
            p += 3.0 * Vec3(rng.normal(), rng.normal(), rng.normal());

        MeasurementVector targets = measure_all(mesh, profile);
        for (Eigen::Index i = 0; i < targets.values.size(); ++i)
            targets.values[i] *= rng.uniform(0.8, 1.25);
        FrozenConstraints frozen = freeze_constraints(mesh, profile, targets);

        const double h = 1e-5 * bbox_diagonal(mesh);
        Eigen::VectorXd x0 = flatten(mesh);
        auto compare = [&](GradientCheck& row,
                           const std::function<EnergyResult(const TriangleMesh&)>& term) {
            EnergyResult analytic = term(mesh);
            auto value = [&](const Eigen::VectorXd& x) {
                return term(unflatten(x, base.triangles)).energy;
            };
            Eigen::VectorXd fd = finite_difference_gradient(value, x0, h);
            double scale = std::max(analytic.gradient.cwiseAbs().maxCoeff(), 1e-12);
            double rel = (analytic.gradient - fd).cwiseAbs().maxCoeff() / scale;
            row.max_relative_error = std::max(row.max_relative_error, rel);
        };
        compare(rows[0], [&](const TriangleMesh& p) { return energy_euclidean(p, frozen); });
        compare(rows[1], [&](const TriangleMesh& p) { return energy_geodesic(p, frozen); });
        compare(rows[2], [&](const TriangleMesh& p) { return energy_circumference(p, frozen); });
        compare(rows[3], [&](const TriangleMesh& p) { return energy_smoothness(p, base); });
        compare(rows[4], [&](const TriangleMesh& p) {
            EnergyResult em = measurement_energy(p, frozen);
            EnergyResult es = energy_smoothness(p, base);
            EnergyResult combined;
            combined.energy = (1.0 - lambda) * em.energy + lambda * es.energy;
            combined.gradient = (1.0 - lambda) * em.gradient + lambda * es.gradient;
            return combined;
        });
    }
    return rows;
}

void write_experiment_bundle(const ExperimentResult& result, const std::string& directory) {
    std::filesystem::path dir(directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create directory " + directory + ": " + ec.message());

    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        if (!out) throw InputError("cannot write report.json");
        out << experiment_to_json(result).dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "report.txt", std::ios::binary);
        if (!out) throw InputError("cannot write report.txt");
        out << experiment_table(result);
    }
    write_measurement_csv((dir / "targets.csv").string(), result.names, result.targets);
    for (size_t i = 0; i < result.baseline_meshes.size(); ++i) {
        std::string stem = subject_stem(static_cast<int>(i));
        write_obj((dir / ("baseline_" + stem + ".obj")).string(), result.baseline_meshes[i]);
        write_obj((dir / ("refined_" + stem + ".obj")).string(), result.refined_meshes[i]);
    }
}

}  // namespace anthrofit
