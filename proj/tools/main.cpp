#include "anthrofit/csv.hpp"
#include "anthrofit/errors.hpp"
#include "anthrofit/experiment.hpp"
#include "anthrofit/num_format.hpp"
#include "anthrofit/obj_io.hpp"
#include "anthrofit/profile_io.hpp"
#include "anthrofit/refinement.hpp"
#include "anthrofit/report.hpp"
#include "anthrofit/shape_model.hpp"
#include "anthrofit/synth.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

using namespace anthrofit;

namespace {

struct GlobalArgs {
    std::uint64_t seed = 1;
    int threads = 1;
    bool quiet = false;
};

std::vector<std::filesystem::path> obj_files_in(const std::string& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".obj")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

// Maps profile dimension names onto CSV columns; the sets must match exactly.
std::vector<int> column_map(const std::vector<std::string>& want,
                            const std::vector<std::string>& have, const std::string& origin) {
    if (want.size() != have.size())
        throw InputError(origin + ": expected " + std::to_string(want.size()) +
                         " columns, got " + std::to_string(have.size()));
    std::vector<int> map(want.size(), -1);
    for (size_t i = 0; i < want.size(); ++i) {
        auto it = std::find(have.begin(), have.end(), want[i]);
        if (it == have.end())
            throw InputError(origin + ": missing column '" + want[i] + "'");
        map[i] = static_cast<int>(it - have.begin());
    }
    return map;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw InputError("write failed: " + path);
}

struct TrainArgs {
    std::string mesh_dir;
    std::string profile_path;
    std::string output;
    int rank = -1;
};

int cmd_train(const TrainArgs& args, const GlobalArgs& global) {
    std::vector<std::filesystem::path> files = obj_files_in(args.mesh_dir);
    if (files.size() < 2)
        throw InputError("need >= 2 training meshes, found " + std::to_string(files.size()) +
                         " in " + args.mesh_dir);
    std::vector<TriangleMesh> meshes;
    meshes.reserve(files.size());
    for (const auto& file : files) meshes.push_back(read_obj(file));

    std::string offenders;
    for (size_t i = 1; i < meshes.size(); ++i)
        if (!same_topology(meshes[0], meshes[i]))
            offenders += (offenders.empty() ? "" : ", ") + files[i].filename().string();
    if (!offenders.empty())
        throw InputError("topology mismatch against " + files[0].filename().string() + ": " +
                         offenders);

    MeasurementProfile profile = read_profile(args.profile_path);
    bind_profile(profile, meshes[0]);

    std::vector<Eigen::VectorXd> measurements;
    measurements.reserve(meshes.size());
    for (const auto& mesh : meshes) measurements.push_back(measure_all(mesh, profile).values);

    PcaModel pca = train_pca(meshes, args.rank);
    std::vector<ShapeWeights> weights;
    weights.reserve(meshes.size());
    for (const auto& mesh : meshes) weights.push_back(project(pca, mesh));
    FeatureMap featmap = train_feature_map(pca, measurements, weights);

    TrainedModel model{std::move(pca), std::move(featmap), std::move(profile)};
    write_model(args.output, model);
    if (!global.quiet)
        std::cout << "trained on " << meshes.size() << " meshes, rank " << model.pca.rank()
                  << ", wrote " << args.output << "\n";
    return 0;
}

struct PredictArgs {
    std::string model_path;
    std::string targets_path;
    std::string output;
    std::string report_path;
    double l = 3.0;
    double lambda = 0.1;
    int s = 3;
    int s_vertex = -1;
};

int cmd_predict(const PredictArgs& args, const GlobalArgs& global) {
    TrainedModel model = read_model(args.model_path);
    MeasurementTable table = read_measurement_csv(args.targets_path);
    if (table.subject_count() != 1)
        throw InputError("targets CSV must contain exactly one row, got " +
                         std::to_string(table.subject_count()));

    std::vector<std::string> names;
    for (const auto& spec : model.profile.specs) names.push_back(spec.name);
    std::vector<int> map = column_map(names, table.names, args.targets_path);
    Eigen::VectorXd values(static_cast<Eigen::Index>(names.size()));
    for (size_t i = 0; i < names.size(); ++i) values[static_cast<Eigen::Index>(i)] =
        table.values(0, map[i]);

    RefinementConfig config;
    config.l = args.l;
    config.lambda = args.lambda;
    config.s = args.s;
    config.s_vertex = args.s_vertex;

    MeasurementVector targets{names, values};
    PredictReport report;
    TriangleMesh predicted =
        predict_shape(model.pca, model.feature_map, model.profile, targets, config,
                      args.report_path.empty() ? nullptr : &report);
    write_obj(args.output, predicted);
    if (!args.report_path.empty()) write_json_file(args.report_path, predict_report_to_json(report));
    if (!global.quiet) std::cout << "wrote " << args.output << "\n";
    return 0;
}

struct MeasureArgs {
    std::string mesh_path;
    std::string profile_path;
    std::string output;
};

int cmd_measure(const MeasureArgs& args) {
    TriangleMesh mesh = read_obj(args.mesh_path);
    MeasurementProfile profile = read_profile(args.profile_path);
    bind_profile(profile, mesh);
    MeasurementVector mv = measure_all(mesh, profile);
    Eigen::MatrixXd row(mv.names.empty() ? 0 : 1, mv.values.size());
    if (row.rows() == 1) row.row(0) = mv.values.transpose();
    if (args.output.empty()) {
        write_measurement_csv(std::cout, mv.names, row);
    } else {
        write_measurement_csv(args.output, mv.names, row);
    }
    return 0;
}

struct EvaluateArgs {
    std::vector<std::string> mesh_paths;
    std::string targets_path;
    std::string profile_path;
    std::string json_path;
};

int cmd_evaluate(const EvaluateArgs& args) {
    MeasurementProfile profile = read_profile(args.profile_path);
    MeasurementTable table = read_measurement_csv(args.targets_path);
    if (static_cast<size_t>(table.subject_count()) != args.mesh_paths.size())
        throw InputError("mesh count " + std::to_string(args.mesh_paths.size()) +
                         " does not match target rows " + std::to_string(table.subject_count()));

    std::vector<std::string> names;
    std::vector<std::string> groups;
    for (const auto& spec : profile.specs) {
        names.push_back(spec.name);
        groups.push_back(spec.group);
    }
    std::vector<int> map = column_map(names, table.names, args.targets_path);
    Eigen::MatrixXd targets(table.subject_count(), static_cast<Eigen::Index>(names.size()));
    for (int i = 0; i < table.subject_count(); ++i)
        for (size_t j = 0; j < names.size(); ++j)
            targets(i, static_cast<Eigen::Index>(j)) = table.values(i, map[j]);

    Eigen::MatrixXd measured(table.subject_count(), static_cast<Eigen::Index>(names.size()));
    for (size_t i = 0; i < args.mesh_paths.size(); ++i) {
        TriangleMesh mesh = read_obj(args.mesh_paths[i]);
        bind_profile(profile, mesh);
        measured.row(static_cast<Eigen::Index>(i)) = measure_all(mesh, profile).values.transpose();
    }

    EvaluationReport report = evaluate_errors(names, groups, measured, targets);
    std::cout << report_table(report, "predicted");
    if (!args.json_path.empty()) write_json_file(args.json_path, report_to_json(report));
    return 0;
}

struct SampleArgs {
    std::string kind = "mannequin";
    int resolution = 32;
    int count = 10;
    int modes = 8;
    std::string output;
};

int cmd_sample(const SampleArgs& args, const GlobalArgs& global) {
    std::filesystem::path dir(args.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create directory " + args.output + ": " + ec.message());

    ShapeFamily family = make_family(args.kind, args.resolution, args.modes, global.seed);
    std::vector<TriangleMesh> meshes = sample_family(family, args.count, global.seed + 1);
    write_obj(dir / "template.obj", family.template_mesh);
    for (size_t i = 0; i < meshes.size(); ++i) {
        std::string stem = std::to_string(i);
        if (stem.size() < 2) stem.insert(stem.begin(), '0');
        write_obj(dir / ("sample_" + stem + ".obj"), meshes[i]);
    }
    MeasurementProfile profile =
        args.kind == "mannequin" ? body_profile(args.resolution) : face_profile(args.resolution);
    write_profile((dir / "profile.json").string(), profile);
    if (!global.quiet)
        std::cout << "wrote " << meshes.size() << " samples and profile to " << args.output
                  << "\n";
    return 0;
}

struct ExperimentArgs {
    std::string protocol;
    double k = 3.0;
    std::string output;
    int train = -1;
    int test = -1;
    int resolution = -1;
    int modes = -1;
    double l = 3.0;
    double lambda = 0.1;
    int s = -1;
    int s_vertex = -1;
    double bump_radius = 70.0;
    double bump_amplitude = 25.0;
    bool no_clamp = false;
};

int cmd_experiment(const ExperimentArgs& args, const GlobalArgs& global) {
    const bool small = args.protocol == "small-training";
    ExperimentConfig config;
    config.protocol = args.protocol;
    config.ellipsoid_k = args.k;
    config.seed = global.seed;
    config.threads = global.threads;
    config.clamp_baseline = !args.no_clamp;
    if (args.resolution > 0) config.resolution = args.resolution;
    config.train_count = args.train > 0 ? args.train : (small ? 35 : 40);
    config.test_count = args.test > 0 ? args.test : (small ? 5 : 10);
    if (args.modes > 0) config.mode_count = args.modes;
    config.bump_radius = args.bump_radius;
    config.bump_amplitude = args.bump_amplitude;
    config.refinement.l = args.l;
    config.refinement.lambda = args.lambda;
    config.refinement.s = args.s > 0 ? args.s : (small ? 10 : 3);
    config.refinement.s_vertex = args.s_vertex;

    ExperimentResult result = run_experiment(config);
    write_experiment_bundle(result, args.output);
    if (!global.quiet) std::cout << experiment_table(result);
    return 0;
}

struct GradcheckArgs {
    int cases = 20;
};

int cmd_gradcheck(const GradcheckArgs& args, const GlobalArgs& global) {
    std::vector<GradientCheck> rows = check_gradients(global.seed, args.cases);
    bool all_pass = true;
    for (const auto& row : rows) {
        std::string term = row.term;
        if (term.size() < 14) term.append(14 - term.size(), ' ');
        std::cout << term << "  " << format_double(row.max_relative_error, 3) << "  "
                  << (row.pass() ? "ok" : "FAIL") << "\n";
        all_pass = all_pass && row.pass();
    }
    std::cout << "gradcheck: " << (all_pass ? "pass" : "fail") << "\n";
    return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shape estimation from anthropometric measurements"};
    app.require_subcommand(1);

    GlobalArgs global;
    app.add_option("--seed", global.seed, "rng seed")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads")->capture_default_str();
    app.add_flag("--quiet", global.quiet, "suppress progress output");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a shape model from corresponded meshes");
    train->add_option("--meshes", train_args.mesh_dir, "directory of OBJ meshes")->required();
    train->add_option("--profile", train_args.profile_path, "measurement profile JSON")->required();
    train->add_option("--output", train_args.output, "output model JSON")->required();
    train->add_option("-r,--rank", train_args.rank, "PCA components to keep, -1 = all")
        ->capture_default_str();

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "estimate a shape from target measurements");
    predict->add_option("--model", predict_args.model_path, "trained model JSON")->required();
    predict->add_option("--targets", predict_args.targets_path, "one-row measurement CSV")
        ->required();
    predict->add_option("--output", predict_args.output, "output OBJ")->required();
    predict->add_option("--report", predict_args.report_path, "optional stage report JSON");
    predict->add_option("--l", predict_args.l, "clamp multiplier")->capture_default_str();
    predict->add_option("--lambda", predict_args.lambda, "stage-2 smoothness weight")
        ->capture_default_str();
    predict->add_option("--s", predict_args.s, "constraint recomputations")->capture_default_str();
    predict->add_option("--s-vertex", predict_args.s_vertex,
                        "stage-2 recomputations, -1 = same as --s")
        ->capture_default_str();

    MeasureArgs measure_args;
    auto* measure = app.add_subcommand("measure", "measure a mesh against a profile");
    measure->add_option("--mesh", measure_args.mesh_path, "OBJ mesh")->required();
    measure->add_option("--profile", measure_args.profile_path, "measurement profile JSON")
        ->required();
    measure->add_option("--output", measure_args.output, "output CSV, default stdout");

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "error report for predicted meshes");
    evaluate->add_option("--meshes", evaluate_args.mesh_paths, "predicted OBJ meshes, in row order")
        ->required()
        ->expected(-1);
    evaluate->add_option("--targets", evaluate_args.targets_path, "target measurement CSV")
        ->required();
    evaluate->add_option("--profile", evaluate_args.profile_path, "measurement profile JSON")
        ->required();
    evaluate->add_option("--json", evaluate_args.json_path, "optional report JSON path");

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "generate a synthetic mesh family");
    sample->add_option("--kind", sample_args.kind, "mannequin or blob")
        ->check(CLI::IsMember({"mannequin", "blob"}))
        ->capture_default_str();
    sample->add_option("--resolution", sample_args.resolution, "template resolution")
        ->capture_default_str();
    sample->add_option("--count", sample_args.count, "number of sampled meshes")
        ->capture_default_str();
    sample->add_option("--modes", sample_args.modes, "deformation mode count")
        ->capture_default_str();
    sample->add_option("--output", sample_args.output, "output directory")->required();

    ExperimentArgs experiment_args;
    auto* experiment = app.add_subcommand("experiment", "run a self-contained protocol");
    experiment->add_option("--protocol", experiment_args.protocol, "protocol name")
        ->check(CLI::IsMember({"close", "ellipsoid", "heldout", "small-training"}))
        ->required();
    experiment->add_option("--k", experiment_args.k, "Mahalanobis radius for ellipsoid")
        ->capture_default_str();
    experiment->add_option("--output", experiment_args.output, "bundle directory")->required();
    experiment->add_option("--train", experiment_args.train, "training mesh count");
    experiment->add_option("--test", experiment_args.test, "test subject count");
    experiment->add_option("--resolution", experiment_args.resolution, "template resolution");
    experiment->add_option("--modes", experiment_args.modes, "deformation mode count");
    experiment->add_option("--l", experiment_args.l, "clamp multiplier")->capture_default_str();
    experiment->add_option("--lambda", experiment_args.lambda, "stage-2 smoothness weight")
        ->capture_default_str();
    experiment->add_option("--s", experiment_args.s, "constraint recomputations");
    experiment->add_option("--s-vertex", experiment_args.s_vertex,
                           "stage-2 recomputations, -1 = same as --s");
    experiment->add_option("--bump-radius", experiment_args.bump_radius,
                           "small-training bump radius, mm")
        ->capture_default_str();
    experiment->add_option("--bump-amplitude", experiment_args.bump_amplitude,
                           "small-training bump height, mm")
        ->capture_default_str();
    experiment->add_flag("--no-clamp", experiment_args.no_clamp,
                         "leave the feature-analysis baseline unclamped");

    GradcheckArgs gradcheck_args;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gradcheck->add_option("--cases", gradcheck_args.cases, "configurations per term")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: input: " << e.what() << "\n";
        return 2;
    }

    try {
        if (train->parsed()) return cmd_train(train_args, global);
        if (predict->parsed()) return cmd_predict(predict_args, global);
        if (measure->parsed()) return cmd_measure(measure_args);
        if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
        if (sample->parsed()) return cmd_sample(sample_args, global);
        if (experiment->parsed()) return cmd_experiment(experiment_args, global);
        if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_args, global);
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::input
                               ? "input"
                               : e.kind() == ErrorKind::numerical ? "numerical" : "undefined";
        int code = e.kind() == ErrorKind::input ? 2 : e.kind() == ErrorKind::numerical ? 3 : 4;
        std::cerr << "error: " << kind << ": " << e.what() << "\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
