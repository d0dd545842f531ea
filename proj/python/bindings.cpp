#include "anthrofit/errors.hpp"
#include "anthrofit/experiment.hpp"
#include "anthrofit/measurement.hpp"
#include "anthrofit/mesh.hpp"
#include "anthrofit/obj_io.hpp"
#include "anthrofit/profile_io.hpp"
#include "anthrofit/refinement.hpp"
#include "anthrofit/shape_model.hpp"
#include "anthrofit/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace anthrofit;
using namespace pybind11::literals;

namespace {

Eigen::MatrixXd vertices_matrix(const TriangleMesh& mesh) {
    Eigen::MatrixXd out(mesh.vertex_count(), 3);
    for (int i = 0; i < mesh.vertex_count(); ++i) out.row(i) = mesh.vertices[i].transpose();
    return out;
}

void set_vertices(TriangleMesh& mesh, const Eigen::MatrixXd& values) {
    if (values.cols() != 3) throw InputError("vertices must be an m x 3 array");
    mesh.vertices.resize(values.rows());
    for (Eigen::Index i = 0; i < values.rows(); ++i) mesh.vertices[i] = values.row(i).transpose();
}

MeasurementVector targets_from_dict(const MeasurementProfile& profile, const py::dict& targets) {
    std::vector<std::string> names;
    Eigen::VectorXd values(static_cast<Eigen::Index>(profile.specs.size()));
    Eigen::Index i = 0;
    for (const auto& spec : profile.specs) {
        if (!targets.contains(spec.name))
            throw InputError("targets missing dimension '" + spec.name + "'");
        names.push_back(spec.name);
        values[i++] = targets[py::str(spec.name)].cast<double>();
    }
    if (targets.size() != profile.specs.size())
        throw InputError("targets contain dimensions outside the profile");
    return MeasurementVector{std::move(names), std::move(values)};
}

TrainedModel train_from_meshes(const std::vector<TriangleMesh>& meshes,
                               MeasurementProfile profile, int rank) {
    if (meshes.size() < 2)
        throw InputError("need >= 2 training meshes, got " + std::to_string(meshes.size()));
    bind_profile(profile, meshes[0]);
    std::vector<Eigen::VectorXd> measurements;
    measurements.reserve(meshes.size());
    for (const auto& mesh : meshes) measurements.push_back(measure_all(mesh, profile).values);
    PcaModel pca = train_pca(meshes, rank);
    std::vector<ShapeWeights> weights;
    weights.reserve(meshes.size());
    for (const auto& mesh : meshes) weights.push_back(project(pca, mesh));
    FeatureMap featmap = train_feature_map(pca, measurements, weights);
    return TrainedModel{std::move(pca), std::move(featmap), std::move(profile)};
}

py::object json_to_py(const nlohmann::ordered_json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "shape estimation from anthropometric measurements";

    static py::exception<Error> base_exc(m, "AnthrofitError");
    static py::exception<InputError> input_exc(m, "InputError", base_exc.ptr());
    static py::exception<NumericalError> numerical_exc(m, "NumericalError", base_exc.ptr());
    static py::exception<MeasurementUndefined> undefined_exc(m, "MeasurementUndefined",
                                                             base_exc.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InputError& e) {
            input_exc(e.what());
        } catch (const NumericalError& e) {
            numerical_exc(e.what());
        } catch (const MeasurementUndefined& e) {
            undefined_exc(e.what());
        } catch (const Error& e) {
            base_exc(e.what());
        }
    });

    py::class_<TriangleMesh>(m, "TriangleMesh")
        .def(py::init<>())
        .def_property("vertices", &vertices_matrix, &set_vertices)
        .def_property(
            "triangles", [](const TriangleMesh& mesh) { return mesh.triangles; },
            [](TriangleMesh& mesh, std::vector<std::array<int, 3>> triangles) {
                mesh.triangles = std::move(triangles);
            })
        .def("vertex_count", &TriangleMesh::vertex_count)
        .def("triangle_count", &TriangleMesh::triangle_count);

    py::class_<MeasurementProfile>(m, "MeasurementProfile")
        .def("__len__", &MeasurementProfile::size)
        .def("names", [](const MeasurementProfile& profile) {
            std::vector<std::string> out;
            for (const auto& spec : profile.specs) out.push_back(spec.name);
            return out;
        });

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_property_readonly("rank", [](const TrainedModel& t) { return t.pca.rank(); })
        .def_property_readonly("profile", [](const TrainedModel& t) { return t.profile; });

    m.def("read_obj", [](const std::string& path) { return read_obj(std::filesystem::path(path)); },
          "path"_a);
    m.def("write_obj",
          [](const std::string& path, const TriangleMesh& mesh) {
              write_obj(std::filesystem::path(path), mesh);
          },
          "path"_a, "mesh"_a);

    m.def("read_profile", &read_profile, "path"_a);
    m.def("write_profile", &write_profile, "path"_a, "profile"_a);
    m.def("bind_profile",
          [](MeasurementProfile& profile, const TriangleMesh& mesh) {
              bind_profile(profile, mesh);
          },
          "profile"_a, "mesh"_a);

    m.def("make_template", &make_template, "kind"_a, "resolution"_a = 32);
    m.def("body_profile", &body_profile, "resolution"_a = 32);
    m.def("face_profile", &face_profile, "resolution"_a = 32);

    m.def("sample_meshes",
          [](const std::string& kind, int resolution, int count, int modes, std::uint64_t seed) {
              ShapeFamily family = make_family(kind, resolution, modes, seed);
              return sample_family(family, count, seed + 1);
          },
          "kind"_a, "resolution"_a = 32, "count"_a = 10, "modes"_a = 8, "seed"_a = 1);

    m.def("measure_all",
          [](const TriangleMesh& mesh, const MeasurementProfile& profile) {
              MeasurementVector mv = measure_all(mesh, profile);
              py::dict out;
              for (size_t i = 0; i < mv.names.size(); ++i)
                  out[py::str(mv.names[i])] = mv.values[static_cast<Eigen::Index>(i)];
              return out;
          },
          "mesh"_a, "profile"_a);

    m.def("train_model", &train_from_meshes, "meshes"_a, "profile"_a, "rank"_a = -1);
    m.def("read_model", &read_model, "path"_a);
    m.def("write_model", &write_model, "path"_a, "model"_a);

    m.def("predict_shape",
          [](const TrainedModel& model, const py::dict& targets, double l, double lambda,
             int s, int s_vertex, bool report) {
              RefinementConfig config;
              config.l = l;
              config.lambda = lambda;
              config.s = s;
              config.s_vertex = s_vertex;
              MeasurementVector mv = targets_from_dict(model.profile, targets);
              if (!report) {
                  TriangleMesh mesh = predict_shape(model.pca, model.feature_map, model.profile,
                                                    mv, config);
                  return py::object(py::cast(mesh));
              }
              PredictReport record;
              TriangleMesh mesh = predict_shape(model.pca, model.feature_map, model.profile, mv,
                                                config, &record);
              return py::object(
                  py::make_tuple(mesh, json_to_py(predict_report_to_json(record))));
          },
          "model"_a, "targets"_a, "l"_a = 3.0, "lambda"_a = 0.1, "s"_a = 3, "s_vertex"_a = -1,
          "report"_a = false);

    m.def("check_gradients",
          [](std::uint64_t seed, int cases) {
              py::list out;
              for (const auto& row : check_gradients(seed, cases))
                  out.append(py::make_tuple(row.term, row.max_relative_error, row.pass()));
              return out;
          },
          "seed"_a = 1, "cases"_a = 20);
}
