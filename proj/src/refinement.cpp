#include "anthrofit/refinement.hpp"

#include "anthrofit/errors.hpp"

#include <cmath>
#include <limits>

namespace anthrofit {

void validate(const RefinementConfig& config) {
    if (config.l <= 0.0) throw InputError("clamp multiple l must be positive");
    if (config.lambda < 0.0 || config.lambda > 1.0)
        throw InputError("smoothness weight lambda must lie in [0, 1]");
    if (config.s < 1 || config.stage2_count() < 1)
        throw InputError("constraint-recomputation count s must be at least 1");
}

FrozenConstraints freeze_constraints(const TriangleMesh& mesh, const MeasurementProfile& profile,
                                     const MeasurementVector& targets, UndefinedPolicy policy) {
    if (static_cast<size_t>(targets.values.size()) != profile.specs.size())
        throw InputError("target vector has " + std::to_string(targets.values.size()) +
                         " entries but the profile has " + std::to_string(profile.specs.size()));
    MeasurementProfile bound = profile;
    bind_profile(bound, mesh);

    EdgeGraph graph;
    bool have_graph = false;
    FrozenConstraints frozen;
    for (size_t i = 0; i < profile.specs.size(); ++i) {
        const auto& spec = profile.specs[i];
        const double target = targets.values[static_cast<Eigen::Index>(i)];
        if (!(target > 0.0))
            throw InputError("measurement '" + spec.name + "': target must be positive");
        switch (spec.type) {
            case MeasurementType::euclidean:
                frozen.euclidean.push_back({spec.name, spec.a, spec.b, target});
                break;
            case MeasurementType::geodesic: {
                if (!have_graph) {
                    graph = build_edge_graph(mesh);
                    have_graph = true;
                }
                const GeodesicPath path = geodesic_path(mesh, graph, spec.a, spec.b);
                if (path.edge_lengths.empty())
                    throw InputError("measurement '" + spec.name + "': geodesic endpoints coincide");
                GeodesicTerm term;
                term.name = spec.name;
                term.target = target;
                for (size_t e = 0; e < path.edge_lengths.size(); ++e)
                    term.edges.push_back({path.vertices[e], path.vertices[e + 1],
                                          target * path.edge_lengths[e] / path.total});
                frozen.geodesics.push_back(std::move(term));
                break;
            }
            case MeasurementType::circumference: {
                CircumferencePolygon poly;
                try {
                    poly = circumference(mesh, spec);
                } catch (const MeasurementUndefined&) {
                    if (policy == UndefinedPolicy::drop) {
                        frozen.dropped.push_back(spec.name);
                        continue;
                    }
                    throw;
                }
                CircumferenceTerm term;
                term.name = spec.name;
                term.target = target;
                const size_t n = poly.points.size();
                for (size_t e = 0; e < poly.edge_lengths.size(); ++e) {
                    const auto& pi = poly.points[e];
                    const auto& pj = poly.points[(e + 1) % n];
                    term.edges.push_back({{pi.a, pi.b, pi.alpha},
                                          {pj.a, pj.b, pj.alpha},
                                          target * poly.edge_lengths[e] / poly.perimeter});
                }
                frozen.circumferences.push_back(std::move(term));
                break;
            }
        }
    }
    return frozen;
}

EnergyResult energy_euclidean(const TriangleMesh& mesh, const FrozenConstraints& frozen) {
    EnergyResult out;
    out.gradient = Eigen::VectorXd::Zero(3 * mesh.vertex_count());
    for (const auto& term : frozen.euclidean) {
        const Vec3 diff = mesh.vertices[term.a] - mesh.vertices[term.b];
        const double r = diff.squaredNorm() - term.target * term.target;
        out.energy += r * r;
        const Vec3 g = 4.0 * r * diff;
        out.gradient.segment<3>(3 * term.a) += g;
        out.gradient.segment<3>(3 * term.b) -= g;
    }
    return out;
}

EnergyResult energy_geodesic(const TriangleMesh& mesh, const FrozenConstraints& frozen) {
    EnergyResult out;
    out.gradient = Eigen::VectorXd::Zero(3 * mesh.vertex_count());
    for (const auto& term : frozen.geodesics)
        for (const auto& edge : term.edges) {
            const Vec3 diff = mesh.vertices[edge.k] - mesh.vertices[edge.l];
            const double r = diff.squaredNorm() - edge.target * edge.target;
            out.energy += r * r;
            const Vec3 g = 4.0 * r * diff;
            out.gradient.segment<3>(3 * edge.k) += g;
            out.gradient.segment<3>(3 * edge.l) -= g;
        }
    return out;
}

EnergyResult energy_circumference(const TriangleMesh& mesh, const FrozenConstraints& frozen) {
    EnergyResult out;
    out.gradient = Eigen::VectorXd::Zero(3 * mesh.vertex_count());
    for (const auto& term : frozen.circumferences)
        for (const auto& edge : term.edges) {
            const Vec3 qi = edge.i.alpha * mesh.vertices[edge.i.a] +
                            (1.0 - edge.i.alpha) * mesh.vertices[edge.i.b];
            const Vec3 qj = edge.j.alpha * mesh.vertices[edge.j.a] +
                            (1.0 - edge.j.alpha) * mesh.vertices[edge.j.b];
            const Vec3 diff = qi - qj;
            const double r = diff.squaredNorm() - edge.target * edge.target;
            out.energy += r * r;
            const Vec3 g = 4.0 * r * diff;
            out.gradient.segment<3>(3 * edge.i.a) += edge.i.alpha * g;
            out.gradient.segment<3>(3 * edge.i.b) += (1.0 - edge.i.alpha) * g;
            out.gradient.segment<3>(3 * edge.j.a) -= edge.j.alpha * g;
            out.gradient.segment<3>(3 * edge.j.b) -= (1.0 - edge.j.alpha) * g;
        }
    return out;
}

EnergyResult measurement_energy(const TriangleMesh& mesh, const FrozenConstraints& frozen) {
    const EnergyResult e = energy_euclidean(mesh, frozen);
    const EnergyResult g = energy_geodesic(mesh, frozen);
    const EnergyResult c = energy_circumference(mesh, frozen);
    EnergyResult out;
    out.energy = e.energy + g.energy + c.energy;
    out.gradient = e.gradient + g.gradient;
    out.gradient += c.gradient;
    return out;
}

EnergyResult energy_smoothness(const TriangleMesh& mesh, const TriangleMesh& reference,
                               const EdgeGraph& graph) {
    if (mesh.vertex_count() != reference.vertex_count() ||
        static_cast<size_t>(mesh.vertex_count()) != graph.adjacency.size())
        throw InputError("smoothness reference does not match the mesh");
    EnergyResult out;
    out.gradient = Eigen::VectorXd::Zero(3 * mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Vec3 di = mesh.vertices[i] - reference.vertices[i];
        for (const auto& [j, len] : graph.adjacency[i]) {
            const Vec3 diff = di - (mesh.vertices[j] - reference.vertices[j]);
            out.energy += diff.squaredNorm();
            out.gradient.segment<3>(3 * i) += 2.0 * diff;
            out.gradient.segment<3>(3 * j) -= 2.0 * diff;
        }
    }
    return out;
}

EnergyResult energy_smoothness(const TriangleMesh& mesh, const TriangleMesh& reference) {
    if (!same_topology(mesh, reference)) throw InputError("smoothness reference topology mismatch");
    return energy_smoothness(mesh, reference, build_edge_graph(reference));
}

namespace {

// Each solve runs on the energy divided by its starting value, so the
// solver's stopping tests see the same landscape regardless of measurement
// units or how small the residuals already are.
double solve_scale(double f0) {
    return std::isfinite(f0) && f0 > 0.0 ? f0 : 1.0;
}

}  // namespace

ShapeWeights optimize_weights(const PcaModel& model, const MeasurementProfile& profile,
                              const MeasurementVector& targets, const ShapeWeights& w0,
                              const RefinementConfig& config, StageReport* report) {
    validate(config);
    if (w0.size() != model.rank())
        throw InputError("initial weights have length " + std::to_string(w0.size()) +
                         " but the model has " + std::to_string(model.rank()) + " components");
    ShapeWeights w = w0;
    for (int outer = 0; outer < config.s; ++outer) {
        const TriangleMesh frozen_on = synthesize(model, w);
        const FrozenConstraints frozen = freeze_constraints(frozen_on, profile, targets, config.undefined);
        auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            const EnergyResult em = measurement_energy(synthesize(model, x), frozen);
            grad = model.basis.transpose() * em.gradient;
            return em.energy;
        };
        Eigen::VectorXd probe;
        const double scale = solve_scale(objective(w, probe));
        auto scaled = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            const double f = objective(x, grad);
            grad /= scale;
            return f / scale;
        };
        const SolveReport solved = minimize(scaled, w, config.solver);
        if (!solved.ok) throw NumericalError("weight optimization produced a non-finite energy");
        w = clamp_weights(model, solved.x, config.l);
        if (report) {
            SolveRecord record;
            record.energy_start = solved.energy_trace.front() * scale;
            record.energy_end = solved.energy * scale;
            record.energy_after_clamp = measurement_energy(synthesize(model, w), frozen).energy;
            record.iterations = solved.iterations;
            record.reason = solved.reason;
            record.dropped = frozen.dropped;
            report->solves.push_back(std::move(record));
        }
    }
    return w;
}

TriangleMesh optimize_vertices(const TriangleMesh& x_pca, const MeasurementProfile& profile,
                               const MeasurementVector& targets, const RefinementConfig& config,
                               StageReport* report) {
    validate(config);
    const EdgeGraph graph = build_edge_graph(x_pca);
    const double lambda = config.lambda;
    TriangleMesh mesh = x_pca;
    for (int outer = 0; outer < config.stage2_count(); ++outer) {
        const FrozenConstraints frozen = freeze_constraints(mesh, profile, targets, config.undefined);
        auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            const TriangleMesh candidate = unflatten(x, mesh.triangles);
            const EnergyResult em = measurement_energy(candidate, frozen);
            const EnergyResult es = energy_smoothness(candidate, x_pca, graph);
            grad = (1.0 - lambda) * em.gradient + lambda * es.gradient;
            return (1.0 - lambda) * em.energy + lambda * es.energy;
        };
        Eigen::VectorXd start = flatten(mesh);
        Eigen::VectorXd probe;
        const double scale = solve_scale(objective(start, probe));
        auto scaled = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            const double f = objective(x, grad);
            grad /= scale;
            return f / scale;
        };
        const SolveReport solved = minimize(scaled, start, config.solver);
        if (!solved.ok) throw NumericalError("vertex optimization produced a non-finite energy");
        mesh = unflatten(solved.x, mesh.triangles);
        if (report) {
            SolveRecord record;
            record.energy_start = solved.energy_trace.front() * scale;
            record.energy_end = solved.energy * scale;
            record.energy_after_clamp = solved.energy * scale;
            record.iterations = solved.iterations;
            record.reason = solved.reason;
            record.dropped = frozen.dropped;
            report->solves.push_back(std::move(record));
        }
    }
    return mesh;
}

MeasurementVector measure_all_lenient(const TriangleMesh& mesh, const MeasurementProfile& profile,
                                      std::vector<std::string>* undefined) {
    MeasurementProfile bound = profile;
    bind_profile(bound, mesh);
    EdgeGraph graph;
    bool have_graph = false;
    MeasurementVector out;
    out.values.resize(static_cast<Eigen::Index>(profile.specs.size()));
    for (size_t i = 0; i < profile.specs.size(); ++i) {
        const auto& spec = profile.specs[i];
        out.names.push_back(spec.name);
        if (spec.type == MeasurementType::geodesic && !have_graph) {
            graph = build_edge_graph(mesh);
            have_graph = true;
        }
        try {
            out.values[static_cast<Eigen::Index>(i)] = evaluate(mesh, graph, spec);
        } catch (const MeasurementUndefined&) {
            out.values[static_cast<Eigen::Index>(i)] = std::numeric_limits<double>::quiet_NaN();
            if (undefined) undefined->push_back(spec.name);
        }
    }
    return out;
}

TriangleMesh predict_shape(const PcaModel& model, const FeatureMap& featmap,
                           const MeasurementProfile& profile, const MeasurementVector& targets,
                           const RefinementConfig& config, PredictReport* report) {
    validate(config);
    const ShapeWeights w_fa = predict_weights(featmap, model, targets.values);
    const ShapeWeights w_init = clamp_weights(model, w_fa, config.l);

    StageReport stage1;
    const ShapeWeights w_pca =
        optimize_weights(model, profile, targets, w_init, config, report ? &stage1 : nullptr);
    const TriangleMesh x_pca = synthesize(model, w_pca);

    StageReport stage2;
    const TriangleMesh x_new =
        optimize_vertices(x_pca, profile, targets, config, report ? &stage2 : nullptr);

    if (report) {
        report->names.clear();
        for (const auto& spec : profile.specs) report->names.push_back(spec.name);
        report->targets = targets.values;
        report->w_init = w_init;
        report->w_stage1 = w_pca;
        report->stage1 = std::move(stage1);
        report->stage2 = std::move(stage2);
        const TriangleMesh x_init = synthesize(model, w_init);
        report->measured_init = measure_all_lenient(x_init, profile).values;
        report->measured_stage1 = measure_all_lenient(x_pca, profile).values;
        report->measured_stage2 = measure_all_lenient(x_new, profile).values;
        auto frozen_em = [&](const TriangleMesh& mesh) {
            FrozenConstraints frozen =
                freeze_constraints(mesh, profile, targets, UndefinedPolicy::drop);
            return measurement_energy(mesh, frozen).energy;
        };
        report->em_init = frozen_em(x_init);
        report->em_stage1 = frozen_em(x_pca);
        report->em_stage2 = frozen_em(x_new);
    }
    return x_new;
}

namespace {

nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::ordered_json array = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v[i]);
    return array;
}

nlohmann::ordered_json stage_to_json(const StageReport& stage) {
    nlohmann::ordered_json solves = nlohmann::ordered_json::array();
    for (const auto& record : stage.solves) {
        nlohmann::ordered_json item;
        item["energy_start"] = record.energy_start;
        item["energy_end"] = record.energy_end;
        item["energy_after_clamp"] = record.energy_after_clamp;
        item["iterations"] = record.iterations;
        item["reason"] = to_string(record.reason);
        item["dropped"] = record.dropped;
        solves.push_back(std::move(item));
    }
    return solves;
}

}  // namespace

nlohmann::ordered_json predict_report_to_json(const PredictReport& report) {
    nlohmann::ordered_json doc;
    doc["measurements"] = report.names;
    doc["targets"] = vector_to_json(report.targets);
    doc["init"] = {{"em_frozen", report.em_init},
                   {"measured", vector_to_json(report.measured_init)},
                   {"residuals", vector_to_json(report.residuals_init())}};
    nlohmann::ordered_json stage1;
    stage1["em"] = report.stage1.solves.empty() ? 0.0 : report.stage1.solves.back().energy_after_clamp;
    stage1["em_frozen"] = report.em_stage1;
    stage1["solves"] = stage_to_json(report.stage1);
    stage1["measured"] = vector_to_json(report.measured_stage1);
    stage1["residuals"] = vector_to_json(report.residuals_stage1());
    doc["stage1"] = std::move(stage1);
    nlohmann::ordered_json stage2;
    stage2["energy"] = report.stage2.solves.empty() ? 0.0 : report.stage2.solves.back().energy_end;
    stage2["em_frozen"] = report.em_stage2;
    stage2["solves"] = stage_to_json(report.stage2);
    stage2["measured"] = vector_to_json(report.measured_stage2);
    stage2["residuals"] = vector_to_json(report.residuals_stage2());
    doc["stage2"] = std::move(stage2);
    return doc;
}

}  // namespace anthrofit
