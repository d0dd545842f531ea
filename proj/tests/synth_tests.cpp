#include "anthrofit/errors.hpp"
#include "anthrofit/measurement.hpp"
#include "anthrofit/rng.hpp"
#include "anthrofit/shape_model.hpp"
#include "anthrofit/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "helpers.hpp"

using namespace anthrofit;
using namespace testutil;

namespace {

int unique_edge_count(const TriangleMesh& mesh) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : mesh.triangles)
        for (int c = 0; c < 3; ++c)
            edges.insert(std::minmax(t[c], t[(c + 1) % 3]));
    return static_cast<int>(edges.size());
}

int euler_characteristic(const TriangleMesh& mesh) {
    return mesh.vertex_count() - unique_edge_count(mesh) + mesh.triangle_count();
}

bool consistently_oriented(const TriangleMesh& mesh) {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.triangles)
        for (int c = 0; c < 3; ++c)
            if (++directed[{t[c], t[(c + 1) % 3]}] > 1) return false;
    for (const auto& [edge, count] : directed)
        if (directed.count({edge.second, edge.first}) == 0) return false;
    return true;
}

bool connected(const TriangleMesh& mesh) {
    EdgeGraph graph = build_edge_graph(mesh);
    std::vector<char> seen(graph.vertex_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& [u, len] : graph.adjacency[v]) {
            if (seen[u]) continue;
            seen[u] = 1;
            ++reached;
            stack.push_back(u);
        }
    }
    return reached == mesh.vertex_count();
}

double signed_volume(const TriangleMesh& mesh) {
    double six_v = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        six_v += a.cross(b).dot(c);
    }
    return six_v / 6.0;
}

bool bitwise_equal(const TriangleMesh& a, const TriangleMesh& b) {
    if (!same_topology(a, b)) return false;
    for (int i = 0; i < a.vertex_count(); ++i)
        if (a.vertices[i] != b.vertices[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("templates are closed connected oriented surfaces") {
    for (const auto& [kind, res] : std::vector<std::pair<std::string, int>>{
             {"mannequin", 20}, {"mannequin", 32}, {"blob", 8}}) {
        CAPTURE(kind);
        CAPTURE(res);
        TriangleMesh mesh = make_template(kind, res);
        CHECK(euler_characteristic(mesh) == 2);
        CHECK(connected(mesh));
        CHECK(consistently_oriented(mesh));
        CHECK(signed_volume(mesh) > 0.0);
        CHECK(validate(mesh).warnings.empty());
    }

    TriangleMesh m32 = make_template("mannequin", 32);
    CHECK(m32.vertex_count() > 1500);
    CHECK(m32.vertex_count() < 4000);

    CHECK(make_template("blob", 8).vertex_count() < make_template("blob", 16).vertex_count());
    CHECK(make_template("blob", 16).vertex_count() < make_template("blob", 32).vertex_count());

    CHECK(bitwise_equal(make_template("mannequin", 20), make_template("mannequin", 20)));
    CHECK_THROWS_AS(make_template("teapot"), InputError);
    CHECK_THROWS_AS(make_template("mannequin", 12), InputError);
    CHECK_THROWS_AS(make_template("blob", 4), InputError);
}

TEST_CASE("built templates expose landmarks and regions") {
    BuiltTemplate body = build_template("mannequin", 20);
    for (const char* name : {"head_top", "neck", "bottom", "waist_0", "waist_h", "chest_0",
                             "hip_0", "head_ring_0", "hand_l", "hand_r", "foot_l", "foot_r"})
        REQUIRE(body.landmarks.count(name) == 1);
    for (const auto& [name, v] : body.landmarks) {
        CAPTURE(name);
        CHECK(v >= 0);
        CHECK(v < body.mesh.vertex_count());
    }
    for (const char* name : {"torso", "head", "arm_l", "arm_r", "leg_l", "leg_r"}) {
        CAPTURE(name);
        REQUIRE(body.regions.count(name) == 1);
        CHECK(!body.regions.at(name).empty());
        for (int t : body.regions.at(name)) {
            CHECK(t >= 0);
            CHECK(t < body.mesh.triangle_count());
        }
    }

    BuiltTemplate blob = build_template("blob", 8);
    CHECK(blob.regions.at("all").size() == static_cast<size_t>(blob.mesh.triangle_count()));
}

TEST_CASE("bundled profiles measure their templates") {
    MeasurementProfile body = body_profile(20);
    CHECK(body.specs.size() == 26);
    TriangleMesh mannequin = make_template("mannequin", 20);
    MeasurementVector mv = measure_all(mannequin, body);
    CHECK(mv.values.allFinite());
    CHECK((mv.values.array() > 0.0).all());
    for (const auto& spec : body.specs)
        if (spec.name.rfind("wrist_l_", 0) == 0) CHECK(spec.group == "wrist_l");

    MeasurementProfile face = face_profile(8);
    CHECK(face.specs.size() == 7);
    MeasurementVector fv = measure_all(make_template("blob", 8), face);
    CHECK((fv.values.array() > 0.0).all());
}

TEST_CASE("modes are smooth bounded displacement fields") {
    TriangleMesh blob = make_template("blob", 8);
    std::vector<Eigen::VectorXd> modes = make_modes(blob, 4, 7);
    REQUIRE(modes.size() == 4);
    double diag = bbox_diagonal(blob);
    EdgeGraph graph = build_edge_graph(blob);
    for (const auto& field : modes) {
        REQUIRE(field.size() == 3 * blob.vertex_count());
        for (int v = 0; v < blob.vertex_count(); ++v) {
            CHECK(field.segment(3 * v, 3).norm() <= 0.05 * diag + 1e-9);
            for (const auto& [u, len] : graph.adjacency[v]) {
                double jump = (field.segment(3 * v, 3) - field.segment(3 * u, 3)).norm();
                CHECK(jump <= 0.5 * len + 1e-9);
            }
        }
    }

    std::vector<Eigen::VectorXd> again = make_modes(blob, 4, 7);
    for (size_t i = 0; i < modes.size(); ++i) CHECK(modes[i] == again[i]);
    std::vector<Eigen::VectorXd> other = make_modes(blob, 4, 8);
    CHECK(modes[0] != other[0]);
    CHECK_THROWS_AS(make_modes(blob, 0, 7), InputError);
}

TEST_CASE("family samples stay in the span of their modes") {
    ShapeFamily family = make_family("blob", 8, 8, 11);
    std::vector<TriangleMesh> samples = sample_family(family, 50, 12);
    REQUIRE(samples.size() == 50);
    for (const auto& s : samples) CHECK(same_topology(s, family.template_mesh));

    PcaModel model = train_pca(samples);
    CHECK(model.rank() <= 8);
    double total = model.variances.sum();
    CHECK(model.variances.head(std::min(8, model.rank())).sum() >= 0.999 * total);

    std::vector<TriangleMesh> again = sample_family(family, 50, 12);
    CHECK(bitwise_equal(samples[49], again[49]));

    ShapeFamily still = family;
    still.stddevs.setZero();
    for (const auto& s : sample_family(still, 3, 13))
        CHECK(bitwise_equal(s, family.template_mesh));
}

TEST_CASE("local bumps are local") {
    BuiltTemplate body = build_template("mannequin", 20);
    const TriangleMesh& mesh = body.mesh;
    int waist = body.landmarks.at("waist_0");

    CHECK(bitwise_equal(add_local_bump(mesh, waist, 70.0, 0.0), mesh));
    CHECK_THROWS_AS(add_local_bump(mesh, -1, 70.0, 25.0), InputError);
    CHECK_THROWS_AS(add_local_bump(mesh, mesh.vertex_count(), 70.0, 25.0), InputError);
    CHECK_THROWS_AS(add_local_bump(mesh, waist, 0.0, 25.0), InputError);
    CHECK_THROWS_AS(add_local_bump(mesh, waist, 70.0, -1.0), InputError);

    TriangleMesh bumped = add_local_bump(mesh, waist, 70.0, 25.0);
    const Vec3& center = mesh.vertices[waist];
    bool moved_any = false;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        double euclid = (mesh.vertices[v] - center).norm();
        if (euclid >= 70.0) {
            CHECK(bumped.vertices[v] == mesh.vertices[v]);
        } else if (bumped.vertices[v] != mesh.vertices[v]) {
            moved_any = true;
        }
    }
    CHECK(moved_any);
    CHECK((bumped.vertices[waist] - mesh.vertices[waist]).norm() ==
          doctest::Approx(25.0).epsilon(1e-9));

    MeasurementProfile profile = body_profile(20);
    MeasurementVector before = measure_all(mesh, profile);
    MeasurementVector after = measure_all(bumped, profile);
    auto value = [&](const MeasurementVector& mv, const std::string& name) {
        for (size_t i = 0; i < mv.names.size(); ++i)
            if (mv.names[i] == name) return mv.values[static_cast<Eigen::Index>(i)];
        throw InputError("missing " + name);
    };
    CHECK(value(after, "waist_circ") > value(before, "waist_circ") + 1.0);
    CHECK(std::abs(value(after, "head_circ") - value(before, "head_circ")) < 1e-9);
}

TEST_CASE("gaussian fit matches the hand formula") {
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 2.0;
    b << 3.0, 4.0;
    MeasurementGaussian g = fit_gaussian({a, b});
    CHECK(g.mean[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.mean[1] == doctest::Approx(3.0).epsilon(1e-12));
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(g.covariance(r, c) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(((g.cholesky * g.cholesky.transpose()) - g.covariance).cwiseAbs().maxCoeff() < 1e-9);

    std::vector<Eigen::VectorXd> wide;
    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd s(5);
        for (int j = 0; j < 5; ++j) s[j] = 50.0 + rng.normal();
        wide.push_back(s);
    }
    MeasurementGaussian gw = fit_gaussian(wide);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
    for (const auto& s : wide) mean += s;
    mean /= 20.0;
    CHECK((gw.mean - mean).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(fit_gaussian({a}), InputError);
    Eigen::VectorXd short_one(1);
    short_one << 1.0;
    CHECK_THROWS_AS(fit_gaussian({a, short_one}), InputError);

    MeasurementGaussian degenerate = fit_gaussian({a, a, a});
    for (const auto& draw : sample_close(degenerate, 4, 5))
        CHECK((draw - a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("measurement sampling has the advertised geometry") {
    MeasurementGaussian g;
    g.mean = Eigen::VectorXd(2);
    g.mean << 100.0, 200.0;
    g.cholesky = Eigen::MatrixXd(2, 2);
    g.cholesky << 2.0, 0.0, 1.0, 3.0;
    g.covariance = g.cholesky * g.cholesky.transpose();

    auto mahalanobis = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd z =
            g.cholesky.triangularView<Eigen::Lower>().solve(x - g.mean);
        return z.norm();
    };

    std::vector<Eigen::VectorXd> close = sample_close(g, 10000, 31);
    double sum_sq = 0.0;
    for (const auto& x : close) {
        CHECK((x.array() > 0.0).all());
        double m = mahalanobis(x);
        sum_sq += m * m;
    }
    double mean_sq = sum_sq / 10000.0;
    CHECK(mean_sq > 2.0 * 0.95);
    CHECK(mean_sq < 2.0 * 1.05);
    std::vector<Eigen::VectorXd> close_again = sample_close(g, 3, 31);
    CHECK(close_again[2] == close[2]);

    for (double k : {2.0, 4.0}) {
        for (const auto& x : sample_ellipsoid(g, k, 20, 32))
            CHECK(mahalanobis(x) == doctest::Approx(k).epsilon(1e-9));
    }
    for (const auto& x : sample_ellipsoid(g, 0.0, 3, 33))
        CHECK((x - g.mean).cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd offset = diagonal_offset_point(g, 1.5);
    CHECK(offset[0] == doctest::Approx(100.0 + 1.5 * 4.0).epsilon(1e-12));
    CHECK(offset[1] == doctest::Approx(200.0 + 1.5 * 10.0).epsilon(1e-12));
}
