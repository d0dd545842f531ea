#include "anthrofit/measurement.hpp"

#include "anthrofit/convex_hull.hpp"
#include "anthrofit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <tuple>

namespace anthrofit {

namespace {

constexpr double kOnPlaneTol = 1e-9;

void check_vertex_index(int v, int count, const std::string& name, const char* field) {
    if (v < 0 || v >= count)
        throw InputError("measurement '" + name + "': vertex index " + std::to_string(v) + " (" + field +
                         ") out of range for " + std::to_string(count) + " vertices");
}

}  // namespace

std::string to_string(MeasurementType type) {
    switch (type) {
        case MeasurementType::euclidean: return "euclidean";
        case MeasurementType::geodesic: return "geodesic";
        case MeasurementType::circumference: return "circumference";
    }
    return "?";
}

MeasurementType measurement_type_from_string(const std::string& text) {
    if (text == "euclidean") return MeasurementType::euclidean;
    if (text == "geodesic") return MeasurementType::geodesic;
    if (text == "circumference") return MeasurementType::circumference;
    throw InputError("unknown measurement type '" + text + "'");
}

void validate(const MeasurementProfile& profile) {
    const int nv = profile.reference_vertex_count;
    const int nt = profile.reference_triangle_count;
    std::set<std::string> seen;
    for (const auto& spec : profile.specs) {
        if (spec.name.empty()) throw InputError("measurement spec with empty name");
        if (!seen.insert(spec.name).second)
            throw InputError("duplicate measurement name '" + spec.name + "'");
        if (spec.type == MeasurementType::circumference) {
            if (spec.anchor < 0)
                throw InputError("measurement '" + spec.name + "': missing anchor vertex");
            if (std::abs(spec.normal.norm() - 1.0) > 1e-12)
                throw InputError("measurement '" + spec.name + "': normal is not unit length");
            if (spec.region.empty())
                throw InputError("measurement '" + spec.name + "': empty region");
            if (nv >= 0) check_vertex_index(spec.anchor, nv, spec.name, "anchor");
            if (nt >= 0) {
                for (int t : spec.region)
                    if (t < 0 || t >= nt)
                        throw InputError("measurement '" + spec.name + "': region triangle " +
                                         std::to_string(t) + " out of range for " + std::to_string(nt) +
                                         " triangles");
            }
        } else {
            if (spec.a < 0 || spec.b < 0)
                throw InputError("measurement '" + spec.name + "': missing endpoint index");
            if (nv >= 0) {
                check_vertex_index(spec.a, nv, spec.name, "a");
                check_vertex_index(spec.b, nv, spec.name, "b");
            }
        }
    }
}

void bind_profile(MeasurementProfile& profile, const TriangleMesh& mesh) {
    profile.reference_vertex_count = mesh.vertex_count();
    profile.reference_triangle_count = mesh.triangle_count();
    validate(profile);
}

double euclidean_length(const TriangleMesh& mesh, const MeasurementSpec& spec) {
    check_vertex_index(spec.a, mesh.vertex_count(), spec.name, "a");
    check_vertex_index(spec.b, mesh.vertex_count(), spec.name, "b");
    return (mesh.vertices[spec.a] - mesh.vertices[spec.b]).norm();
}

GeodesicPath geodesic_path(const TriangleMesh& mesh, const EdgeGraph& graph, int a, int b) {
    const int n = static_cast<int>(graph.adjacency.size());
    if (a < 0 || a >= n || b < 0 || b >= n)
        throw InputError("geodesic endpoint out of range");
    GeodesicPath path;
    if (a == b) {
        path.vertices = {a};
        return path;
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<int> pred(n, -1);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[a] = 0.0;
    heap.push({0.0, a});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (u == b) break;
        for (const auto& [v, len] : graph.adjacency[u]) {
            if (done[v]) continue;
            const double nd = d + len;
            // ties keep the smallest predecessor index so paths are reproducible
            if (nd < dist[v] || (nd == dist[v] && u < pred[v])) {
                dist[v] = nd;
                pred[v] = u;
                heap.push({nd, v});
            }
        }
    }
    if (!done[b])
        throw InputError("geodesic endpoints " + std::to_string(a) + " and " + std::to_string(b) +
                         " are not connected");
    for (int v = b; v != -1; v = pred[v]) path.vertices.push_back(v);
    std::reverse(path.vertices.begin(), path.vertices.end());
    for (size_t i = 0; i + 1 < path.vertices.size(); ++i) {
        const double len = (mesh.vertices[path.vertices[i]] - mesh.vertices[path.vertices[i + 1]]).norm();
        path.edge_lengths.push_back(len);
        path.total += len;
    }
    return path;
}

GeodesicPath geodesic_path(const TriangleMesh& mesh, const MeasurementSpec& spec) {
    check_vertex_index(spec.a, mesh.vertex_count(), spec.name, "a");
    check_vertex_index(spec.b, mesh.vertex_count(), spec.name, "b");
    return geodesic_path(mesh, build_edge_graph(mesh), spec.a, spec.b);
}

namespace {

// Chain points are interned by what they lie on: a == b names a mesh vertex,
// a < b names a crossing of edge (a, b).
struct SectionBuilder {
    const TriangleMesh& mesh;
    const std::vector<double>& sd;
    std::map<std::pair<int, int>, int> ids;
    std::vector<SectionPoint> points;
    std::set<std::pair<int, int>> segments;
    std::vector<int> isolated;

    int vertex_point(int v) {
        auto [it, fresh] = ids.try_emplace({v, v}, static_cast<int>(points.size()));
        if (fresh) points.push_back({v, v, 1.0});
        return it->second;
    }

    int edge_point(int u, int v) {
        if (u > v) std::swap(u, v);
        auto [it, fresh] = ids.try_emplace({u, v}, static_cast<int>(points.size()));
        if (fresh) points.push_back({u, v, sd[v] / (sd[v] - sd[u])});
        return it->second;
    }

    void add_segment(int i, int j) {
        if (i != j) segments.insert(std::minmax(i, j));
    }
};

}  // namespace

std::vector<SectionChain> plane_section(const TriangleMesh& mesh, const std::vector<int>& region,
                                        const Plane& plane) {
    std::vector<int> tris(region);
    std::sort(tris.begin(), tris.end());
    tris.erase(std::unique(tris.begin(), tris.end()), tris.end());
    for (int t : tris)
        if (t < 0 || t >= mesh.triangle_count())
            throw InputError("region triangle " + std::to_string(t) + " out of range");

    std::vector<double> sd(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) sd[v] = signed_distance(plane, mesh.vertices[v]);
    auto side = [&](int v) { return std::abs(sd[v]) < kOnPlaneTol ? 0 : (sd[v] > 0.0 ? 1 : -1); };

    SectionBuilder sb{mesh, sd, {}, {}, {}, {}};
    for (int t : tris) {
        const auto& tri = mesh.triangles[t];
        const int c[3] = {side(tri[0]), side(tri[1]), side(tri[2])};
        int on = 0, pos = 0, neg = 0;
        for (int s : c) (s == 0 ? on : (s > 0 ? pos : neg))++;
        if (on == 3) {
            const int p0 = sb.vertex_point(tri[0]);
            const int p1 = sb.vertex_point(tri[1]);
            const int p2 = sb.vertex_point(tri[2]);
            sb.add_segment(p0, p1);
            sb.add_segment(p1, p2);
            sb.add_segment(p0, p2);
        } else if (on == 2) {
            int first = -1, second = -1;
            for (int k = 0; k < 3; ++k)
                if (c[k] == 0) (first < 0 ? first : second) = tri[k];
            sb.add_segment(sb.vertex_point(first), sb.vertex_point(second));
        } else if (on == 1) {
            int ov = -1, x = -1, y = -1;
            for (int k = 0; k < 3; ++k)
                if (c[k] == 0) ov = tri[k];
                else (x < 0 ? x : y) = tri[k];
            if (pos == 1 && neg == 1)
                sb.add_segment(sb.vertex_point(ov), sb.edge_point(x, y));
            else
                sb.isolated.push_back(sb.vertex_point(ov));
        } else if (pos > 0 && neg > 0) {
            int crossing[2], found = 0;
            const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
            for (const auto& pr : pairs)
                if (c[pr[0]] * c[pr[1]] < 0)
                    crossing[found++] = sb.edge_point(tri[pr[0]], tri[pr[1]]);
            sb.add_segment(crossing[0], crossing[1]);
        }
    }

    const int np = static_cast<int>(sb.points.size());
    std::vector<std::vector<int>> adj(np);
    for (const auto& [i, j] : sb.segments) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    std::set<std::pair<int, int>> used;
    auto next_free = [&](int from) {
        for (int nb : adj[from])
            if (!used.count(std::minmax(from, nb))) return nb;
        return -1;
    };
    auto free_degree = [&](int p) {
        int d = 0;
        for (int nb : adj[p])
            if (!used.count(std::minmax(p, nb))) ++d;
        return d;
    };
    auto walk = [&](int start) {
        std::vector<int> trail{start};
        for (int cur = start;;) {
            const int nxt = next_free(cur);
            if (nxt < 0) break;
            used.insert(std::minmax(cur, nxt));
            trail.push_back(nxt);
            cur = nxt;
        }
        return trail;
    };

    std::vector<SectionChain> chains;
    auto emit = [&](const std::vector<int>& trail, bool closed) {
        SectionChain chain;
        chain.closed = closed;
        for (int id : trail) chain.points.push_back(sb.points[id]);
        chains.push_back(std::move(chain));
    };

    for (bool progress = true; progress;) {
        progress = false;
        for (int p = 0; p < np; ++p)
            if (free_degree(p) == 1) {
                emit(walk(p), false);
                progress = true;
            }
    }
    for (int p = 0; p < np; ++p)
        while (free_degree(p) > 0) {
            auto trail = walk(p);
            const bool closed = trail.size() > 1 && trail.front() == trail.back();
            if (closed) trail.pop_back();
            emit(trail, closed);
        }

    std::set<int> in_segment;
    for (const auto& [i, j] : sb.segments) {
        in_segment.insert(i);
        in_segment.insert(j);
    }
    std::set<int> emitted;
    for (int id : sb.isolated)
        if (!in_segment.count(id) && emitted.insert(id).second) emit({id}, false);

    return chains;
}

CircumferencePolygon circumference(const TriangleMesh& mesh, const MeasurementSpec& spec) {
    check_vertex_index(spec.anchor, mesh.vertex_count(), spec.name, "anchor");
    if (std::abs(spec.normal.norm() - 1.0) > 1e-12)
        throw InputError("measurement '" + spec.name + "': normal is not unit length");
    if (spec.region.empty()) throw InputError("measurement '" + spec.name + "': empty region");

    const Plane plane{mesh.vertices[spec.anchor], spec.normal};
    const auto chains = plane_section(mesh, spec.region, plane);
    if (chains.empty())
        throw MeasurementUndefined(spec.name, "plane does not intersect the region");

    int pick = -1;
    for (size_t i = 0; i < chains.size() && pick < 0; ++i)
        for (const auto& p : chains[i].points)
            if (p.a == spec.anchor && p.b == spec.anchor) {
                pick = static_cast<int>(i);
                break;
            }
    if (pick < 0) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < chains.size(); ++i)
            for (const auto& p : chains[i].points) {
                const double d = (p.position(mesh) - plane.point).norm();
                if (d < best) {
                    best = d;
                    pick = static_cast<int>(i);
                }
            }
    }

    const auto& chain = chains[pick];
    const auto [u, v] = plane_basis(spec.normal);
    std::vector<Vec2> flat;
    flat.reserve(chain.points.size());
    for (const auto& p : chain.points) {
        const Vec3 d = p.position(mesh) - plane.point;
        flat.emplace_back(d.dot(u), d.dot(v));
    }
    const auto hull = convex_hull_indices(flat);
    if (hull.size() < 2)
        throw MeasurementUndefined(spec.name, "section degenerates to a point");

    CircumferencePolygon poly;
    for (int idx : hull) poly.points.push_back(chain.points[idx]);
    const size_t n = poly.points.size();
    if (n == 2) {
        const double len = (poly.points[0].position(mesh) - poly.points[1].position(mesh)).norm();
        poly.edge_lengths = {len, len};
        poly.perimeter = 2.0 * len;
    } else {
        for (size_t i = 0; i < n; ++i) {
            const double len =
                (poly.points[(i + 1) % n].position(mesh) - poly.points[i].position(mesh)).norm();
            poly.edge_lengths.push_back(len);
            poly.perimeter += len;
        }
    }
    return poly;
}

double evaluate(const TriangleMesh& mesh, const EdgeGraph& graph, const MeasurementSpec& spec) {
    switch (spec.type) {
        case MeasurementType::euclidean: return euclidean_length(mesh, spec);
        case MeasurementType::geodesic: {
            check_vertex_index(spec.a, mesh.vertex_count(), spec.name, "a");
            check_vertex_index(spec.b, mesh.vertex_count(), spec.name, "b");
            return geodesic_path(mesh, graph, spec.a, spec.b).total;
        }
        case MeasurementType::circumference: return circumference(mesh, spec).perimeter;
    }
    throw InputError("measurement '" + spec.name + "': unknown type");
}

MeasurementVector measure_all(const TriangleMesh& mesh, const MeasurementProfile& profile) {
    if (profile.reference_vertex_count >= 0 && profile.reference_vertex_count != mesh.vertex_count())
        throw InputError("mesh has " + std::to_string(mesh.vertex_count()) +
                         " vertices but the profile expects " +
                         std::to_string(profile.reference_vertex_count));
    if (profile.reference_triangle_count >= 0 && profile.reference_triangle_count != mesh.triangle_count())
        throw InputError("mesh has " + std::to_string(mesh.triangle_count()) +
                         " triangles but the profile expects " +
                         std::to_string(profile.reference_triangle_count));
    MeasurementProfile bound = profile;
    bind_profile(bound, mesh);

    EdgeGraph graph;
    for (const auto& spec : profile.specs)
        if (spec.type == MeasurementType::geodesic) {
            graph = build_edge_graph(mesh);
            break;
        }

    MeasurementVector out;
    out.values.resize(static_cast<Eigen::Index>(profile.specs.size()));
    for (size_t i = 0; i < profile.specs.size(); ++i) {
        const auto& spec = profile.specs[i];
        out.names.push_back(spec.name);
        try {
            out.values[static_cast<Eigen::Index>(i)] = evaluate(mesh, graph, spec);
        } catch (const MeasurementUndefined&) {
            throw;
        } catch (const Error& e) {
            std::string msg = e.what();
            if (msg.find("measurement '") != 0) msg = "measurement '" + spec.name + "': " + msg;
            if (e.kind() == ErrorKind::numerical) throw NumericalError(msg);
            throw InputError(msg);
        }
    }
    return out;
}

}  // namespace anthrofit
