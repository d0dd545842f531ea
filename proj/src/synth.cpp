#include "anthrofit/synth.hpp"

#include "anthrofit/errors.hpp"
#include "anthrofit/geometry.hpp"
#include "anthrofit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace anthrofit {
namespace {

constexpr double kPi = 3.141592653589793;

struct GridCoord {
    int ring = -1;
    int seg = -1;
};

// Capped or open cylinder built from stacked rings, bottom to top. Each ring
// has `segments` vertices at angles 2*pi*k/segments; grid maps a vertex id to
// its (ring, segment) and poles to (-1, -1).
struct Capsule {
    TriangleMesh mesh;
    std::vector<std::vector<int>> rings;
    std::vector<GridCoord> grid;
    std::vector<int> capb_rings;  // bottom cap, ascending toward the edge ring
    std::vector<int> cyl_rings;   // cylinder interior
    std::vector<int> capt_rings;  // top cap, descending from the edge ring
    int bottom_pole = -1;
    int top_pole = -1;
    int segments = 0;
};

// open_bottom_at / open_top_at: 0 closes that end with a pole; a value c in
// [1, cap_rings] leaves it open, keeping only the cap rings at or past c.
Capsule make_capsule(double radius, double half_height, int segments, int cap_rings,
                     int body_rings, int open_bottom_at, int open_top_at) {
    Capsule c;
    c.segments = segments;
    auto add_vertex = [&](const Vec3& p, int ring, int seg) {
        c.mesh.vertices.push_back(p);
        c.grid.push_back({ring, seg});
        return static_cast<int>(c.mesh.vertices.size()) - 1;
    };
    auto add_ring = [&](double rho, double z) {
        std::vector<int> ring(segments);
        int idx = static_cast<int>(c.rings.size());
        for (int k = 0; k < segments; ++k) {
            double a = 2.0 * kPi * k / segments;
            ring[k] = add_vertex(Vec3(rho * std::cos(a), rho * std::sin(a), z), idx, k);
        }
        c.rings.push_back(std::move(ring));
        return idx;
    };

    if (open_bottom_at == 0) c.bottom_pole = add_vertex(Vec3(0, 0, -half_height - radius), -1, -1);
    int jb = open_bottom_at == 0 ? 1 : open_bottom_at;
    for (int j = jb; j <= cap_rings; ++j) {
        double t = 0.5 * kPi * j / cap_rings;
        c.capb_rings.push_back(add_ring(radius * std::sin(t), -half_height - radius * std::cos(t)));
    }
    if (half_height > 0)
        for (int t = 1; t < body_rings; ++t)
            c.cyl_rings.push_back(add_ring(radius, -half_height + 2.0 * half_height * t / body_rings));
    int jt_hi = half_height > 0 ? cap_rings : cap_rings - 1;
    int jt_lo = open_top_at == 0 ? 1 : open_top_at;
    for (int j = jt_hi; j >= jt_lo; --j) {
        double t = 0.5 * kPi * j / cap_rings;
        c.capt_rings.push_back(add_ring(radius * std::sin(t), half_height + radius * std::cos(t)));
    }
    if (open_top_at == 0) c.top_pole = add_vertex(Vec3(0, 0, half_height + radius), -1, -1);

    auto tri = [&](int a, int b, int d) { c.mesh.triangles.push_back({a, b, d}); };
    if (c.bottom_pole >= 0) {
        const auto& r0 = c.rings.front();
        for (int k = 0; k < segments; ++k) tri(c.bottom_pole, r0[(k + 1) % segments], r0[k]);
    }
    for (size_t i = 0; i + 1 < c.rings.size(); ++i) {
        const auto& lo = c.rings[i];
        const auto& hi = c.rings[i + 1];
        for (int k = 0; k < segments; ++k) {
            int kn = (k + 1) % segments;
            tri(lo[k], lo[kn], hi[kn]);
            tri(lo[k], hi[kn], hi[k]);
        }
    }
    if (c.top_pole >= 0) {
        const auto& rt = c.rings.back();
        for (int k = 0; k < segments; ++k) tri(c.top_pole, rt[k], rt[(k + 1) % segments]);
    }
    return c;
}

void place(Capsule& c, const Eigen::Matrix3d& rot, const Vec3& shift) {
    for (auto& p : c.mesh.vertices) p = rot * p + shift;
}

Eigen::Matrix3d rot_x(double angle) {
    return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}

Eigen::Matrix3d rot_y(double angle) {
    return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
}

enum PartTag { kTorso = 0, kHead, kArmR, kArmL, kLegR, kLegL, kBridge };

struct Assembly {
    TriangleMesh mesh;
    std::vector<int> part;

    int add_part(const Capsule& c, int tag) {
        int offset = mesh.vertex_count();
        mesh.vertices.insert(mesh.vertices.end(), c.mesh.vertices.begin(), c.mesh.vertices.end());
        for (const auto& t : c.mesh.triangles) {
            mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
            part.push_back(tag);
        }
        return offset;
    }

    void add_triangle(int a, int b, int d, int tag) {
        mesh.triangles.push_back({a, b, d});
        part.push_back(tag);
    }
};

// Removes the quads of ring rows [ring_lo, ring_hi) x columns [col0, col0+cols)
// from a placed capsule and returns the hole boundary as an ordered loop.
std::vector<int> cut_rect_hole(Assembly& a, const Capsule& c, int offset, int ring_lo, int ring_hi,
                               int col0, int cols) {
    int s = c.segments;
    auto inside = [&](int vertex) {
        int local = vertex - offset;
        if (local < 0 || local >= static_cast<int>(c.grid.size())) return false;
        GridCoord g = c.grid[local];
        if (g.ring < ring_lo || g.ring > ring_hi) return false;
        int dk = ((g.seg - col0) % s + s) % s;
        return dk <= cols;
    };
    std::vector<std::array<int, 3>> kept;
    std::vector<int> kept_part;
    for (size_t i = 0; i < a.mesh.triangles.size(); ++i) {
        const auto& t = a.mesh.triangles[i];
        if (inside(t[0]) && inside(t[1]) && inside(t[2])) continue;
        kept.push_back(t);
        kept_part.push_back(a.part[i]);
    }
    a.mesh.triangles = std::move(kept);
    a.part = std::move(kept_part);

    std::vector<int> loop;
    auto at = [&](int ring, int col) { return c.rings[ring][((col % s) + s) % s] + offset; };
    for (int k = 0; k < cols; ++k) loop.push_back(at(ring_lo, col0 + k));
    for (int r = ring_lo; r < ring_hi; ++r) loop.push_back(at(r, col0 + cols));
    for (int k = 0; k < cols; ++k) loop.push_back(at(ring_hi, col0 + cols - k));
    for (int r = ring_hi; r > ring_lo; --r) loop.push_back(at(r, col0));
    return loop;
}

// Triangulates the annulus between two boundary loops by merging them in
// angular order around the axis through `center`.
void stitch_rings(Assembly& a, std::vector<int> loop_a, std::vector<int> loop_b,
                  const Vec3& center, const Vec3& axis, int tag) {
    auto [u, v] = plane_basis(axis.normalized());
    auto wrap = [](double d) {
        while (d > kPi) d -= 2.0 * kPi;
        while (d <= -kPi) d += 2.0 * kPi;
        return d;
    };
    auto prepare = [&](std::vector<int>& loop) {
        int n = static_cast<int>(loop.size());
        std::vector<double> raw(n);
        for (int i = 0; i < n; ++i) {
            Vec3 d = a.mesh.vertices[loop[i]] - center;
            raw[i] = std::atan2(d.dot(v), d.dot(u));
        }
        double turn = 0.0;
        for (int i = 0; i < n; ++i) turn += wrap(raw[(i + 1) % n] - raw[i]);
        if (turn < 0.0) {
            std::reverse(loop.begin(), loop.end());
            std::reverse(raw.begin(), raw.end());
        }
        int start = static_cast<int>(std::min_element(raw.begin(), raw.end()) - raw.begin());
        std::rotate(loop.begin(), loop.begin() + start, loop.end());
        std::rotate(raw.begin(), raw.begin() + start, raw.end());
        std::vector<double> ang(n);
        ang[0] = raw[0];
        for (int i = 1; i < n; ++i) ang[i] = ang[i - 1] + wrap(raw[i] - raw[i - 1]);
        return ang;
    };
    std::vector<double> ta = prepare(loop_a);
    std::vector<double> tb = prepare(loop_b);
    int na = static_cast<int>(loop_a.size());
    int nb = static_cast<int>(loop_b.size());
    auto next_a = [&](int i) { return i + 1 < na ? ta[i + 1] : ta[0] + 2.0 * kPi; };
    auto next_b = [&](int j) { return j + 1 < nb ? tb[j + 1] : tb[0] + 2.0 * kPi; };
    int i = 0;
    int j = 0;
    while (i < na || j < nb) {
        bool advance_a = j >= nb || (i < na && next_a(i) <= next_b(j));
        if (advance_a) {
            a.add_triangle(loop_a[i % na], loop_a[(i + 1) % na], loop_b[j % nb], tag);
            ++i;
        } else {
            a.add_triangle(loop_b[(j + 1) % nb], loop_b[j % nb], loop_a[i % na], tag);
            ++j;
        }
    }
}

// Propagates a consistent winding across shared edges, then flips everything
// if the enclosed signed volume comes out negative.
void orient_consistently(TriangleMesh& mesh) {
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e];
            int b = tri[(e + 1) % 3];
            edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
        }
    }
    auto has_directed = [](const std::array<int, 3>& tri, int a, int b) {
        return (tri[0] == a && tri[1] == b) || (tri[1] == a && tri[2] == b) ||
               (tri[2] == a && tri[0] == b);
    };
    std::vector<char> visited(mesh.triangle_count(), 0);
    std::vector<int> stack;
    for (int seed = 0; seed < mesh.triangle_count(); ++seed) {
        if (visited[seed]) continue;
        visited[seed] = 1;
        stack.push_back(seed);
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            const std::array<int, 3> tri = mesh.triangles[t];
            for (int e = 0; e < 3; ++e) {
                int a = tri[e];
                int b = tri[(e + 1) % 3];
                for (int nt : edge_tris[{std::min(a, b), std::max(a, b)}]) {
                    if (visited[nt]) continue;
                    visited[nt] = 1;
                    if (has_directed(mesh.triangles[nt], a, b))
                        std::swap(mesh.triangles[nt][1], mesh.triangles[nt][2]);
                    stack.push_back(nt);
                }
            }
        }
    }
    double vol6 = 0.0;
    for (const auto& t : mesh.triangles)
        vol6 += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
    if (vol6 < 0.0)
        for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
}

// Drops unreferenced vertices; returns old id -> new id, -1 for dropped.
std::vector<int> compact_vertices(TriangleMesh& mesh) {
    std::vector<char> used(mesh.vertex_count(), 0);
    for (const auto& t : mesh.triangles)
        for (int v : t) used[v] = 1;
    std::vector<int> remap(mesh.vertex_count(), -1);
    std::vector<Vec3> kept;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (!used[v]) continue;
        remap[v] = static_cast<int>(kept.size());
        kept.push_back(mesh.vertices[v]);
    }
    mesh.vertices = std::move(kept);
    for (auto& t : mesh.triangles)
        for (int& v : t) v = remap[v];
    return remap;
}

BuiltTemplate build_mannequin(int res) {
    if (res < 20) throw InputError("mannequin resolution must be at least 20");
    const int st = res;
    const int ct = std::max(5, res / 4);
    const int bt = std::max(6, res * 7 / 16);
    const int sh = std::max(10, res * 5 / 8);
    const int ch = std::max(3, res / 6);
    const int sl = std::max(8, res * 7 / 16);
    const int cl = std::max(2, res / 8);
    const int bl = std::max(6, res / 2);

    const double torso_r = 150.0;
    const double torso_hh = 220.0;
    const double head_r = 85.0;
    const double arm_r = 40.0;
    const double arm_hh = 240.0;
    const double leg_r = 55.0;
    const double leg_hh = 300.0;
    const double neck_gap = 18.0;
    const double arm_gap = 12.0;
    const double leg_gap = 15.0;

    Assembly a;
    std::map<std::string, int> marks;

    Capsule torso = make_capsule(torso_r, torso_hh, st, ct, bt, 0, 1);
    int off_t = a.add_part(torso, kTorso);
    auto ring_ids = [&](const Capsule& c, int ring_idx, int offset) {
        std::vector<int> out;
        out.reserve(c.rings[ring_idx].size());
        for (int v : c.rings[ring_idx]) out.push_back(v + offset);
        return out;
    };
    auto loop_centroid = [&](const std::vector<int>& loop) {
        Vec3 sum = Vec3::Zero();
        for (int v : loop) sum += a.mesh.vertices[v];
        return Vec3(sum / static_cast<double>(loop.size()));
    };
    auto highest_of = [&](const std::vector<int>& loop) {
        int best = loop.front();
        for (int v : loop) {
            double z = a.mesh.vertices[v].z();
            double bz = a.mesh.vertices[best].z();
            if (z > bz || (z == bz && v < best)) best = v;
        }
        return best;
    };

    std::vector<int> neck = ring_ids(torso, torso.capt_rings.back(), off_t);
    double neck_z = a.mesh.vertices[neck[0]].z();
    double neck_r = torso_r * std::sin(0.5 * kPi / ct);
    marks["neck"] = neck[0];
    marks["bottom"] = off_t + torso.bottom_pole;

    // head: open the cap ring whose radius best matches the neck
    int jh = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 1; j < ch; ++j) {
        double d = std::abs(head_r * std::sin(0.5 * kPi * j / ch) - neck_r);
        if (d < best) {
            best = d;
            jh = j;
        }
    }
    Capsule head = make_capsule(head_r, 0.0, sh, ch, 1, jh, 0);
    double ring_drop = head_r * std::cos(0.5 * kPi * jh / ch);
    place(head, Eigen::Matrix3d::Identity(), Vec3(0, 0, neck_z + neck_gap + ring_drop));
    int off_h = a.add_part(head, kHead);
    std::vector<int> head_ring = ring_ids(head, head.capb_rings.front(), off_h);
    double head_ring_z = a.mesh.vertices[head_ring[0]].z();
    stitch_rings(a, neck, head_ring, Vec3(0, 0, 0.5 * (neck_z + head_ring_z)), Vec3::UnitZ(),
                 kBridge);
    marks["head_top"] = off_h + head.top_pole;
    marks["head_ring_0"] = off_h + head.rings[head.capb_rings.back()][0];

    int waist_t = std::max(1, bt / 3);
    std::vector<int> waist = ring_ids(torso, torso.cyl_rings[waist_t - 1], off_t);
    marks["waist_0"] = waist[0];
    marks["waist_q"] = waist[st / 4];
    marks["waist_h"] = waist[st / 2];
    marks["waist_3q"] = waist[3 * st / 4];
    int chest_t = std::max(waist_t + 1, bt - 4);
    std::vector<int> chest = ring_ids(torso, torso.cyl_rings[chest_t - 1], off_t);
    marks["chest_0"] = chest[0];
    marks["chest_h"] = chest[st / 2];
    std::vector<int> hip = ring_ids(torso, torso.capb_rings.back(), off_t);
    marks["hip_0"] = hip[0];
    marks["hip_h"] = hip[st / 2];

    // arms: rectangular holes near the top edge, bridged to rotated capsules
    int wa = std::max(2, st / 8);
    int jr0 = torso.cyl_rings[bt - 3];
    int jr1 = torso.capt_rings.front();
    int col_r = ((st - wa / 2) % st + st) % st;
    int col_l = (col_r + st / 2) % st;

    auto attach_arm = [&](int col, double side, int tag) {
        std::vector<int> hole = cut_rect_hole(a, torso, off_t, jr0, jr1, col, wa);
        Vec3 c = loop_centroid(hole);
        Capsule arm = make_capsule(arm_r, arm_hh, sl, cl, bl, cl, 0);
        Vec3 target(side * (torso_r + arm_gap), c.y(), c.z());
        Eigen::Matrix3d rot = rot_y(side * 0.5 * kPi);
        place(arm, rot, target - rot * Vec3(0, 0, -arm_hh));
        int off = a.add_part(arm, tag);
        std::vector<int> ring = ring_ids(arm, arm.capb_rings.front(), off);
        stitch_rings(a, hole, ring, 0.5 * (c + target), Vec3(side, 0, 0), kBridge);
        return std::pair<Capsule, int>(std::move(arm), off);
    };
    {
        auto [arm, off] = attach_arm(col_r, 1.0, kArmR);
        marks["hand_r"] = off + arm.top_pole;
        marks["shoulder_r"] = highest_of(ring_ids(arm, arm.capb_rings.front(), off));
    }
    {
        auto [arm, off] = attach_arm(col_l, -1.0, kArmL);
        marks["hand_l"] = off + arm.top_pole;
        marks["shoulder_l"] = highest_of(ring_ids(arm, arm.capb_rings.front(), off));
        std::vector<int> wrist = ring_ids(arm, arm.cyl_rings.back(), off);
        marks["wrist_l_0"] = wrist[0];
        marks["wrist_l_1"] = wrist[sl / 4];
        marks["wrist_l_2"] = wrist[sl / 2];
        marks["wrist_l_3"] = wrist[3 * sl / 4];
    }

    // legs: holes on the bottom cap, bridged to flipped capsules
    int wl = std::max(2, st / 8);
    int jm = 2 * ct / 3;
    int jl0 = torso.capb_rings[jm - 2];
    int jl1 = torso.capb_rings[jm];

    auto attach_leg = [&](int col, int tag) {
        std::vector<int> hole = cut_rect_hole(a, torso, off_t, jl0, jl1, col, wl);
        Vec3 c = loop_centroid(hole);
        Capsule leg = make_capsule(leg_r, leg_hh, sl, cl, bl, cl, 0);
        Vec3 target(c.x(), c.y(), c.z() - leg_gap);
        Eigen::Matrix3d rot = rot_x(kPi);
        place(leg, rot, target - rot * Vec3(0, 0, -leg_hh));
        int off = a.add_part(leg, tag);
        std::vector<int> ring = ring_ids(leg, leg.capb_rings.front(), off);
        stitch_rings(a, hole, ring, 0.5 * (c + target), -Vec3::UnitZ(), kBridge);
        return std::pair<Capsule, int>(std::move(leg), off);
    };
    {
        auto [leg, off] = attach_leg(col_r, kLegR);
        marks["foot_r"] = off + leg.top_pole;
    }
    {
        auto [leg, off] = attach_leg(col_l, kLegL);
        marks["foot_l"] = off + leg.top_pole;
        std::vector<int> knee = ring_ids(leg, leg.cyl_rings[bl / 2 - 1], off);
        marks["knee_l"] = knee[0];
        marks["knee_l_0"] = knee[0];
        marks["knee_l_1"] = knee[sl / 4];
        marks["knee_l_2"] = knee[sl / 2];
        marks["knee_l_3"] = knee[3 * sl / 4];
    }

    orient_consistently(a.mesh);
    std::vector<int> remap = compact_vertices(a.mesh);

    BuiltTemplate out;
    out.mesh = std::move(a.mesh);
    for (const auto& [name, v] : marks) {
        if (remap[v] < 0) throw NumericalError("landmark vertex lost during assembly: " + name);
        out.landmarks[name] = remap[v];
    }
    const std::pair<int, const char*> named_parts[] = {
        {kTorso, "torso"}, {kHead, "head"},   {kArmR, "arm_r"},
        {kArmL, "arm_l"},  {kLegR, "leg_r"},  {kLegL, "leg_l"},
    };
    for (const auto& [tag, name] : named_parts) out.regions[name] = {};
    for (int t = 0; t < out.mesh.triangle_count(); ++t)
        for (const auto& [tag, name] : named_parts)
            if (a.part[t] == tag) out.regions[name].push_back(t);
    return out;
}

BuiltTemplate build_blob(int res) {
    if (res < 8) throw InputError("blob resolution must be at least 8");
    const int s = res;
    const int nr = std::max(5, 3 * res / 4);
    auto radius_at = [](double theta, double phi) {
        return 300.0 * (1.0 + 0.20 * std::sin(2.0 * theta) * std::cos(phi) +
                        0.12 * std::sin(3.0 * theta) * std::sin(2.0 * phi) +
                        0.08 * std::cos(theta) * std::cos(theta));
    };

    TriangleMesh mesh;
    int bottom = 0;
    mesh.vertices.emplace_back(0, 0, -radius_at(kPi, 0.0));
    std::vector<std::vector<int>> rings(nr);
    for (int i = 0; i < nr; ++i) {
        double theta = kPi * (nr - i) / (nr + 1);
        rings[i].resize(s);
        for (int k = 0; k < s; ++k) {
            double phi = 2.0 * kPi * k / s;
            double rad = radius_at(theta, phi);
            rings[i][k] = mesh.vertex_count();
            mesh.vertices.emplace_back(rad * std::sin(theta) * std::cos(phi),
                                       rad * std::sin(theta) * std::sin(phi),
                                       rad * std::cos(theta));
        }
    }
    int top = mesh.vertex_count();
    mesh.vertices.emplace_back(0, 0, radius_at(0.0, 0.0));

    for (int k = 0; k < s; ++k) mesh.triangles.push_back({bottom, rings[0][(k + 1) % s], rings[0][k]});
    for (int i = 0; i + 1 < nr; ++i)
        for (int k = 0; k < s; ++k) {
            int kn = (k + 1) % s;
            mesh.triangles.push_back({rings[i][k], rings[i][kn], rings[i + 1][kn]});
            mesh.triangles.push_back({rings[i][k], rings[i + 1][kn], rings[i + 1][k]});
        }
    for (int k = 0; k < s; ++k)
        mesh.triangles.push_back({top, rings[nr - 1][k], rings[nr - 1][(k + 1) % s]});

    BuiltTemplate out;
    out.mesh = std::move(mesh);
    out.landmarks["top"] = top;
    out.landmarks["bottom"] = bottom;
    const std::pair<const char*, int> bands[] = {
        {"low", nr / 4}, {"mid", nr / 2}, {"high", 3 * nr / 4}};
    const std::pair<const char*, int> quarters[] = {
        {"0", 0}, {"q", s / 4}, {"h", s / 2}, {"3q", 3 * s / 4}};
    for (const auto& [band, ring] : bands)
        for (const auto& [suffix, k] : quarters)
            out.landmarks[std::string(band) + "_" + suffix] = rings[ring][k];
    out.regions["all"].resize(out.mesh.triangle_count());
    for (int t = 0; t < out.mesh.triangle_count(); ++t) out.regions["all"][t] = t;
    return out;
}

std::vector<double> distances_from(const EdgeGraph& graph, int source) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.vertex_count(), inf);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (const auto& [u, len] : graph.adjacency[v]) {
            double nd = d + len;
            if (nd < dist[u]) {
                dist[u] = nd;
                heap.push({nd, u});
            }
        }
    }
    return dist;
}

}  // namespace

BuiltTemplate build_template(const std::string& kind, int resolution) {
    if (kind == "mannequin") return build_mannequin(resolution);
    if (kind == "blob") return build_blob(resolution);
    throw InputError("unknown template kind: " + kind);
}

TriangleMesh make_template(const std::string& kind, int resolution) {
    return build_template(kind, resolution).mesh;
}

MeasurementProfile body_profile(int resolution) {
    BuiltTemplate t = build_template("mannequin", resolution);
    auto lm = [&](const char* name) { return t.landmarks.at(name); };

    MeasurementProfile profile;
    auto euc = [&](const char* name, const char* va, const char* vb) {
        MeasurementSpec spec;
        spec.name = name;
        spec.type = MeasurementType::euclidean;
        spec.a = lm(va);
        spec.b = lm(vb);
        profile.specs.push_back(std::move(spec));
    };
    auto circ = [&](const char* name, const char* anchor, const char* region) {
        MeasurementSpec spec;
        spec.name = name;
        spec.type = MeasurementType::circumference;
        spec.anchor = lm(anchor);
        spec.normal = Vec3::UnitZ();
        spec.region = t.regions.at(region);
        profile.specs.push_back(std::move(spec));
    };
    auto geo = [&](const std::string& name, const char* va, const char* vb, const char* group) {
        MeasurementSpec spec;
        spec.name = name;
        spec.group = group;
        spec.type = MeasurementType::geodesic;
        spec.a = lm(va);
        spec.b = lm(vb);
        profile.specs.push_back(std::move(spec));
    };

    euc("height", "head_top", "foot_l");
    euc("span", "hand_l", "hand_r");
    euc("shoulder_width", "shoulder_l", "shoulder_r");
    euc("arm_l", "shoulder_l", "hand_l");
    euc("arm_r", "shoulder_r", "hand_r");
    euc("head_height", "head_top", "neck");
    euc("torso_length", "neck", "bottom");
    euc("waist_width", "waist_0", "waist_h");
    euc("waist_depth", "waist_q", "waist_3q");
    euc("chest_width", "chest_0", "chest_h");
    euc("hip_width", "hip_0", "hip_h");
    euc("knee_height", "knee_l", "foot_l");
    euc("leg_l", "bottom", "foot_l");
    euc("foot_spread", "foot_l", "foot_r");

    circ("waist_circ", "waist_0", "torso");
    circ("chest_circ", "chest_0", "torso");
    circ("hip_circ", "hip_0", "torso");
    circ("head_circ", "head_ring_0", "head");

    const char* wrist[] = {"wrist_l_0", "wrist_l_1", "wrist_l_2", "wrist_l_3"};
    const char* knee[] = {"knee_l_0", "knee_l_1", "knee_l_2", "knee_l_3"};
    for (int i = 0; i < 4; ++i)
        geo("wrist_l_" + std::to_string(i), wrist[i], wrist[(i + 1) % 4], "wrist_l");
    for (int i = 0; i < 4; ++i)
        geo("knee_l_" + std::to_string(i), knee[i], knee[(i + 1) % 4], "knee_l");

    bind_profile(profile, t.mesh);
    return profile;
}

MeasurementProfile face_profile(int resolution) {
    BuiltTemplate t = build_template("blob", resolution);
    auto lm = [&](const char* name) { return t.landmarks.at(name); };

    MeasurementProfile profile;
    auto geo = [&](const char* name, const char* va, const char* vb) {
        MeasurementSpec spec;
        spec.name = name;
        spec.type = MeasurementType::geodesic;
        spec.a = lm(va);
        spec.b = lm(vb);
        profile.specs.push_back(std::move(spec));
    };
    geo("crown_front", "top", "high_0");
    geo("crown_back", "top", "high_h");
    geo("cheek_l", "high_q", "mid_q");
    geo("cheek_r", "high_3q", "mid_3q");
    geo("jaw_front", "mid_0", "low_0");
    geo("jaw_back", "mid_h", "low_h");
    geo("chin", "low_0", "bottom");

    bind_profile(profile, t.mesh);
    return profile;
}

std::vector<Eigen::VectorXd> make_modes(const TriangleMesh& template_mesh, int k, uint64_t seed) {
    if (k < 1) throw InputError("mode count must be positive");
    if (template_mesh.vertex_count() == 0) throw InputError("template mesh is empty");
    Rng rng(seed);
    auto [lo, hi] = bounding_box(template_mesh);
    Vec3 extent = (hi - lo).cwiseMax(1e-9);
    double diag = (hi - lo).norm();
    EdgeGraph graph = build_edge_graph(template_mesh);
    const int m = template_mesh.vertex_count();

    std::vector<Eigen::VectorXd> modes;
    modes.reserve(k);
    for (int mode = 0; mode < k; ++mode) {
        struct Wave {
            Vec3 dir;
            Vec3 freq;
            double phase;
        };
        std::vector<Wave> waves(3);
        for (auto& w : waves) {
            Vec3 dir(rng.normal(), rng.normal(), rng.normal());
            w.dir = dir.norm() < 1e-12 ? Vec3::UnitX() : Vec3(dir.normalized());
            w.freq = Vec3(static_cast<double>(rng.index(3)), static_cast<double>(rng.index(3)),
                          static_cast<double>(rng.index(3)));
            if (w.freq == Vec3::Zero()) w.freq.x() = 1.0;
            w.phase = rng.uniform(0.0, 2.0 * kPi);
        }
        Eigen::VectorXd field(3 * m);
        for (int vtx = 0; vtx < m; ++vtx) {
            Vec3 u = (template_mesh.vertices[vtx] - lo).cwiseQuotient(extent);
            Vec3 f = Vec3::Zero();
            for (const auto& w : waves)
                f += w.dir * std::sin(2.0 * kPi * w.freq.dot(u) + w.phase);
            field.segment<3>(3 * vtx) = f;
        }
        double max_norm = 0.0;
        for (int vtx = 0; vtx < m; ++vtx)
            max_norm = std::max(max_norm, field.segment<3>(3 * vtx).norm());
        double max_ratio = 0.0;
        for (int vtx = 0; vtx < m; ++vtx)
            for (const auto& [other, len] : graph.adjacency[vtx]) {
                if (other < vtx) continue;
                double d = (field.segment<3>(3 * vtx) - field.segment<3>(3 * other)).norm();
                max_ratio = std::max(max_ratio, d / len);
            }
        double scale = std::min(0.05 * diag / std::max(max_norm, 1e-300),
                                0.5 / std::max(max_ratio, 1e-300));
        modes.push_back(field * scale);
    }
    return modes;
}

ShapeFamily make_family(const std::string& kind, int resolution, int k, uint64_t seed) {
    ShapeFamily family;
    family.template_mesh = make_template(kind, resolution);
    family.modes = make_modes(family.template_mesh, k, seed);
    family.stddevs.resize(k);
    for (int i = 0; i < k; ++i) family.stddevs[i] = 0.6 * std::pow(0.85, i);
    return family;
}

std::vector<TriangleMesh> sample_family(const ShapeFamily& family, int n, uint64_t seed) {
    if (n < 0) throw InputError("sample count must be non-negative");
    if (family.stddevs.size() != static_cast<Eigen::Index>(family.modes.size()))
        throw InputError("family stddev count does not match mode count");
    Rng rng(seed);
    Eigen::VectorXd base = flatten(family.template_mesh);
    std::vector<TriangleMesh> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd coords = base;
        for (size_t k = 0; k < family.modes.size(); ++k)
            coords += family.stddevs[static_cast<Eigen::Index>(k)] * rng.normal() * family.modes[k];
        out.push_back(unflatten(coords, family.template_mesh.triangles));
    }
    return out;
}

TriangleMesh add_local_bump(const TriangleMesh& mesh, int center, double radius, double amplitude) {
    if (center < 0 || center >= mesh.vertex_count()) throw InputError("bump center out of range");
    if (radius <= 0.0) throw InputError("bump radius must be positive");
    if (amplitude < 0.0) throw InputError("bump amplitude must be non-negative");
    TriangleMesh out = mesh;
    if (amplitude == 0.0) return out;
    EdgeGraph graph = build_edge_graph(mesh);
    std::vector<double> dist = distances_from(graph, center);
    std::vector<Vec3> normals = vertex_normals(mesh);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (!(dist[v] < radius)) continue;
        double c = std::cos(0.5 * kPi * dist[v] / radius);
        out.vertices[v] += amplitude * c * c * normals[v];
    }
    return out;
}

MeasurementGaussian fit_gaussian(const std::vector<Eigen::VectorXd>& samples) {
    if (samples.size() < 2) throw InputError("gaussian fit needs at least two samples");
    const Eigen::Index q = samples[0].size();
    if (q < 1) throw InputError("gaussian fit needs non-empty samples");
    for (const auto& s : samples)
        if (s.size() != q) throw InputError("gaussian fit samples differ in dimension");

    MeasurementGaussian g;
    g.mean = Eigen::VectorXd::Zero(q);
    for (const auto& s : samples) g.mean += s;
    g.mean /= static_cast<double>(samples.size());

    g.covariance = Eigen::MatrixXd::Zero(q, q);
    for (const auto& s : samples) {
        Eigen::VectorXd d = s - g.mean;
        g.covariance += d * d.transpose();
    }
    g.covariance /= static_cast<double>(samples.size() - 1);
    double ridge = 1e-9 * g.covariance.diagonal().mean();
    g.covariance += ridge * Eigen::MatrixXd::Identity(q, q);

    Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
    if (llt.info() == Eigen::Success) {
        g.cholesky = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.covariance);
        if (es.info() != Eigen::Success) throw NumericalError("covariance factorization failed");
        g.cholesky =
            es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    return g;
}

namespace {

Eigen::VectorXd draw_positive(const MeasurementGaussian& gaussian, Rng& rng,
                              bool on_shell, double k) {
    const Eigen::Index q = gaussian.mean.size();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Eigen::VectorXd z(q);
        for (Eigen::Index i = 0; i < q; ++i) z[i] = rng.normal();
        if (on_shell) {
            double norm = z.norm();
            if (norm < 1e-12) continue;
            z = k * z / norm;
        }
        Eigen::VectorXd x = gaussian.mean + gaussian.cholesky * z;
        if ((x.array() > 0.0).all()) return x;
    }
    throw NumericalError("could not draw a measurement sample with positive components");
}

}  // namespace

std::vector<Eigen::VectorXd> sample_close(const MeasurementGaussian& gaussian, int count,
                                          uint64_t seed) {
    if (count < 0) throw InputError("sample count must be non-negative");
    if (gaussian.mean.size() < 1) throw InputError("gaussian is empty");
    Rng rng(seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(draw_positive(gaussian, rng, false, 0.0));
    return out;
}

std::vector<Eigen::VectorXd> sample_ellipsoid(const MeasurementGaussian& gaussian, double k,
                                              int count, uint64_t seed) {
    if (count < 0) throw InputError("sample count must be non-negative");
    if (k < 0.0) throw InputError("ellipsoid radius must be non-negative");
    if (gaussian.mean.size() < 1) throw InputError("gaussian is empty");
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    if (k == 0.0) {
        for (int i = 0; i < count; ++i) out.push_back(gaussian.mean);
        return out;
    }
    Rng rng(seed);
    for (int i = 0; i < count; ++i) out.push_back(draw_positive(gaussian, rng, true, k));
    return out;
}

Eigen::VectorXd diagonal_offset_point(const MeasurementGaussian& gaussian, double k) {
    if (gaussian.mean.size() < 1) throw InputError("gaussian is empty");
    return gaussian.mean + k * gaussian.covariance.diagonal();
}

}  // namespace anthrofit
