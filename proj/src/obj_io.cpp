#include "anthrofit/obj_io.hpp"
#include "anthrofit/errors.hpp"
#include "anthrofit/num_format.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace anthrofit {

namespace {

// "7", "7/2", "7//3", "7/2/3" all refer to vertex 7.
int parse_face_index(const std::string& token, int vertex_count, const std::string& origin, int line_no) {
    std::string head = token.substr(0, token.find('/'));
    int idx = 0;
    auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
    if (res.ec != std::errc() || res.ptr != head.data() + head.size())
        throw InputError(origin + ":" + std::to_string(line_no) + ": bad face index '" + token + "'");
    if (idx < 0) idx = vertex_count + 1 + idx;
    if (idx < 1 || idx > vertex_count)
        throw InputError(origin + ":" + std::to_string(line_no) + ": face index " + std::to_string(idx) +
                         " out of range (have " + std::to_string(vertex_count) + " vertices)");
    return idx - 1;
}

}  // namespace

TriangleMesh read_obj(std::istream& in, const std::string& origin) {
    TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            std::string sx, sy, sz;
            double x, y, z;
            if (!(ls >> sx >> sy >> sz) ||
                !parse_double(sx, x) || !parse_double(sy, y) || !parse_double(sz, z))
                throw InputError(origin + ":" + std::to_string(line_no) + ": bad vertex record");
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> corners;
            std::string token;
            while (ls >> token)
                corners.push_back(parse_face_index(token, static_cast<int>(mesh.vertices.size()), origin, line_no));
            if (corners.size() != 3)
                throw InputError(origin + ":" + std::to_string(line_no) + ": face with " +
                                 std::to_string(corners.size()) + " corners; only triangles are supported");
            mesh.triangles.push_back({corners[0], corners[1], corners[2]});
        }
        // vn, vt, o, g, s, usemtl, mtllib, comments: ignored
    }
    return mesh;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_obj(in, path.string());
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
    for (const auto& p : mesh.vertices)
        out << "v " << format_double(p.x(), 9) << ' ' << format_double(p.y(), 9) << ' '
            << format_double(p.z(), 9) << '\n';
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    write_obj(out, mesh);
    out.flush();
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

}  // namespace anthrofit
