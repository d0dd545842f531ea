#pragma once

#include "anthrofit/mesh.hpp"

#include <filesystem>
#include <iosfwd>

namespace anthrofit {

// Wavefront OBJ, triangles only. Reading keeps `v` and `f` records and
// ignores normals/texcoords; writing emits 9 significant digits.
TriangleMesh read_obj(std::istream& in, const std::string& origin = "<stream>");
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

} // namespace anthrofit
