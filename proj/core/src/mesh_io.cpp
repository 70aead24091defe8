// Copyright 2026 The voxnorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voxnorm/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace voxnorm {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw Error("parse error at line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double value = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) parse_error(line_no, "bad number '" + std::string(tok) + "'");
  return value;
}

long parse_long(std::string_view tok, std::size_t line_no) {
  long value = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) parse_error(line_no, "bad index '" + std::string(tok) + "'");
  return value;
}

TriangleMesh build_mesh(std::vector<Vec3> vertices, std::vector<Face> faces) {
  try {
    return TriangleMesh(std::move(vertices), std::move(faces));
  } catch (const Error& e) {
    throw Error(std::string("invalid mesh: ") + e.what());
  }
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".obj") return MeshFormat::kObj;
  if (ext == ".off") return MeshFormat::kOff;
  throw Error("cannot infer mesh format from '" + path.string() + "' (expected .obj or .off)");
}

TriangleMesh read_obj(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = split_ws(strip_comment(raw));
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) parse_error(line_no, "vertex needs 3 coordinates");
      vertices.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                            parse_double(tokens[3], line_no));
    } else if (tokens[0] == "f") {
      if (tokens.size() != 4) {
        throw Error("non-triangular face at line " + std::to_string(line_no));
      }
      Face face{};
      for (int k = 0; k < 3; ++k) {
        std::string_view tok = tokens[k + 1];
        tok = tok.substr(0, tok.find('/'));
        const long idx = parse_long(tok, line_no);
        long resolved = 0;
        if (idx > 0) {
          resolved = idx - 1;
        } else if (idx < 0) {
          resolved = static_cast<long>(vertices.size()) + idx;
        } else {
          parse_error(line_no, "face index 0 is invalid in OBJ");
        }
        if (resolved < 0) parse_error(line_no, "face index out of range");
        face[k] = static_cast<int>(resolved);
      }
      faces.push_back(face);
    }
  }
  return build_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh read_off(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  // Next non-empty, comment-stripped line split into tokens.
  auto next_tokens = [&]() -> std::vector<std::string_view> {
    while (std::getline(in, raw)) {
      ++line_no;
      auto tokens = split_ws(strip_comment(raw));
      if (!tokens.empty()) return tokens;
    }
    return {};
  };

  auto tokens = next_tokens();
  if (tokens.empty() || tokens[0] != "OFF") parse_error(line_no, "missing OFF header");
  tokens.erase(tokens.begin());
  if (tokens.empty()) tokens = next_tokens();
  if (tokens.size() < 2) parse_error(line_no, "expected vertex and face counts");
  const long nv = parse_long(tokens[0], line_no);
  const long nf = parse_long(tokens[1], line_no);
  if (nv < 0 || nf < 0) parse_error(line_no, "negative element count");

  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    tokens = next_tokens();
    if (tokens.size() < 3) parse_error(line_no, "vertex needs 3 coordinates");
    vertices.emplace_back(parse_double(tokens[0], line_no), parse_double(tokens[1], line_no),
                          parse_double(tokens[2], line_no));
  }
  std::vector<Face> faces;
  faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    tokens = next_tokens();
    if (tokens.empty()) parse_error(line_no, "unexpected end of file in face list");
    const long count = parse_long(tokens[0], line_no);
    if (count != 3) throw Error("non-triangular face at line " + std::to_string(line_no));
    if (tokens.size() < 4) parse_error(line_no, "face needs 3 indices");
    Face face{};
    for (int k = 0; k < 3; ++k) {
      const long idx = parse_long(tokens[k + 1], line_no);
      if (idx < 0) parse_error(line_no, "negative face index");
      face[k] = static_cast<int>(idx);
    }
    faces.push_back(face);
  }
  return build_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file '" + path.string() + "'");
  return format == MeshFormat::kObj ? read_obj(in) : read_off(in);
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  return load_mesh(path, format_from_path(path));
}

void write_obj(std::ostream& out, const TriangleMesh& mesh, int precision) {
  out << std::setprecision(precision);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void write_off(std::ostream& out, const TriangleMesh& mesh, int precision) {
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  out << std::setprecision(precision);
  for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format,
               int precision) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file '" + path.string() + "'");
  if (format == MeshFormat::kObj) {
    write_obj(out, mesh, precision);
  } else {
    write_off(out, mesh, precision);
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, int precision) {
  save_mesh(mesh, path, format_from_path(path), precision);
}

}  // namespace voxnorm
