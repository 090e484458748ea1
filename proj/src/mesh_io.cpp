#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Geometry>

#include "zoomout/error.hpp"
#include "zoomout/mesh.hpp"
#include "zoomout/text_io.hpp"

namespace zoomout {

namespace {

struct FaceRecord {
  std::array<int, 3> idx;
  std::size_t line;
};

// Validate index range, repeated vertices and degeneracy with file line numbers,
// before handing the arrays to the TriangleMesh constructor.
TriangleMesh build_checked(const std::string& name, std::vector<Eigen::Vector3d>& verts,
                           const std::vector<FaceRecord>& faces) {
  const int n = static_cast<int>(verts.size());
  Vertices v(n, 3);
  for (int i = 0; i < n; ++i) v.row(i) = verts[i].transpose();
  Triangles f(static_cast<Eigen::Index>(faces.size()), 3);

  double diag = 0.0;
  if (n > 0) diag = (v.colwise().maxCoeff() - v.colwise().minCoeff()).norm();
  const double min_area = 1e-12 * diag * diag;

  for (std::size_t t = 0; t < faces.size(); ++t) {
    const auto& [idx, line] = faces[t];
    for (int c = 0; c < 3; ++c) {
      if (idx[c] < 0 || idx[c] >= n) {
        throw ParseError(name, line, "vertex index out of range: " + std::to_string(idx[c]));
      }
    }
    if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2]) {
      throw ParseError(name, line, "repeated vertex in triangle");
    }
    const Eigen::Vector3d a = verts[idx[0]], b = verts[idx[1]], c = verts[idx[2]];
    if (0.5 * (b - a).cross(c - a).norm() < min_area) {
      throw ParseError(name, line, "degenerate triangle");
    }
    f.row(static_cast<Eigen::Index>(t)) << idx[0], idx[1], idx[2];
  }
  return TriangleMesh(std::move(v), std::move(f));
}

double to_double(const std::string& name, std::size_t line, std::string_view tok) {
  auto value = text::parse_double(tok);
  if (!value) throw ParseError(name, line, "expected a number, got '" + std::string(tok) + "'");
  return *value;
}

long to_long(const std::string& name, std::size_t line, std::string_view tok) {
  auto value = text::parse_long(tok);
  if (!value) throw ParseError(name, line, "expected an integer, got '" + std::string(tok) + "'");
  return *value;
}

}  // namespace

TriangleMesh parse_off(std::istream& in, const std::string& name) {
  text::LineReader reader(in);
  std::vector<std::string_view> tok;

  if (!reader.next(tok)) throw ParseError(name, reader.line(), "empty file");
  std::size_t pos = 0;
  if (tok[0] != "OFF") throw ParseError(name, reader.line(), "missing OFF header");
  ++pos;
  // Counts may share the header line.
  if (pos >= tok.size()) {
    if (!reader.next(tok)) throw ParseError(name, reader.line(), "missing counts line");
    pos = 0;
  }
  if (tok.size() - pos < 2) throw ParseError(name, reader.line(), "malformed counts line");
  const long nv = to_long(name, reader.line(), tok[pos]);
  const long nf = to_long(name, reader.line(), tok[pos + 1]);
  if (nv < 0 || nf < 0) throw ParseError(name, reader.line(), "negative element count");

  std::vector<Eigen::Vector3d> verts;
  verts.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!reader.next(tok)) throw ParseError(name, reader.line(), "unexpected end of file in vertices");
    if (tok.size() < 3) throw ParseError(name, reader.line(), "vertex line needs 3 coordinates");
    verts.emplace_back(to_double(name, reader.line(), tok[0]), to_double(name, reader.line(), tok[1]),
                       to_double(name, reader.line(), tok[2]));
  }

  std::vector<FaceRecord> faces;
  faces.reserve(static_cast<std::size_t>(nf));
  for (long i = 0; i < nf; ++i) {
    if (!reader.next(tok)) throw ParseError(name, reader.line(), "unexpected end of file in faces");
    const long count = to_long(name, reader.line(), tok[0]);
    if (count != 3) throw ParseError(name, reader.line(), "non-triangular face");
    if (tok.size() < 4) throw ParseError(name, reader.line(), "face line needs 3 indices");
    FaceRecord rec{{}, reader.line()};
    for (int c = 0; c < 3; ++c) rec.idx[c] = static_cast<int>(to_long(name, reader.line(), tok[1 + c]));
    faces.push_back(rec);
  }
  return build_checked(name, verts, faces);
}

TriangleMesh parse_obj(std::istream& in, const std::string& name, std::vector<std::string>* warnings) {
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  std::vector<Eigen::Vector3d> verts;
  std::vector<FaceRecord> faces;
  std::set<std::string> ignored;

  while (reader.next(tok)) {
    const std::string_view kind = tok[0];
    if (kind == "v") {
      if (tok.size() < 4) throw ParseError(name, reader.line(), "vertex line needs 3 coordinates");
      verts.emplace_back(to_double(name, reader.line(), tok[1]), to_double(name, reader.line(), tok[2]),
                         to_double(name, reader.line(), tok[3]));
    } else if (kind == "f") {
      if (tok.size() != 4) throw ParseError(name, reader.line(), "non-triangular face");
      FaceRecord rec{{}, reader.line()};
      for (int c = 0; c < 3; ++c) {
        // "i", "i/t", "i//n", "i/t/n": only the position index matters.
        std::string_view s = tok[1 + c];
        s = s.substr(0, s.find('/'));
        const long raw = to_long(name, reader.line(), s);
        if (raw == 0) throw ParseError(name, reader.line(), "vertex index out of range: 0");
        const long idx = raw > 0 ? raw - 1 : static_cast<long>(verts.size()) + raw;
        rec.idx[c] = static_cast<int>(idx);
      }
      faces.push_back(rec);
    } else {
      ignored.emplace(kind);
    }
  }
  if (warnings) {
    for (const auto& k : ignored) warnings->push_back(name + ": ignored OBJ directive '" + k + "'");
  }
  return build_checked(name, verts, faces);
}

MeshFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".obj") return MeshFormat::Obj;
  throw IoError(path.string() + ": unknown mesh extension '" + ext + "' (expected .off or .obj)");
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format,
                       std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path.string());
  return format == MeshFormat::Off ? parse_off(in, path.string())
                                   : parse_obj(in, path.string(), warnings);
}

TriangleMesh load_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return load_mesh(path, format_from_path(path), warnings);
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file: " + path.string());
  const auto& v = mesh.vertices();
  const auto& f = mesh.triangles();
  if (format == MeshFormat::Off) {
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      out << text::format_double(v(i, 0)) << ' ' << text::format_double(v(i, 1)) << ' '
          << text::format_double(v(i, 2)) << '\n';
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      out << "3 " << f(t, 0) << ' ' << f(t, 1) << ' ' << f(t, 2) << '\n';
    }
  } else {
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      out << "v " << text::format_double(v(i, 0)) << ' ' << text::format_double(v(i, 1)) << ' '
          << text::format_double(v(i, 2)) << '\n';
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      out << "f " << f(t, 0) + 1 << ' ' << f(t, 1) + 1 << ' ' << f(t, 2) + 1 << '\n';
    }
  }
  if (!out) throw IoError("failed writing mesh file: " + path.string());
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  save_mesh(mesh, path, format_from_path(path));
}

}  // namespace zoomout
