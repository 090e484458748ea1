#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace zoomout {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Indexed triangle mesh. Immutable once constructed; the constructor rejects
/// out-of-range indices, triangles with a repeated vertex and triangles whose
/// area is below 1e-12 times the squared bounding-box diagonal.
///
/// Neither closedness nor manifoldness is required.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(Vertices vertices, Triangles triangles);

  const Vertices& vertices() const noexcept { return vertices_; }
  const Triangles& triangles() const noexcept { return triangles_; }

  int num_vertices() const noexcept { return static_cast<int>(vertices_.rows()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.rows()); }

  Eigen::Vector3d vertex(int i) const { return vertices_.row(i).transpose(); }
  double triangle_area(int t) const;
  double bounding_box_diagonal() const;

 private:
  Vertices vertices_;
  Triangles triangles_;
};

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  double length = 0.0;
};

/// Each undirected edge of a triangulation exactly once, sorted by (a, b).
struct EdgeSet {
  std::vector<Edge> edges;

  std::size_t size() const noexcept { return edges.size(); }
};

EdgeSet edge_set(const TriangleMesh& mesh);

double total_area(const TriangleMesh& mesh);

/// Uniformly scaled copy (about the origin) whose total area is `target_area`.
TriangleMesh rescale_to_area(const TriangleMesh& mesh, double target_area);

/// Rigid motion x -> R x + t.
TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Eigen::Vector3d& translation);

/// Vertex-adjacency lists derived from the triangles (sorted, no duplicates).
std::vector<std::vector<int>> vertex_adjacency(const TriangleMesh& mesh);

/// V - E + F.
int euler_characteristic(const TriangleMesh& mesh);

// ---- I/O -------------------------------------------------------------------

enum class MeshFormat { Off, Obj };

/// Deduce the format from the file extension (.off / .obj, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);

/// Load a triangle mesh. OBJ face indices are 1-based in the file (negative
/// relative indices are accepted) and converted to 0-based. Unsupported OBJ
/// directives are skipped; one message per directive kind is appended to
/// `warnings` when provided.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format,
                       std::vector<std::string>* warnings = nullptr);
TriangleMesh load_mesh(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

TriangleMesh parse_off(std::istream& in, const std::string& name);
TriangleMesh parse_obj(std::istream& in, const std::string& name,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace zoomout
