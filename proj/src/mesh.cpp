#include "zoomout/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Geometry>

#include "zoomout/error.hpp"

namespace zoomout {

namespace {

double area_of(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

TriangleMesh::TriangleMesh(Vertices vertices, Triangles triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int n = num_vertices();
  if (!vertices_.allFinite()) throw Error("mesh has non-finite vertex coordinates");
  const double diag = bounding_box_diagonal();
  const double min_area = 1e-12 * diag * diag;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto tri = triangles_.row(t);
    for (int c = 0; c < 3; ++c) {
      if (tri(c) < 0 || tri(c) >= n) {
        throw Error("triangle " + std::to_string(t) + ": vertex index " +
                    std::to_string(tri(c)) + " out of range [0, " + std::to_string(n) + ")");
      }
    }
    if (tri(0) == tri(1) || tri(1) == tri(2) || tri(0) == tri(2)) {
      throw Error("triangle " + std::to_string(t) + ": repeated vertex in triangle");
    }
    if (triangle_area(t) < min_area) {
      throw Error("triangle " + std::to_string(t) + ": degenerate triangle");
    }
  }
}

double TriangleMesh::triangle_area(int t) const {
  const auto tri = triangles_.row(t);
  return area_of(vertex(tri(0)), vertex(tri(1)), vertex(tri(2)));
}

double TriangleMesh::bounding_box_diagonal() const {
  if (vertices_.rows() == 0) return 0.0;
  const Eigen::RowVector3d lo = vertices_.colwise().minCoeff();
  const Eigen::RowVector3d hi = vertices_.colwise().maxCoeff();
  return (hi - lo).norm();
}

EdgeSet edge_set(const TriangleMesh& mesh) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(3 * static_cast<std::size_t>(mesh.num_triangles()));
  const auto& tris = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      int a = tris(t, c);
      int b = tris(t, (c + 1) % 3);
      if (a > b) std::swap(a, b);
      pairs.emplace_back(a, b);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  EdgeSet out;
  out.edges.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    out.edges.push_back({a, b, (mesh.vertex(a) - mesh.vertex(b)).norm()});
  }
  return out;
}

double total_area(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) sum += mesh.triangle_area(t);
  return sum;
}

TriangleMesh rescale_to_area(const TriangleMesh& mesh, double target_area) {
  if (!(target_area > 0.0)) throw Error("rescale_to_area: target area must be positive");
  const double current = total_area(mesh);
  if (current == target_area) return mesh;
  const double s = std::sqrt(target_area / current);
  return TriangleMesh(mesh.vertices() * s, mesh.triangles());
}

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Eigen::Vector3d& translation) {
  Vertices v = (mesh.vertices() * rotation.transpose()).rowwise() + translation.transpose();
  return TriangleMesh(std::move(v), mesh.triangles());
}

std::vector<std::vector<int>> vertex_adjacency(const TriangleMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.num_vertices());
  for (const Edge& e : edge_set(mesh).edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

int euler_characteristic(const TriangleMesh& mesh) {
  return mesh.num_vertices() - static_cast<int>(edge_set(mesh).size()) + mesh.num_triangles();
}

}  // namespace zoomout
