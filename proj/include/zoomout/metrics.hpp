#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "zoomout/fmap.hpp"
#include "zoomout/mesh.hpp"
#include "zoomout/spectral.hpp"

namespace zoomout {

/// Edge-graph shortest-path distances from a set of source vertices.
class GeodesicTable {
 public:
  GeodesicTable() = default;
  GeodesicTable(std::vector<int> sources, std::vector<std::vector<double>> distances, int n);

  const std::vector<int>& sources() const noexcept { return sources_; }
  int num_vertices() const noexcept { return n_; }
  bool has_source(int v) const { return v >= 0 && v < n_ && row_of_[v] >= 0; }
  const std::vector<double>& row(int source) const;

  /// d(a, b) when either endpoint is a source (graph distances are symmetric).
  double distance(int a, int b) const;

  /// True if some vertex is unreachable from some source.
  bool has_unreachable() const noexcept { return unreachable_; }

 private:
  std::vector<int> sources_;
  std::vector<int> row_of_;
  std::vector<std::vector<double>> distances_;
  int n_ = 0;
  bool unreachable_ = false;
};

GeodesicTable dijkstra_geodesics(const TriangleMesh& mesh, const EdgeSet& edges, std::span<const int> sources);
GeodesicTable all_pairs_geodesics(const TriangleMesh& mesh);

/// Default error normalizer: sqrt of the target's total area.
double area_normalizer(const TriangleMesh& mesh_N);

/// mean_p d_N(T(p), T_gt(p)) / normalizer
double accuracy(const PointMap& map, const PointMap& gt, const GeodesicTable& geo_N, double normalizer);

/// Per-vertex errors behind accuracy(), unnormalized.
std::vector<double> accuracy_per_vertex(const PointMap& map, const PointMap& gt, const GeodesicTable& geo_N);

/// Percentage of target vertices outside the image of the map.
double uncoverage(const PointMap& map, int n_N);
double uncoverage(const PointMap& map, const TriangleMesh& mesh_N);

/// Area-weighted variant: percentage of target lumped area outside the image.
double uncoverage_area(const PointMap& map, const Eigen::VectorXd& mass_N);

/// mean_p d_M(T_NM(T_MN(p)), p) / normalizer
double bijectivity(const PointMap& map_MN, const PointMap& map_NM, const GeodesicTable& geo_M, double normalizer);

/// mean over edges (i, j) of M of (d_N(T(i), T(j)) / |ij| - 1)^2
double edge_distortion(const PointMap& map, const EdgeSet& edges_M, const GeodesicTable& geo_N);

/// Mean over x, y, z of f^T W_M f where f is the target coordinate
/// (divided by sqrt(area_N)) pulled back through the map.
double dirichlet_energy(const PointMap& map, const LaplacianPair& lap_M, const TriangleMesh& mesh_N);

struct MapReport {
  std::optional<double> accuracy_mean;
  std::optional<double> uncoverage_percent;
  std::optional<double> bijectivity_mean;
  std::optional<double> edge_distortion_mean;
  std::optional<double> dirichlet;
};

/// Keys: accuracy_mean, uncoverage_percent, bijectivity_mean,
/// edge_distortion_mean, dirichlet (null when not computed).
nlohmann::json to_json(const MapReport& report);

}  // namespace zoomout
