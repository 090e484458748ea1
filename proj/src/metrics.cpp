#include "zoomout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zoomout/error.hpp"
#include "zoomout/kernels.hpp"

namespace zoomout {

GeodesicTable::GeodesicTable(std::vector<int> sources, std::vector<std::vector<double>> distances, int n)
    : sources_(std::move(sources)), row_of_(n, -1), distances_(std::move(distances)), n_(n) {
  for (std::size_t i = 0; i < sources_.size(); ++i) row_of_[sources_[i]] = static_cast<int>(i);
  for (const auto& row : distances_) {
    for (double d : row) {
      if (std::isinf(d)) unreachable_ = true;
    }
  }
}

const std::vector<double>& GeodesicTable::row(int source) const {
  if (!has_source(source)) throw Error("geodesic table has no row for vertex " + std::to_string(source));
  return distances_[row_of_[source]];
}

double GeodesicTable::distance(int a, int b) const {
  // Read from the smaller source when both qualify, so lookups are exactly symmetric.
  if (has_source(a) && (a <= b || !has_source(b))) return distances_[row_of_[a]].at(b);
  if (has_source(b)) return distances_[row_of_[b]].at(a);
  throw Error("geodesic table has neither " + std::to_string(a) + " nor " + std::to_string(b) + " as a source");
}

GeodesicTable dijkstra_geodesics(const TriangleMesh& mesh, const EdgeSet& edges, std::span<const int> sources) {
  const int n = mesh.num_vertices();
  kernels::WeightedGraph graph;
  graph.adj.resize(n);
  for (const Edge& e : edges.edges) {
    graph.adj[e.a].emplace_back(e.b, e.length);
    graph.adj[e.b].emplace_back(e.a, e.length);
  }
  std::vector<int> unique(sources.begin(), sources.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  for (int s : unique) {
    if (s < 0 || s >= n) throw Error("dijkstra_geodesics: source " + std::to_string(s) + " out of range");
  }
  auto dist = kernels::parallel::dijkstra(graph, unique);
  return GeodesicTable(std::move(unique), std::move(dist), n);
}

GeodesicTable all_pairs_geodesics(const TriangleMesh& mesh) {
  std::vector<int> all(mesh.num_vertices());
  std::iota(all.begin(), all.end(), 0);
  return dijkstra_geodesics(mesh, edge_set(mesh), all);
}

double area_normalizer(const TriangleMesh& mesh_N) { return std::sqrt(total_area(mesh_N)); }

std::vector<double> accuracy_per_vertex(const PointMap& map, const PointMap& gt, const GeodesicTable& geo_N) {
  if (map.size() != gt.size()) {
    throw Error("accuracy: map has " + std::to_string(map.size()) + " entries, ground truth has " +
                std::to_string(gt.size()));
  }
  std::vector<double> err(map.size());
  for (std::size_t p = 0; p < map.size(); ++p) err[p] = geo_N.distance(gt[p], map[p]);
  return err;
}

double accuracy(const PointMap& map, const PointMap& gt, const GeodesicTable& geo_N, double normalizer) {
  if (!(normalizer > 0.0)) throw Error("accuracy: normalizer must be positive");
  const auto err = accuracy_per_vertex(map, gt, geo_N);
  if (err.empty()) return 0.0;
  return std::accumulate(err.begin(), err.end(), 0.0) / (static_cast<double>(err.size()) * normalizer);
}

double uncoverage(const PointMap& map, int n_N) {
  validate(map, n_N);
  std::vector<char> hit(n_N, 0);
  for (int t : map.targets) hit[t] = 1;
  const auto covered = std::count(hit.begin(), hit.end(), 1);
  return 100.0 * static_cast<double>(n_N - covered) / n_N;
}

double uncoverage(const PointMap& map, const TriangleMesh& mesh_N) { return uncoverage(map, mesh_N.num_vertices()); }

double uncoverage_area(const PointMap& map, const Eigen::VectorXd& mass_N) {
  const int n_N = static_cast<int>(mass_N.size());
  validate(map, n_N);
  std::vector<char> hit(n_N, 0);
  for (int t : map.targets) hit[t] = 1;
  double missed = 0.0;
  for (int v = 0; v < n_N; ++v) {
    if (!hit[v]) missed += mass_N[v];
  }
  return 100.0 * missed / mass_N.sum();
}

double bijectivity(const PointMap& map_MN, const PointMap& map_NM, const GeodesicTable& geo_M, double normalizer) {
  if (!(normalizer > 0.0)) throw Error("bijectivity: normalizer must be positive");
  validate(map_MN, static_cast<int>(map_NM.size()));
  validate(map_NM, static_cast<int>(map_MN.size()));
  if (map_MN.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t p = 0; p < map_MN.size(); ++p) {
    sum += geo_M.distance(static_cast<int>(p), map_NM[map_MN[p]]);
  }
  return sum / (static_cast<double>(map_MN.size()) * normalizer);
}

double edge_distortion(const PointMap& map, const EdgeSet& edges_M, const GeodesicTable& geo_N) {
  if (edges_M.edges.empty()) return 0.0;
  double sum = 0.0;
  for (const Edge& e : edges_M.edges) {
    const double mapped = geo_N.distance(map[e.a], map[e.b]);
    const double ratio = mapped / e.length - 1.0;
    sum += ratio * ratio;
  }
  return sum / static_cast<double>(edges_M.size());
}

double dirichlet_energy(const PointMap& map, const LaplacianPair& lap_M, const TriangleMesh& mesh_N) {
  if (static_cast<int>(map.size()) != lap_M.size()) throw Error("dirichlet_energy: map length does not match source");
  validate(map, mesh_N.num_vertices());
  const double scale = 1.0 / std::sqrt(total_area(mesh_N));
  Eigen::MatrixXd P(lap_M.size(), 3);
  for (int i = 0; i < lap_M.size(); ++i) P.row(i) = mesh_N.vertices().row(map[i]) * scale;
  return (P.transpose() * (lap_M.stiffness * P)).trace() / 3.0;
}

nlohmann::json to_json(const MapReport& report) {
  auto value = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"accuracy_mean", value(report.accuracy_mean)},
          {"uncoverage_percent", value(report.uncoverage_percent)},
          {"bijectivity_mean", value(report.bijectivity_mean)},
          {"edge_distortion_mean", value(report.edge_distortion_mean)},
          {"dirichlet", value(report.dirichlet)}};
}

}  // namespace zoomout
