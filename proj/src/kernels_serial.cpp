#include <cmath>
#include <limits>
#include <queue>

#include "zoomout/kernels.hpp"

namespace zoomout::kernels {

std::vector<double> dijkstra_single(const WeightedGraph& graph, int source) {
  const int n = graph.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : graph.adj[u]) {
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

namespace serial {

Eigen::MatrixXd project_pointmap(const Eigen::Ref<const Eigen::MatrixXd>& phi_m, const Eigen::VectorXd& mass,
                                 const Eigen::Ref<const Eigen::MatrixXd>& phi_n, std::span<const int> targets) {
  const Eigen::Index km = phi_m.cols(), kn = phi_n.cols();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(km, kn);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index r = 0; r < km; ++r) {
      const double w = phi_m(ii, r) * mass[ii];
      for (Eigen::Index c = 0; c < kn; ++c) C(r, c) += w * phi_n(targets[i], c);
    }
  }
  return C;
}

std::vector<Neighbor> nearest_rows(const Eigen::Ref<const RowMatrix>& queries,
                                   const Eigen::Ref<const RowMatrix>& references) {
  const int dim = static_cast<int>(queries.cols());
  std::vector<Neighbor> out(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (Eigen::Index r = 0; r < references.rows(); ++r) {
      const double d = squared_distance(queries.row(q).data(), references.row(r).data(), dim);
      if (d < best) {
        best = d;
        arg = static_cast<int>(r);
      }
    }
    out[q] = {arg, std::sqrt(best)};
  }
  return out;
}

std::vector<Neighbor> query_batch(const NNIndex& index, const Eigen::Ref<const RowMatrix>& queries) {
  std::vector<Neighbor> out(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    out[q] = index.query(std::span<const double>(queries.row(q).data(), queries.cols()));
  }
  return out;
}

std::vector<std::vector<double>> dijkstra(const WeightedGraph& graph, std::span<const int> sources) {
  std::vector<std::vector<double>> out;
  out.reserve(sources.size());
  for (int s : sources) out.push_back(dijkstra_single(graph, s));
  return out;
}

}  // namespace serial
}  // namespace zoomout::kernels
