#pragma once

// Data-parallel inner loops. Every kernel exists twice with identical
// signatures and bitwise-identical results: `serial` is the reference used by
// tests, `parallel` is the OpenMP version the library calls.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "zoomout/sampling.hpp"

namespace zoomout::kernels {

/// Weighted adjacency for graph shortest paths.
struct WeightedGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;

  int size() const noexcept { return static_cast<int>(adj.size()); }
};

namespace serial {

// C(r, c) = sum_i phi_m(i, r) mass(i) phi_n(targets[i], c)
Eigen::MatrixXd project_pointmap(const Eigen::Ref<const Eigen::MatrixXd>& phi_m, const Eigen::VectorXd& mass,
                                 const Eigen::Ref<const Eigen::MatrixXd>& phi_n, std::span<const int> targets);

// Brute-force nearest reference row per query row, smallest index on ties.
std::vector<Neighbor> nearest_rows(const Eigen::Ref<const RowMatrix>& queries,
                                   const Eigen::Ref<const RowMatrix>& references);

std::vector<Neighbor> query_batch(const NNIndex& index, const Eigen::Ref<const RowMatrix>& queries);

// One Dijkstra run per source; unreachable vertices are +inf.
std::vector<std::vector<double>> dijkstra(const WeightedGraph& graph, std::span<const int> sources);

}  // namespace serial

namespace parallel {

Eigen::MatrixXd project_pointmap(const Eigen::Ref<const Eigen::MatrixXd>& phi_m, const Eigen::VectorXd& mass,
                                 const Eigen::Ref<const Eigen::MatrixXd>& phi_n, std::span<const int> targets);
std::vector<Neighbor> nearest_rows(const Eigen::Ref<const RowMatrix>& queries,
                                   const Eigen::Ref<const RowMatrix>& references);
std::vector<Neighbor> query_batch(const NNIndex& index, const Eigen::Ref<const RowMatrix>& queries);
std::vector<std::vector<double>> dijkstra(const WeightedGraph& graph, std::span<const int> sources);

}  // namespace parallel

/// Shortest paths from one source (shared by both variants).
std::vector<double> dijkstra_single(const WeightedGraph& graph, int source);

/// Squared Euclidean distance, summed left to right.
inline double squared_distance(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void set_num_threads(int threads);
int num_threads();

}  // namespace zoomout::kernels
