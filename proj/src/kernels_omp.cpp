#include <cmath>
#include <limits>

#include <omp.h>

#include "zoomout/kernels.hpp"

namespace zoomout::kernels {

void set_num_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int num_threads() { return omp_get_max_threads(); }

namespace parallel {

// Rows of C are independent; each keeps the serial summation order over i.
Eigen::MatrixXd project_pointmap(const Eigen::Ref<const Eigen::MatrixXd>& phi_m, const Eigen::VectorXd& mass,
                                 const Eigen::Ref<const Eigen::MatrixXd>& phi_n, std::span<const int> targets) {
  const Eigen::Index km = phi_m.cols(), kn = phi_n.cols();
  const auto n = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(km, kn);
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < km; ++r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = phi_m(i, r) * mass[i];
      const int t = targets[static_cast<std::size_t>(i)];
      for (Eigen::Index c = 0; c < kn; ++c) C(r, c) += w * phi_n(t, c);
    }
  }
  return C;
}

std::vector<Neighbor> nearest_rows(const Eigen::Ref<const RowMatrix>& queries,
                                   const Eigen::Ref<const RowMatrix>& references) {
  const int dim = static_cast<int>(queries.cols());
  const Eigen::Index nq = queries.rows(), nr = references.rows();
  std::vector<Neighbor> out(nq);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index q = 0; q < nq; ++q) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (Eigen::Index r = 0; r < nr; ++r) {
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
  const Eigen::Index nq = queries.rows();
  std::vector<Neighbor> out(nq);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index q = 0; q < nq; ++q) {
    out[q] = index.query(std::span<const double>(queries.row(q).data(), queries.cols()));
  }
  return out;
}

std::vector<std::vector<double>> dijkstra(const WeightedGraph& graph, std::span<const int> sources) {
  const auto ns = static_cast<std::ptrdiff_t>(sources.size());
  std::vector<std::vector<double>> out(sources.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t s = 0; s < ns; ++s) out[s] = dijkstra_single(graph, sources[s]);
  return out;
}

}  // namespace parallel
}  // namespace zoomout::kernels
