#include "zoomout/fmap.hpp"

#include <numeric>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "zoomout/error.hpp"
#include "zoomout/kernels.hpp"

namespace zoomout {

namespace {

std::string dims(int r, int c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_sizes(const char* op, int k_M, int k_N, const SpectralBasis& basis_M, const SpectralBasis& basis_N) {
  if (k_M < 1 || k_N < 1 || k_M > basis_M.size() || k_N > basis_N.size()) {
    throw Error(std::string(op) + ": map size " + dims(k_M, k_N) + " exceeds basis sizes " +
                dims(basis_M.size(), basis_N.size()));
  }
}

}  // namespace

PointMap identity_map(int n) {
  PointMap map;
  map.targets.resize(n);
  std::iota(map.targets.begin(), map.targets.end(), 0);
  return map;
}

void validate(const PointMap& map, int n_target) {
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] < 0 || map[i] >= n_target) {
      throw Error("point map entry " + std::to_string(i) + " = " + std::to_string(map[i]) +
                  " outside [0, " + std::to_string(n_target) + ")");
    }
  }
}

FunctionalMap pointmap_to_fmap(const PointMap& map, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                               int k_M, int k_N) {
  check_sizes("pointmap_to_fmap", k_M, k_N, basis_M, basis_N);
  if (static_cast<int>(map.size()) != basis_M.num_vertices()) {
    throw Error("pointmap_to_fmap: map has " + std::to_string(map.size()) + " entries, source has " +
                std::to_string(basis_M.num_vertices()) + " vertices");
  }
  validate(map, basis_N.num_vertices());
  return {kernels::parallel::project_pointmap(basis_M.leading(k_M), basis_M.mass, basis_N.leading(k_N),
                                              map.targets)};
}

PointMap fmap_to_pointmap(const FunctionalMap& fmap, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                          NNMode mode, std::span<const int> source_subset, std::span<const int> target_subset,
                          int approx_width) {
  const int k_M = fmap.rows(), k_N = fmap.cols();
  check_sizes("fmap_to_pointmap", k_M, k_N, basis_M, basis_N);

  RowMatrix sources;
  if (source_subset.empty()) {
    sources = basis_M.leading(k_M);
  } else {
    sources.resize(static_cast<Eigen::Index>(source_subset.size()), k_M);
    for (std::size_t i = 0; i < source_subset.size(); ++i) {
      sources.row(static_cast<Eigen::Index>(i)) = basis_M.phi.row(source_subset[i]).head(k_M);
    }
  }

  // Reference points: rows of Phi_N C^T, i.e. C Phi_N(q)^T for each candidate q.
  RowMatrix references;
  if (target_subset.empty()) {
    references = basis_N.leading(k_N) * fmap.C.transpose();
  } else {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(target_subset.size()), k_N);
    for (std::size_t i = 0; i < target_subset.size(); ++i) {
      rows.row(static_cast<Eigen::Index>(i)) = basis_N.phi.row(target_subset[i]).head(k_N);
    }
    references = rows * fmap.C.transpose();
  }

  const NNIndex index(std::move(references), mode, approx_width);
  const auto hits = index.query_batch(sources);
  PointMap out;
  out.targets.resize(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    out.targets[i] = target_subset.empty() ? hits[i].index : target_subset[hits[i].index];
  }
  return out;
}

double orthogonality_energy(const FunctionalMap& fmap, int k_max) {
  if (k_max < 1 || k_max > std::min(fmap.rows(), fmap.cols())) {
    throw Error("orthogonality_energy: k_max = " + std::to_string(k_max) + " outside [1, " +
                std::to_string(std::min(fmap.rows(), fmap.cols())) + "]");
  }
  const Eigen::MatrixXd& C = fmap.C;
  // Gram matrix of the growing principal block, updated one row/column at a time.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k_max, k_max);
  double energy = 0.0;
  for (int k = 0; k < k_max; ++k) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) gram(i, j) += C(k, i) * C(k, j);
    }
    for (int i = 0; i <= k; ++i) {
      double s = 0.0;
      for (int r = 0; r <= k; ++r) s += C(r, i) * C(r, k);
      gram(i, k) = s;
      gram(k, i) = s;
    }
    double frob = 0.0;
    for (int i = 0; i <= k; ++i) {
      for (int j = 0; j <= k; ++j) {
        const double d = gram(i, j) - (i == j ? 1.0 : 0.0);
        frob += d * d;
      }
    }
    energy += frob / (k + 1);
  }
  return energy;
}

FunctionalMap icp_project(const FunctionalMap& fmap) {
  if (fmap.rows() != fmap.cols()) throw Error("icp_project: map must be square, got " + dims(fmap.rows(), fmap.cols()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fmap.C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU() * svd.matrixV().transpose()};
}

Eigen::VectorXd transfer_function(const FunctionalMap& fmap, const Eigen::VectorXd& f, const SpectralBasis& basis_M,
                                  const SpectralBasis& basis_N) {
  check_sizes("transfer_function", fmap.rows(), fmap.cols(), basis_M, basis_N);
  if (f.size() != basis_N.num_vertices()) {
    throw Error("transfer_function: function has " + std::to_string(f.size()) + " values, target has " +
                std::to_string(basis_N.num_vertices()) + " vertices");
  }
  const Eigen::VectorXd coeff_N = basis_N.leading(fmap.cols()).transpose() * basis_N.mass.cwiseProduct(f);
  return basis_M.leading(fmap.rows()) * (fmap.C * coeff_N);
}

FunctionalMap perturb_fmap(const FunctionalMap& fmap, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("perturb_fmap: sigma must be non-negative");
  FunctionalMap out = fmap;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index c = 0; c < out.C.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.C.rows(); ++r) out.C(r, c) += sigma * gauss(rng);
  }
  return out;
}

FunctionalMap sampled_fmap(std::span<const int> sources, const PointMap& sample_map, const SpectralBasis& basis_M,
                           const SpectralBasis& basis_N, int k_M, int k_N) {
  check_sizes("sampled_fmap", k_M, k_N, basis_M, basis_N);
  if (sources.size() != sample_map.size()) throw Error("sampled_fmap: sample and map lengths differ");
  if (static_cast<int>(sources.size()) < k_M) {
    throw Error("sampled_fmap: " + std::to_string(sources.size()) + " samples cannot determine " +
                std::to_string(k_M) + " rows");
  }
  const auto m = static_cast<Eigen::Index>(sources.size());
  Eigen::MatrixXd X(m, k_M), Y(m, k_N);
  for (Eigen::Index i = 0; i < m; ++i) {
    X.row(i) = basis_M.phi.row(sources[i]).head(k_M);
    Y.row(i) = basis_N.phi.row(sample_map[i]).head(k_N);
  }
  return {X.colPivHouseholderQr().solve(Y)};
}

}  // namespace zoomout
