#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "zoomout/sampling.hpp"
#include "zoomout/spectral.hpp"

namespace zoomout {

/// Functional map C of size k_M x k_N. Direction: C carries functions on N to
/// functions on M (coefficients in Phi_N to coefficients in Phi_M).
struct FunctionalMap {
  Eigen::MatrixXd C;

  int rows() const noexcept { return static_cast<int>(C.rows()); }  // k_M
  int cols() const noexcept { return static_cast<int>(C.cols()); }  // k_N
};

/// Pointwise map T: M -> N, one target vertex per source vertex.
struct PointMap {
  std::vector<int> targets;

  std::size_t size() const noexcept { return targets.size(); }
  bool empty() const noexcept { return targets.empty(); }
  int operator[](std::size_t i) const { return targets[i]; }
  bool operator==(const PointMap&) const = default;
};

PointMap identity_map(int n);

/// Throws unless every target lies in [0, n_target).
void validate(const PointMap& map, int n_target);

/// C = Phi_M^T A_M Pi Phi_N at size k_M x k_N, evaluated by gathering rows
/// of Phi_N (Pi is never formed).
FunctionalMap pointmap_to_fmap(const PointMap& map, const SpectralBasis& basis_M,
                               const SpectralBasis& basis_N, int k_M, int k_N);

/// T(p) = argmin_q |C Phi_N(q)^T - Phi_M(p)^T|, ties to the smallest q.
///
/// With `source_subset` only those source vertices are matched (the result
/// has one entry per subset element); with `target_subset` candidates are
/// restricted to those vertices. Returned targets are always vertex ids of N.
PointMap fmap_to_pointmap(const FunctionalMap& fmap, const SpectralBasis& basis_M,
                          const SpectralBasis& basis_N, NNMode mode = NNMode::Exact,
                          std::span<const int> source_subset = {},
                          std::span<const int> target_subset = {},
                          int approx_width = kDefaultApproxWidth);

/// sum_{k=1..k_max} (1/k) |C_k^T C_k - I_k|_F^2 with C_k the leading k x k block.
double orthogonality_energy(const FunctionalMap& fmap, int k_max);

/// Nearest orthonormal matrix U V^T of a square map.
FunctionalMap icp_project(const FunctionalMap& fmap);

/// g = Phi_M C Phi_N^T A_N f.
Eigen::VectorXd transfer_function(const FunctionalMap& fmap, const Eigen::VectorXd& f,
                                  const SpectralBasis& basis_M, const SpectralBasis& basis_N);

/// C + sigma G with G i.i.d. standard normal drawn from mt19937_64(seed).
FunctionalMap perturb_fmap(const FunctionalMap& fmap, double sigma, std::uint64_t seed);

/// Least-squares map from matched sample rows: argmin_C |Phi_M[S] C - Phi_N[T(S)]|_F.
FunctionalMap sampled_fmap(std::span<const int> sources, const PointMap& sample_map,
                           const SpectralBasis& basis_M, const SpectralBasis& basis_N, int k_M, int k_N);

// Text formats: "k_M k_N" then k_M rows; point maps one 0-based index per line.
void save_fmap(const FunctionalMap& fmap, const std::filesystem::path& path);
FunctionalMap load_fmap(const std::filesystem::path& path);
void save_pointmap(const PointMap& map, const std::filesystem::path& path);
PointMap load_pointmap(const std::filesystem::path& path);

}  // namespace zoomout
