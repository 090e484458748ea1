#pragma once

#include <filesystem>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "zoomout/mesh.hpp"

namespace zoomout {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Cotangent stiffness W (positive semi-definite sign) and lumped mass A.
/// The Laplace-Beltrami operator is A^{-1} W.
struct LaplacianPair {
  SparseMatrix stiffness;  // W
  Eigen::VectorXd mass;    // diag(A)

  int size() const noexcept { return static_cast<int>(mass.size()); }
};

/// W_ij = -(cot a + cot b) / 2 over the angles opposite edge ij (a single
/// angle on boundary edges), W_ii = -sum_j W_ij. A_ii = one third of the area
/// of every incident triangle.
LaplacianPair cotan_laplacian(const TriangleMesh& mesh);

/// First k solutions of W phi = lambda A phi.
struct SpectralBasis {
  Eigen::MatrixXd phi;     // n x k, columns A-orthonormal
  Eigen::VectorXd lambda;  // ascending
  Eigen::VectorXd mass;    // diag(A), shared with the Laplacian

  int num_vertices() const noexcept { return static_cast<int>(phi.rows()); }
  int size() const noexcept { return static_cast<int>(phi.cols()); }

  /// Leading `k` basis functions.
  auto leading(int k) const { return phi.leftCols(k); }
};

struct EigenOptions {
  double tolerance = 1e-10;      // relative residual, see spectral_basis()
  int max_iterations = 1000;     // operator applications per vector block
  int dense_threshold = 1000;    // n <= this: dense solver
  unsigned long long seed = 0;   // start block for the Krylov solver
};

/// Smallest `k` generalized eigenpairs, ascending. Each column is
/// A-normalized and signed so that its first entry exceeding 1e-6 of the
/// column's max magnitude is positive.
///
/// Meshes with more than `dense_threshold` vertices use a shift-invert block
/// Krylov method with full reorthogonalization; convergence means
/// |W phi - lambda A phi| <= tolerance * |W|_inf * |phi| for all k
/// pairs. Throws zoomout::Error on non-convergence or k outside [1, n].
SpectralBasis spectral_basis(const LaplacianPair& lap, int k, const EigenOptions& opts = {});

/// Dense reference solver (used directly for small meshes).
SpectralBasis dense_spectral_basis(const LaplacianPair& lap, int k);

/// Row `vertex` of Phi.
Eigen::VectorXd embed(const SpectralBasis& basis, int vertex);

/// Text cache: "n k", the eigenvalues on one line, then n rows of k values.
/// The mass diagonal is not stored; pass it back in from the mesh.
void save_basis(const SpectralBasis& basis, const std::filesystem::path& path);
SpectralBasis load_basis(const std::filesystem::path& path, const Eigen::VectorXd& mass);

}  // namespace zoomout
