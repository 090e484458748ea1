// Shift-invert block Krylov solver for W x = lambda A x (A diagonal, W PSD).
//
// The Krylov space of (W + s A)^{-1} A is grown block by block with two
// passes of full A-orthogonalization; Rayleigh-Ritz on W inside that space
// yields the smallest eigenpairs; a full space is thick-restarted from the
// leading Ritz vectors. Block vectors make clustered or repeated
// eigenvalues (up to the block size) safe.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "zoomout/error.hpp"
#include "spectral_detail.hpp"

namespace zoomout::detail {

namespace {

constexpr int kBlock = 6;

class KrylovBasis {
 public:
  KrylovBasis(const Eigen::VectorXd& mass, int capacity) : mass_(mass), q_(mass.size(), capacity) {}

  int size() const noexcept { return m_; }
  void clear() noexcept { m_ = 0; }
  auto basis() const { return q_.leftCols(m_); }

  // A-orthogonalize `v` against the current basis and append it. Returns
  // false when v is (numerically) inside the span.
  bool append(Eigen::VectorXd v) {
    const double before = std::sqrt(v.dot(mass_.cwiseProduct(v)));
    if (!(before > 0.0)) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (m_ > 0) {
        const Eigen::VectorXd coeff = q_.leftCols(m_).transpose() * mass_.cwiseProduct(v);
        v.noalias() -= q_.leftCols(m_) * coeff;
      }
    }
    const double after = std::sqrt(v.dot(mass_.cwiseProduct(v)));
    if (after <= 1e-10 * before) return false;
    q_.col(m_++) = v / after;
    return true;
  }

 private:
  const Eigen::VectorXd& mass_;
  Eigen::MatrixXd q_;
  int m_ = 0;
};

}  // namespace

SpectralBasis krylov_spectral_basis(const LaplacianPair& lap, int k, const EigenOptions& opts) {
  const int n = lap.size();
  const SparseMatrix& W = lap.stiffness;
  const Eigen::VectorXd& mass = lap.mass;

  double w_norm = 0.0;  // infinity norm
  for (int c = 0; c < W.outerSize(); ++c) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(W, c); it; ++it) s += std::abs(it.value());
    w_norm = std::max(w_norm, s);
  }
  const double scale = (W.diagonal().array() / mass.array()).maxCoeff();
  const double shift = 1e-6 * scale;

  SparseMatrix shifted = W;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * mass[i];
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) throw Error("spectral_basis: factorization of W + sA failed");

  const int capacity = std::min(n, std::max(3 * k + 4 * kBlock, 2 * k + 60));
  KrylovBasis krylov(mass, capacity);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };

  // Constant vector first: the kernel of W on connected meshes.
  krylov.append(Eigen::VectorXd::Ones(n));
  while (krylov.size() < std::min(kBlock, capacity)) krylov.append(random_vector());

  // Columns whose images under the operator extend the space next.
  std::vector<int> frontier(krylov.size());
  for (int c = 0; c < krylov.size(); ++c) frontier[c] = c;

  int iterations = 0;
  int next_check = std::min(capacity, k + 2 * kBlock);
  const int keep = std::min(capacity - 2 * kBlock, k + std::max(kBlock, k / 2));

  while (true) {
    const int m = krylov.size();
    if (m >= next_check || m == capacity) {
      const auto Q = krylov.basis();
      const Eigen::MatrixXd WQ = W * Q;
      Eigen::MatrixXd H = Q.transpose() * WQ;
      H = 0.5 * (H + H.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(H);
      if (ritz.info() != Eigen::Success) throw Error("spectral_basis: Rayleigh-Ritz step failed");

      const int kk = std::min(k, m);
      Eigen::MatrixXd X = Q * ritz.eigenvectors().leftCols(kk);
      const Eigen::VectorXd theta = ritz.eigenvalues().head(kk);
      const Eigen::MatrixXd R = WQ * ritz.eigenvectors().leftCols(kk) - mass.asDiagonal() * X * theta.asDiagonal();

      std::vector<int> unconverged;
      for (int i = 0; i < kk; ++i) {
        if (!(R.col(i).norm() <= opts.tolerance * w_norm * X.col(i).norm())) unconverged.push_back(i);
      }
      if ((kk == k && unconverged.empty()) || (m == n && kk == k)) {
        SpectralBasis out;
        out.phi = std::move(X);
        out.lambda = theta;
        out.mass = mass;
        normalize_signs(out.phi);
        return out;
      }
      if (iterations >= opts.max_iterations || m == n || keep <= k) {
        throw Error("spectral_basis: Krylov solver did not converge after " + std::to_string(iterations) +
                    " iterations (subspace " + std::to_string(m) + ", k = " + std::to_string(k) + ")");
      }
      if (m == capacity) {
        // Thick restart from the leading Ritz vectors; expansion continues
        // from the ones that have not converged yet.
        const Eigen::MatrixXd kept = Q * ritz.eigenvectors().leftCols(keep);
        krylov.clear();
        for (int c = 0; c < keep; ++c) krylov.append(kept.col(c));
        frontier.clear();
        for (int i : unconverged) {
          if (static_cast<int>(frontier.size()) == kBlock) break;
          if (i < krylov.size()) frontier.push_back(i);
        }
        next_check = std::min(capacity, krylov.size() + 2 * kBlock);
      } else {
        next_check = std::min(capacity, m + std::max(kBlock, m / 4));
      }
    }

    // Expand with the operator applied to the frontier block.
    ++iterations;
    std::vector<int> added;
    for (int c : frontier) {
      if (krylov.size() >= capacity) break;
      Eigen::VectorXd z = factor.solve(mass.cwiseProduct(krylov.basis().col(c)));
      if (krylov.append(std::move(z))) added.push_back(krylov.size() - 1);
    }
    // Invariant subspace reached: continue from fresh directions.
    while (static_cast<int>(added.size()) < kBlock && krylov.size() < capacity) {
      if (krylov.append(random_vector())) added.push_back(krylov.size() - 1);
    }
    frontier = std::move(added);
    if (iterations > opts.max_iterations) {
      throw Error("spectral_basis: Krylov solver did not converge after " + std::to_string(iterations) +
                  " iterations");
    }
  }
}

}  // namespace zoomout::detail
