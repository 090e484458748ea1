#pragma once

// Independent reference computations. Everything here is written from the
// definitions with plain loops or dense linear algebra and shares no code
// path with the library beyond the mesh container.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "zoomout/fmap.hpp"
#include "zoomout/mesh.hpp"

namespace oracle {

using zoomout::PointMap;
using zoomout::TriangleMesh;

struct DenseLaplacian {
  Eigen::MatrixXd W;
  Eigen::VectorXd A;
};

// Per-triangle assembly: each corner's cotangent weights the opposite edge.
inline DenseLaplacian cotan(const TriangleMesh& mesh) {
  const int n = mesh.num_vertices();
  DenseLaplacian out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int v[3] = {mesh.triangles()(t, 0), mesh.triangles()(t, 1), mesh.triangles()(t, 2)};
    const Eigen::Vector3d p[3] = {mesh.vertex(v[0]), mesh.vertex(v[1]), mesh.vertex(v[2])};
    const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    for (int c = 0; c < 3; ++c) {
      const int i = v[(c + 1) % 3], j = v[(c + 2) % 3];
      const Eigen::Vector3d a = p[(c + 1) % 3] - p[c];
      const Eigen::Vector3d b = p[(c + 2) % 3] - p[c];
      const double cot = a.dot(b) / a.cross(b).norm();
      out.W(i, j) -= 0.5 * cot;
      out.W(j, i) -= 0.5 * cot;
      out.W(i, i) += 0.5 * cot;
      out.W(j, j) += 0.5 * cot;
      out.A[v[c]] += area / 3.0;
    }
  }
  return out;
}

struct DenseEigen {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd phi;
};

// Generalized symmetric-definite solver on W x = lambda A x.
inline DenseEigen generalized_eigen(const DenseLaplacian& lap, int k) {
  const Eigen::MatrixXd A = lap.A.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap.W, A);
  return {es.eigenvalues().head(k), es.eigenvectors().leftCols(k)};
}

inline Eigen::MatrixXd permutation_matrix(const PointMap& map, int n_N) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(map.size()), n_N);
  for (std::size_t i = 0; i < map.size(); ++i) P(static_cast<Eigen::Index>(i), map[i]) = 1.0;
  return P;
}

// argmin_C |A^{1/2} (Phi_M C - Pi Phi_N)|_F via Householder QR.
inline Eigen::MatrixXd weighted_pinv_fmap(const PointMap& map, const Eigen::MatrixXd& phi_M, const Eigen::VectorXd& mass_M,
                                          const Eigen::MatrixXd& phi_N) {
  const Eigen::VectorXd w = mass_M.cwiseSqrt();
  const Eigen::MatrixXd lhs = w.asDiagonal() * phi_M;
  const Eigen::MatrixXd rhs = w.asDiagonal() * (permutation_matrix(map, static_cast<int>(phi_N.rows())) * phi_N);
  return lhs.householderQr().solve(rhs);
}

// Plain Moore-Penrose pseudo-inverse, explicit Pi.
inline Eigen::MatrixXd pinv_fmap(const PointMap& map, const Eigen::MatrixXd& phi_M, const Eigen::MatrixXd& phi_N) {
  const Eigen::MatrixXd pinv = phi_M.completeOrthogonalDecomposition().pseudoInverse();
  return pinv * permutation_matrix(map, static_cast<int>(phi_N.rows())) * phi_N;
}

// For every source row p: argmin_q |C phi_N(q) - phi_M(p)|, smallest q on ties.
inline PointMap brute_pointmap(const Eigen::MatrixXd& C, const Eigen::MatrixXd& phi_M, const Eigen::MatrixXd& phi_N) {
  const auto kM = C.rows(), kN = C.cols();
  std::vector<Eigen::VectorXd> emb(static_cast<std::size_t>(phi_N.rows()));
  for (Eigen::Index q = 0; q < phi_N.rows(); ++q) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(kM);
    for (Eigen::Index r = 0; r < kM; ++r) {
      for (Eigen::Index c = 0; c < kN; ++c) e[r] += C(r, c) * phi_N(q, c);
    }
    emb[static_cast<std::size_t>(q)] = e;
  }
  PointMap out;
  out.targets.resize(static_cast<std::size_t>(phi_M.rows()));
  for (Eigen::Index p = 0; p < phi_M.rows(); ++p) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (Eigen::Index q = 0; q < phi_N.rows(); ++q) {
      double d = 0.0;
      for (Eigen::Index r = 0; r < kM; ++r) {
        const double x = emb[static_cast<std::size_t>(q)][r] - phi_M(p, r);
        d += x * x;
      }
      if (d < best) {
        best = d;
        arg = static_cast<int>(q);
      }
    }
    out.targets[static_cast<std::size_t>(p)] = arg;
  }
  return out;
}

// Linear scan over rows, smallest index on ties.
inline int scan_nearest(const Eigen::MatrixXd& points, const Eigen::VectorXd& q) {
  double best = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double d = 0.0;
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      const double x = points(i, c) - q[c];
      d += x * x;
    }
    if (d < best) {
      best = d;
      arg = static_cast<int>(i);
    }
  }
  return arg;
}

inline double orthogonality_energy(const Eigen::MatrixXd& C, int k_max) {
  double e = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    const Eigen::MatrixXd Ck = C.topLeftCorner(k, k);
    e += (Ck.transpose() * Ck - Eigen::MatrixXd::Identity(k, k)).squaredNorm() / k;
  }
  return e;
}

// All-pairs edge-graph distances.
inline Eigen::MatrixXd floyd_warshall(const TriangleMesh& mesh) {
  const int n = mesh.num_vertices();
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd D = Eigen::MatrixXd::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) D(i, i) = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles()(t, c), b = mesh.triangles()(t, (c + 1) % 3);
      const double len = (mesh.vertex(a) - mesh.vertex(b)).norm();
      D(a, b) = std::min(D(a, b), len);
      D(b, a) = std::min(D(b, a), len);
    }
  }
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) D(i, j) = std::min(D(i, j), D(i, m) + D(m, j));
    }
  }
  return D;
}

inline double area(const TriangleMesh& mesh) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector3d a = mesh.vertex(mesh.triangles()(t, 0));
    const Eigen::Vector3d b = mesh.vertex(mesh.triangles()(t, 1));
    const Eigen::Vector3d c = mesh.vertex(mesh.triangles()(t, 2));
    s += 0.5 * (b - a).cross(c - a).norm();
  }
  return s;
}

inline double accuracy(const PointMap& T, const PointMap& gt, const Eigen::MatrixXd& D_N, double normalizer) {
  double s = 0.0;
  for (std::size_t p = 0; p < T.size(); ++p) s += D_N(T[p], gt[p]);
  return s / (static_cast<double>(T.size()) * normalizer);
}

inline double uncoverage(const PointMap& T, int n_N) {
  std::set<int> image(T.targets.begin(), T.targets.end());
  int missing = 0;
  for (int v = 0; v < n_N; ++v) missing += image.count(v) == 0;
  return 100.0 * missing / n_N;
}

inline double bijectivity(const PointMap& T_MN, const PointMap& T_NM, const Eigen::MatrixXd& D_M, double normalizer) {
  double s = 0.0;
  for (std::size_t p = 0; p < T_MN.size(); ++p) s += D_M(static_cast<Eigen::Index>(p), T_NM[T_MN[p]]);
  return s / (static_cast<double>(T_MN.size()) * normalizer);
}

inline double edge_distortion(const PointMap& T, const TriangleMesh& mesh_M, const Eigen::MatrixXd& D_N) {
  std::set<std::pair<int, int>> edges;
  for (int t = 0; t < mesh_M.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh_M.triangles()(t, c), b = mesh_M.triangles()(t, (c + 1) % 3);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  double s = 0.0;
  for (auto [a, b] : edges) {
    const double r = D_N(T[a], T[b]) / (mesh_M.vertex(a) - mesh_M.vertex(b)).norm() - 1.0;
    s += r * r;
  }
  return s / static_cast<double>(edges.size());
}

inline double dirichlet(const PointMap& T, const Eigen::MatrixXd& W_M, const TriangleMesh& mesh_N) {
  const double scale = 1.0 / std::sqrt(area(mesh_N));
  double s = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(T.size()));
    for (std::size_t i = 0; i < T.size(); ++i) f[static_cast<Eigen::Index>(i)] = mesh_N.vertices()(T[i], axis) * scale;
    s += f.dot(W_M * f);
  }
  return s / 3.0;
}

inline PointMap random_map(int n_M, int n_N, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, n_N - 1);
  PointMap T;
  T.targets.resize(static_cast<std::size_t>(n_M));
  for (int& t : T.targets) t = pick(rng);
  return T;
}

inline PointMap random_permutation(int n, std::mt19937_64& rng) {
  PointMap T;
  T.targets.resize(static_cast<std::size_t>(n));
  std::iota(T.targets.begin(), T.targets.end(), 0);
  std::shuffle(T.targets.begin(), T.targets.end(), rng);
  return T;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

// rows x cols grid of unit squares split into triangles, with seeded jitter.
inline TriangleMesh grid_strip(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  zoomout::Vertices V((rows + 1) * (cols + 1), 3);
  for (int r = 0; r <= rows; ++r) {
    for (int c = 0; c <= cols; ++c) V.row(r * (cols + 1) + c) << c + jitter(rng), r + jitter(rng), 0.3 * jitter(rng);
  }
  zoomout::Triangles F(2 * rows * cols, 3);
  int t = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int a = r * (cols + 1) + c, b = a + 1, d = a + cols + 1, e = d + 1;
      F.row(t++) << a, b, e;
      F.row(t++) << a, e, d;
    }
  }
  return TriangleMesh(std::move(V), std::move(F));
}

}  // namespace oracle
