#include "zoomout/spectral.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "zoomout/error.hpp"
#include "zoomout/text_io.hpp"
#include "spectral_detail.hpp"

namespace zoomout {

LaplacianPair cotan_laplacian(const TriangleMesh& mesh) {
  const int n = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);

  const auto& tris = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int idx[3] = {tris(t, 0), tris(t, 1), tris(t, 2)};
    const Eigen::Vector3d p[3] = {mesh.vertex(idx[0]), mesh.vertex(idx[1]), mesh.vertex(idx[2])};
    const double twice_area = (p[1] - p[0]).cross(p[2] - p[0]).norm();
    for (int c = 0; c < 3; ++c) mass[idx[c]] += twice_area / 6.0;

    // Angle at corner c is opposite edge (c+1, c+2).
    for (int c = 0; c < 3; ++c) {
      const int i = idx[(c + 1) % 3];
      const int j = idx[(c + 2) % 3];
      const Eigen::Vector3d u = p[(c + 1) % 3] - p[c];
      const Eigen::Vector3d v = p[(c + 2) % 3] - p[c];
      const double half_cot = 0.5 * u.dot(v) / twice_area;
      trips.emplace_back(i, j, -half_cot);
      trips.emplace_back(j, i, -half_cot);
      diag[i] += half_cot;
      diag[j] += half_cot;
    }
  }
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, diag[i]);

  LaplacianPair out;
  out.stiffness.resize(n, n);
  out.stiffness.setFromTriplets(trips.begin(), trips.end());
  out.stiffness.makeCompressed();
  out.mass = std::move(mass);
  return out;
}

namespace detail {

void normalize_signs(Eigen::MatrixXd& phi) {
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    auto col = phi.col(c);
    const double cutoff = 1e-6 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col[r]) > cutoff) {
        if (col[r] < 0.0) col = -col;
        break;
      }
    }
  }
}

}  // namespace detail

SpectralBasis dense_spectral_basis(const LaplacianPair& lap, int k) {
  const int n = lap.size();
  if (k < 1 || k > n) {
    throw Error("spectral_basis: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const Eigen::VectorXd inv_sqrt = lap.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * Eigen::MatrixXd(lap.stiffness) * inv_sqrt.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw Error("spectral_basis: dense eigensolver failed");

  SpectralBasis out;
  out.lambda = eig.eigenvalues().head(k);
  out.phi = inv_sqrt.asDiagonal() * eig.eigenvectors().leftCols(k);
  out.mass = lap.mass;
  detail::normalize_signs(out.phi);
  return out;
}

SpectralBasis spectral_basis(const LaplacianPair& lap, int k, const EigenOptions& opts) {
  const int n = lap.size();
  if (k < 1 || k > n) {
    throw Error("spectral_basis: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (n <= opts.dense_threshold) return dense_spectral_basis(lap, k);
  return detail::krylov_spectral_basis(lap, k, opts);
}

Eigen::VectorXd embed(const SpectralBasis& basis, int vertex) {
  if (vertex < 0 || vertex >= basis.num_vertices()) {
    throw Error("embed: vertex " + std::to_string(vertex) + " out of range");
  }
  return basis.phi.row(vertex).transpose();
}

void save_basis(const SpectralBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write basis file: " + path.string());
  out << basis.num_vertices() << ' ' << basis.size() << '\n';
  for (int i = 0; i < basis.size(); ++i) {
    out << (i ? " " : "") << text::format_double(basis.lambda[i]);
  }
  out << '\n';
  for (int r = 0; r < basis.num_vertices(); ++r) {
    for (int c = 0; c < basis.size(); ++c) {
      out << (c ? " " : "") << text::format_double(basis.phi(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing basis file: " + path.string());
}

SpectralBasis load_basis(const std::filesystem::path& path, const Eigen::VectorXd& mass) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open basis file: " + path.string());
  const std::string name = path.string();
  text::LineReader reader(in);
  std::vector<std::string_view> tok;

  auto number = [&](std::string_view s) {
    auto v = text::parse_double(s);
    if (!v) throw ParseError(name, reader.line(), "expected a number, got '" + std::string(s) + "'");
    return *v;
  };

  if (!reader.next(tok) || tok.size() != 2) throw ParseError(name, reader.line(), "expected header 'n k'");
  const auto n = text::parse_long(tok[0]);
  const auto k = text::parse_long(tok[1]);
  if (!n || !k || *n < 1 || *k < 1) throw ParseError(name, reader.line(), "invalid header");
  if (*n != mass.size()) {
    throw IoError(name + ": basis has " + std::to_string(*n) + " rows but mesh has " +
                  std::to_string(mass.size()) + " vertices");
  }

  SpectralBasis out;
  out.mass = mass;
  out.lambda.resize(*k);
  if (!reader.next(tok) || static_cast<long>(tok.size()) != *k) {
    throw ParseError(name, reader.line(), "expected " + std::to_string(*k) + " eigenvalues");
  }
  for (long i = 0; i < *k; ++i) out.lambda[i] = number(tok[i]);

  out.phi.resize(*n, *k);
  for (long r = 0; r < *n; ++r) {
    if (!reader.next(tok) || static_cast<long>(tok.size()) != *k) {
      throw ParseError(name, reader.line(), "expected " + std::to_string(*k) + " values");
    }
    for (long c = 0; c < *k; ++c) out.phi(r, c) = number(tok[c]);
  }
  return out;
}

}  // namespace zoomout
