#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>
#include <Eigen/Dense>

#include "oracles.hpp"
#include "zoomout/error.hpp"
#include "zoomout/fmap.hpp"
#include "zoomout/testbed.hpp"

using namespace zoomout;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

const PreparedPair& perm_pair() {
  static const PreparedPair pp = prepare_pair(make_permutation_pair(make_asymmetric_blob(642, 21), 5), 30);
  return pp;
}

const SpectralBasis& small_basis() {
  static const SpectralBasis b = spectral_basis(cotan_laplacian(make_asymmetric_blob(162, 22)), 30);
  return b;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("zoomout_test_" + name);
}

}  // namespace

TEST_SUITE("fmap") {
  TEST_CASE("identity map gives the identity matrix") {
    const SpectralBasis& b = small_basis();
    const FunctionalMap C = pointmap_to_fmap(identity_map(b.num_vertices()), b, b, 20, 20);
    CHECK(max_abs(C.C - Eigen::MatrixXd::Identity(20, 20)) <= 1e-8);
    CHECK(fmap_to_pointmap({Eigen::MatrixXd::Identity(30, 30)}, b, b) == identity_map(b.num_vertices()));
  }

  TEST_CASE("permutation pair gives a signed diagonal") {
    const PreparedPair& pp = perm_pair();
    const FunctionalMap C = pp.gt_fmap(20);
    const Eigen::MatrixXd off = C.C - Eigen::MatrixXd(C.C.diagonal().asDiagonal());
    CHECK(max_abs(off) <= 1e-6);
    CHECK(max_abs(C.C.diagonal().cwiseAbs().array() - 1.0) <= 1e-6);
  }

  TEST_CASE("conversion matches the weighted least-squares oracle") {
    std::mt19937_64 rng(31);
    const SpectralBasis& b = small_basis();
    for (int trial = 0; trial < 20; ++trial) {
      const int kM = 3 + trial, kN = 30 - trial;
      const PointMap T = oracle::random_map(b.num_vertices(), b.num_vertices(), rng);
      const FunctionalMap C = pointmap_to_fmap(T, b, b, kM, kN);
      const Eigen::MatrixXd ref = oracle::weighted_pinv_fmap(T, b.phi.leftCols(kM), b.mass, b.phi.leftCols(kN));
      CHECK(max_abs(C.C - ref) <= 1e-10);
    }
  }

  TEST_CASE("conversion matches the plain pseudo-inverse on a full basis") {
    std::mt19937_64 rng(32);
    const LaplacianPair lap = cotan_laplacian(make_icosphere(1));
    const int n = lap.size();
    const SpectralBasis b = spectral_basis(lap, n);
    for (int trial = 0; trial < 10; ++trial) {
      const PointMap T = oracle::random_map(n, n, rng);
      const FunctionalMap C = pointmap_to_fmap(T, b, b, n, n);
      CHECK(max_abs(C.C - oracle::pinv_fmap(T, b.phi, b.phi)) <= 1e-10);
    }
  }

  TEST_CASE("point map recovery matches a brute-force scan") {
    std::mt19937_64 rng(33);
    const SpectralBasis& b = small_basis();
    for (int trial = 0; trial < 20; ++trial) {
      const int kM = 2 + trial, kN = 2 + (trial * 7) % 28;
      const Eigen::MatrixXd C = random_matrix(kM, kN, rng);
      const PointMap T = fmap_to_pointmap({C}, b, b);
      CHECK(T == oracle::brute_pointmap(C, b.phi.leftCols(kM), b.phi.leftCols(kN)));
    }
  }

  TEST_CASE("subset recovery") {
    std::mt19937_64 rng(34);
    const SpectralBasis& b = small_basis();
    const Eigen::MatrixXd C = random_matrix(10, 12, rng);
    const std::vector<int> src = {5, 0, 77, 161, 3};
    const std::vector<int> tgt = {9, 1, 40, 100, 120, 160};
    const PointMap full = fmap_to_pointmap({C}, b, b);
    const PointMap sub = fmap_to_pointmap({C}, b, b, NNMode::Exact, src);
    REQUIRE(sub.size() == src.size());
    for (std::size_t i = 0; i < src.size(); ++i) CHECK(sub[i] == full[src[i]]);

    const PointMap restricted = fmap_to_pointmap({C}, b, b, NNMode::Exact, {}, tgt);
    Eigen::MatrixXd phi_t(tgt.size(), 12);
    for (std::size_t j = 0; j < tgt.size(); ++j) phi_t.row(j) = b.phi.row(tgt[j]).head(12);
    const PointMap ref = oracle::brute_pointmap(C, b.phi.leftCols(10), phi_t);
    for (std::size_t i = 0; i < restricted.size(); ++i) CHECK(restricted[i] == tgt[ref[i]]);
  }

  TEST_CASE("ground-truth map recovers the permutation at k = 20") {
    const PreparedPair& pp = perm_pair();
    const PointMap T = fmap_to_pointmap(pp.gt_fmap(20), pp.basis_M, pp.basis_N);
    CHECK(recovered_fraction(T, pp.pair.gt_map) >= 0.99);
  }

  TEST_CASE("orthogonality energy") {
    CHECK(orthogonality_energy({Eigen::MatrixXd::Identity(8, 8)}, 8) == 0.0);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 1;
    CHECK(orthogonality_energy({d}, 2) == doctest::Approx(13.5).epsilon(1e-15));
    CHECK(orthogonality_energy(perm_pair().gt_fmap(20), 20) <= 1e-4);

    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd C = random_matrix(15, 15, rng, 0.3);
      double prev = 0.0;
      for (int k = 1; k <= 15; ++k) {
        const double e = orthogonality_energy({C}, k);
        CHECK(oracle::rel_diff(e, oracle::orthogonality_energy(C, k)) <= 1e-12);
        CHECK(e >= prev);
        prev = e;
      }
    }
    CHECK_THROWS_AS(orthogonality_energy({d}, 3), Error);
  }

  TEST_CASE("nearest orthonormal projection") {
    std::mt19937_64 rng(36);
    const Eigen::MatrixXd Q = random_matrix(12, 12, rng).householderQr().householderQ();
    CHECK(max_abs(icp_project({Q}).C - Q) <= 1e-10);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 0.5;
    CHECK(max_abs(icp_project({d}).C - Eigen::MatrixXd::Identity(2, 2)) <= 1e-12);

    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::MatrixXd P = icp_project({random_matrix(20, 20, rng)}).C;
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(P).singularValues();
      CHECK(max_abs(sv.array() - 1.0) <= 1e-10);
    }
  }

  TEST_CASE("function transfer") {
    const SpectralBasis& b = small_basis();
    const FunctionalMap I{Eigen::MatrixXd::Identity(20, 20)};
    CHECK(max_abs(transfer_function(I, b.phi.col(1), b, b) - b.phi.col(1)) <= 1e-8);

    Eigen::MatrixXd C = Eigen::MatrixXd::Random(20, 20);
    C.row(0).setZero();
    C.col(0).setZero();
    C(0, 0) = 1.0;
    const Eigen::VectorXd f = Eigen::VectorXd::Constant(b.num_vertices(), 2.5);
    CHECK(max_abs(transfer_function({C}, f, b, b).array() - 2.5) <= 1e-8);

    // A function outside the span transfers like its A-weighted projection.
    std::mt19937_64 rng(37);
    const Eigen::VectorXd g = random_matrix(b.num_vertices(), 1, rng);
    const Eigen::VectorXd w = b.mass.cwiseSqrt();
    const Eigen::VectorXd coeff = (w.asDiagonal() * b.phi.leftCols(20)).householderQr().solve(w.cwiseProduct(g));
    const Eigen::VectorXd expected = b.phi.leftCols(20) * (C * coeff);
    CHECK(max_abs(transfer_function({C}, g, b, b) - expected) <= 1e-8);
  }

  TEST_CASE("noise injection") {
    std::mt19937_64 rng(38);
    const FunctionalMap C{random_matrix(10, 12, rng)};
    CHECK(perturb_fmap(C, 0.0, 9).C == C.C);
    CHECK(perturb_fmap(C, 0.3, 9).C == perturb_fmap(C, 0.3, 9).C);
    CHECK(perturb_fmap(C, 0.3, 9).C != perturb_fmap(C, 0.3, 10).C);

    const double sigma = 0.7;
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) mean += (perturb_fmap(C, sigma, s).C - C.C).squaredNorm();
    mean /= 1000.0;
    CHECK(std::abs(mean / (sigma * sigma * 120.0) - 1.0) <= 0.05);
  }

  TEST_CASE("recovery is covariant under basis sign flips") {
    std::mt19937_64 rng(39);
    const SpectralBasis& b = small_basis();
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd C = random_matrix(15, 15, rng);
      Eigen::VectorXd sM(30), sN(30);
      for (int i = 0; i < 30; ++i) {
        sM[i] = coin(rng) ? 1.0 : -1.0;
        sN[i] = coin(rng) ? 1.0 : -1.0;
      }
      SpectralBasis fM = b, fN = b;
      fM.phi = b.phi * sM.asDiagonal();
      fN.phi = b.phi * sN.asDiagonal();
      const Eigen::MatrixXd Cf = sM.head(15).asDiagonal() * C * sN.head(15).asDiagonal();
      CHECK(fmap_to_pointmap({Cf}, fM, fN) == fmap_to_pointmap({C}, b, b));
    }
  }

  TEST_CASE("sampled least squares") {
    std::mt19937_64 rng(40);
    const SpectralBasis& b = small_basis();
    std::vector<int> src(60);
    for (int i = 0; i < 60; ++i) src[i] = (i * 11) % b.num_vertices();
    PointMap T = oracle::random_map(60, b.num_vertices(), rng);
    const FunctionalMap C = sampled_fmap(src, T, b, b, 15, 18);
    Eigen::MatrixXd X(60, 15), Y(60, 18);
    for (int i = 0; i < 60; ++i) {
      X.row(i) = b.phi.row(src[i]).head(15);
      Y.row(i) = b.phi.row(T[i]).head(18);
    }
    const Eigen::MatrixXd ref = Eigen::JacobiSVD<Eigen::MatrixXd>(X, Eigen::ComputeThinU | Eigen::ComputeThinV).solve(Y);
    CHECK(max_abs(C.C - ref) <= 1e-10);
    CHECK_THROWS_AS(sampled_fmap(std::span<const int>(src).first(10), PointMap{std::vector<int>(10, 0)}, b, b, 15, 18),
                    Error);
  }

  TEST_CASE("validation") {
    CHECK_NOTHROW(validate(identity_map(4), 4));
    CHECK_THROWS_AS(validate(PointMap{{0, 4}}, 4), Error);
    CHECK_THROWS_AS(validate(PointMap{{-1}}, 4), Error);
    const SpectralBasis& b = small_basis();
    CHECK_THROWS_AS(pointmap_to_fmap(identity_map(b.num_vertices()), b, b, 31, 5), Error);
  }

  TEST_CASE("file round trips") {
    std::mt19937_64 rng(41);
    const FunctionalMap C{random_matrix(7, 9, rng)};
    const auto fpath = temp_path("fmap.txt");
    save_fmap(C, fpath);
    CHECK(load_fmap(fpath).C == C.C);

    const PointMap T = oracle::random_map(50, 20, rng);
    const auto ppath = temp_path("p2p.txt");
    save_pointmap(T, ppath);
    CHECK(load_pointmap(ppath) == T);

    {
      std::ofstream bad(fpath);
      bad << "2 2\n1 0\n0\n";
    }
    CHECK_THROWS_AS(load_fmap(fpath), ParseError);
    {
      std::ofstream bad(ppath);
      bad << "0\n1.5\n";
    }
    CHECK_THROWS_AS(load_pointmap(ppath), ParseError);
    std::filesystem::remove(fpath);
    std::filesystem::remove(ppath);
    CHECK_THROWS_AS(load_fmap(fpath), IoError);
  }
}
