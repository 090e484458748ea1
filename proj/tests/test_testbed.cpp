#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>
#include <Eigen/Dense>

#include "oracles.hpp"
#include "zoomout/error.hpp"
#include "zoomout/testbed.hpp"

using namespace zoomout;

namespace {

double gt_energy(const SyntheticPair& pair, int k) {
  const SpectralBasis bM = spectral_basis(cotan_laplacian(pair.mesh_M), k);
  const SpectralBasis bN = spectral_basis(cotan_laplacian(pair.mesh_N), k);
  return orthogonality_energy(pointmap_to_fmap(pair.gt_map, bM, bN, k, k), k);
}

const PreparedPair& perm_pair() {
  static const PreparedPair pp = prepare_pair(make_permutation_pair(make_asymmetric_blob(642, 81), 3), 30);
  return pp;
}

}  // namespace

TEST_SUITE("testbed") {
  TEST_CASE("icosphere sizes") {
    for (int s = 0; s <= 3; ++s) {
      const TriangleMesh m = make_icosphere(s);
      CHECK(m.num_vertices() == 10 * (1 << (2 * s)) + 2);
      CHECK(m.vertices().rowwise().norm().minCoeff() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("blob: closed genus 0, simple spectrum, deterministic") {
    const TriangleMesh a = make_asymmetric_blob(642, 1);
    CHECK(a.num_vertices() == 642);
    CHECK(euler_characteristic(a) == 2);
    CHECK(2 * edge_set(a).size() == 3 * static_cast<std::size_t>(a.num_triangles()));
    const SpectralBasis b = spectral_basis(cotan_laplacian(a), 31);
    CHECK(min_relative_gap(b.lambda, 30) > 1e-4);
    const TriangleMesh again = make_asymmetric_blob(642, 1);
    CHECK(again.vertices() == a.vertices());
    CHECK(again.triangles() == a.triangles());
    CHECK(make_asymmetric_blob(642, 2).vertices() != a.vertices());
    CHECK(make_asymmetric_blob(2000, 1).num_vertices() == 2562);
  }

  TEST_CASE("relative gap helper") {
    Eigen::VectorXd l(4);
    l << 0.0, 1.0, 1.5, 3.0;
    CHECK(min_relative_gap(l, 4) == doctest::Approx(0.5 / 1.5));
  }

  TEST_CASE("permutation pairs") {
    const TriangleMesh m = make_asymmetric_blob(162, 3);
    std::vector<int> id(m.num_vertices());
    std::iota(id.begin(), id.end(), 0);
    const SyntheticPair same = make_permutation_pair(m, id);
    CHECK(same.gt_map == identity_map(m.num_vertices()));
    CHECK(same.mesh_N.vertices() == m.vertices());

    const SyntheticPair p = make_permutation_pair(m, 12);
    CHECK(p.kind == PairKind::PermutationIsometry);
    for (int v = 0; v < m.num_vertices(); ++v) {
      CHECK(p.gt_map_rev[p.gt_map[v]] == v);
      CHECK(p.mesh_N.vertex(p.gt_map[v]) == m.vertex(v));
    }
    CHECK(p.gt_map != same.gt_map);
    CHECK_THROWS_AS(make_permutation_pair(m, std::vector<int>(m.num_vertices(), 0)), Error);
  }

  TEST_CASE("permutation pairs share the spectrum and satisfy the isometry checks") {
    const PreparedPair& pp = perm_pair();
    REQUIRE(min_relative_gap(pp.basis_M.lambda, 30) > 1e-4);
    for (int i = 1; i < 30; ++i) CHECK(oracle::rel_diff(pp.basis_M.lambda[i], pp.basis_N.lambda[i]) <= 1e-8);

    const FunctionalMap C = pp.gt_fmap(20);
    CHECK(orthogonality_energy(C, 20) <= 1e-4);
    const double diag = C.C.diagonal().squaredNorm();
    const double off = C.C.squaredNorm() - diag;
    CHECK(std::sqrt(off) <= 1e-3 * std::sqrt(diag));
    CHECK((C.C.transpose() * C.C - Eigen::MatrixXd::Identity(20, 20)).norm() <= 1e-3);

    std::mt19937_64 rng(4);
    const PointMap rand = oracle::random_map(pp.pair.mesh_M.num_vertices(), pp.pair.mesh_N.num_vertices(), rng);
    const double e_rand = orthogonality_energy(pointmap_to_fmap(rand, pp.basis_M, pp.basis_N, 20, 20), 20);
    CHECK(e_rand >= 10 * orthogonality_energy(C, 20) + 0.1);
  }

  TEST_CASE("bent pairs") {
    const TriangleMesh m = make_asymmetric_blob(642, 5);
    const SyntheticPair flat = make_bent_pair(m, 0.0, 1);
    CHECK(flat.kind == PairKind::NearIsometricBend);
    CHECK(flat.mesh_N.vertices() == m.vertices());
    CHECK(flat.gt_map == identity_map(m.num_vertices()));
    CHECK(gt_energy(flat, 20) <= 1e-4);

    double prev = gt_energy(flat, 20);
    for (double bend : {0.1, 0.3, 0.6}) {
      CAPTURE(bend);
      const SyntheticPair p = make_bent_pair(m, bend, 1);
      CHECK(p.mesh_N.triangles() == m.triangles());
      const double e = gt_energy(p, 20);
      CHECK(e > prev);
      prev = e;
    }
  }

  TEST_CASE("seed streams") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  }

  TEST_CASE("stability without noise converges every trial") {
    const PreparedPair& pp = perm_pair();
    RefineConfig cfg = RefineConfig::square(4, 30, 2);
    const ExperimentResult r = run_stability_experiment(pp, {0.0, 3, 1}, cfg);
    CHECK(r.summary["converged"] == 3);
    for (const auto& t : r.summary["trials"]) CHECK(t["recovered_fraction"].get<double>() >= 0.99);
    CHECK(r.traces.size() == 3);
    CHECK(r.reports.size() == 3);
  }

  TEST_CASE("energy trace: exact init stays near zero, trace lengths match") {
    const PreparedPair& pp = perm_pair();
    const RefineConfig cfg = RefineConfig::square(10, 30, 5);
    const ExperimentResult r = run_energy_trace_experiment(pp, cfg, {7, 0.0, 0});
    REQUIRE(r.traces.size() == 2);
    CHECK(r.traces[0].records.size() == 5);
    CHECK(r.traces[1].records.size() == 7);
    for (const auto& t : r.traces) {
      for (const TraceRecord& rec : t.records) CHECK(rec.energy <= 1e-4);
    }
  }

  TEST_CASE("experiments are deterministic") {
    const PreparedPair& pp = perm_pair();
    const RefineConfig cfg = RefineConfig::square(6, 24, 3);
    auto strip = [](nlohmann::json j) {
      for (auto& t : j["traces"]) {
        for (auto& rec : t) rec.erase("millis");
      }
      j["summary"].erase("dense_millis");
      j["summary"].erase("sampled_millis");
      return j;
    };
    CHECK(strip(run_stability_experiment(pp, {0.3, 2, 5}, cfg).to_json()) ==
          strip(run_stability_experiment(pp, {0.3, 2, 5}, cfg).to_json()));
    CHECK(strip(run_energy_trace_experiment(pp, cfg, {4, 0.2, 5}).to_json()) ==
          strip(run_energy_trace_experiment(pp, cfg, {4, 0.2, 5}).to_json()));
    CHECK(strip(run_subsample_experiment(pp, cfg, 100, 0.1, 5).to_json()) ==
          strip(run_subsample_experiment(pp, cfg, 100, 0.1, 5).to_json()));
  }

  TEST_CASE("prepared pair contents") {
    const PreparedPair& pp = perm_pair();
    CHECK(pp.basis_M.size() == 30);
    CHECK(pp.geo_N.sources().size() == static_cast<std::size_t>(pp.pair.mesh_N.num_vertices()));
    CHECK(pp.normalizer_N == doctest::Approx(std::sqrt(total_area(pp.pair.mesh_N))));
    CHECK(pp.gt_fmap(7).rows() == 7);
  }
}
