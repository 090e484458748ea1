#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "zoomout/fmap.hpp"
#include "zoomout/mesh.hpp"
#include "zoomout/metrics.hpp"
#include "zoomout/refine.hpp"
#include "zoomout/spectral.hpp"

namespace zoomout {

enum class PairKind { PermutationIsometry, NearIsometricBend };

const char* to_string(PairKind kind);

/// Two meshes with known correspondence. gt_map: M -> N, gt_map_rev: N -> M.
struct SyntheticPair {
  TriangleMesh mesh_M;
  TriangleMesh mesh_N;
  PointMap gt_map;
  PointMap gt_map_rev;
  PairKind kind = PairKind::PermutationIsometry;
};

/// Unit icosphere after `subdivisions` rounds of 4:1 splitting (10 * 4^s + 2 vertices).
TriangleMesh make_icosphere(int subdivisions);

/// Closed genus-0 blob: an icosphere (level chosen so the vertex count is
/// closest to n_target) under a seeded radial bump field and anisotropic
/// scaling. Up to 10 seeds are tried until the first 30 Laplacian
/// eigenvalues have relative gaps > 1e-4; throws zoomout::Error otherwise.
TriangleMesh make_asymmetric_blob(int n_target, std::uint64_t seed);

/// Relative gaps (lambda_{i+1} - lambda_i) / lambda_{i+1} for i >= 1 among
/// the first `count` eigenvalues; the smallest one is returned.
double min_relative_gap(const Eigen::VectorXd& lambda, int count);

/// N is M with vertices relabeled by a seeded random permutation.
SyntheticPair make_permutation_pair(const TriangleMesh& mesh, std::uint64_t seed);
SyntheticPair make_permutation_pair(const TriangleMesh& mesh, const std::vector<int>& permutation);

/// N is M bent around a cylinder of radius 1 / bend_amount (direction drawn
/// from the seed); the correspondence is the identity. bend_amount 0 gives
/// an exact copy.
SyntheticPair make_bent_pair(const TriangleMesh& mesh, double bend_amount, std::uint64_t seed);

/// A pair with its Laplacians, bases, edge sets and all-pairs geodesics.
struct PreparedPair {
  SyntheticPair pair;
  LaplacianPair lap_M, lap_N;
  SpectralBasis basis_M, basis_N;
  EdgeSet edges_M, edges_N;
  GeodesicTable geo_M, geo_N;
  double normalizer_M = 1.0;  // sqrt(area)
  double normalizer_N = 1.0;

  /// Ground-truth functional map at size k x k.
  FunctionalMap gt_fmap(int k) const;
};

PreparedPair prepare_pair(SyntheticPair pair, int basis_size);

/// Accuracy against the ground truth, uncoverage, edge distortion and
/// Dirichlet energy of an M -> N map; bijectivity when `reverse` is given.
MapReport evaluate_map(const PreparedPair& pp, const PointMap& map, const PointMap* reverse = nullptr);

/// Fraction of source vertices mapped exactly onto their ground-truth target.
double recovered_fraction(const PointMap& map, const PointMap& gt);

/// Per-trial stream derived from (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct ExperimentResult {
  std::string label;
  std::vector<RefineTrace> traces;
  std::vector<MapReport> reports;
  nlohmann::json parameters;
  nlohmann::json summary;

  nlohmann::json to_json() const;
};

struct StabilityOptions {
  double sigma = 0.0;
  int trials = 10;
  std::uint64_t seed = 0;
  double recovered_threshold = 0.95;  // a trial converges if this fraction is matched exactly
};

/// For each trial the k0 x k0 ground-truth map is perturbed with perturb_fmap
/// and refined with zoomout(cfg). Reports the induced initial and final
/// accuracies per trial and the fraction of converged trials.
ExperimentResult run_stability_experiment(const PreparedPair& pp, const StabilityOptions& opts,
                                          const RefineConfig& cfg);

struct EnergyTraceOptions {
  int icp_iters = 15;
  double init_sigma = 0.0;  // noise on the k0 x k0 ground-truth initial map
  std::uint64_t seed = 0;
};

/// ZoomOut (cfg) and fixed-size ICP at kmax_M from the same noisy initial map.
/// traces[0] / reports[0] are ZoomOut, traces[1] / reports[1] ICP; the
/// summary holds the final energies at the probe size.
ExperimentResult run_energy_trace_experiment(const PreparedPair& pp, const RefineConfig& cfg,
                                             const EnergyTraceOptions& opts);

/// Dense vs sub-sampled ZoomOut from the same noisy initial map.
/// traces/reports: [dense, sampled].
ExperimentResult run_subsample_experiment(const PreparedPair& pp, const RefineConfig& cfg, int sample_count,
                                          double init_sigma, std::uint64_t seed);

}  // namespace zoomout
