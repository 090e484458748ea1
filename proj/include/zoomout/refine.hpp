#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "zoomout/fmap.hpp"
#include "zoomout/mesh.hpp"
#include "zoomout/sampling.hpp"
#include "zoomout/spectral.hpp"

namespace zoomout {

struct RefineConfig {
  int k0_M = 20;
  int k0_N = 20;
  int kmax_M = 120;
  int kmax_N = 120;
  int step = 1;
  NNMode nn_mode = NNMode::Exact;
  int nn_width = kDefaultApproxWidth;
  int sample_count = 0;  // 0: every vertex; otherwise FPS samples on M
  bool sample_target = false;  // also restrict candidates on N to FPS samples
  std::uint64_t seed = 0;
  bool rectangular = false;
  int rank_estimate_K = 100;
  int probe_size = 0;  // size of the map used for trace energies; 0: min(kmax_M, kmax_N)

  /// Throws zoomout::Error if k0 > kmax, step < 1, or the sample count is
  /// positive but smaller than max(kmax_M, kmax_N).
  void validate() const;

  int resolved_probe() const { return probe_size > 0 ? probe_size : std::min(kmax_M, kmax_N); }

  static RefineConfig square(int k0, int kmax, int step = 1);
};

void to_json(nlohmann::json& j, const RefineConfig& cfg);

struct TraceRecord {
  int k_M = 0;
  int k_N = 0;
  double energy = 0.0;  // orthogonality energy at the probe size
  double millis = 0.0;  // wall time since the refinement started
};

struct RefineTrace {
  std::vector<TraceRecord> records;
};

/// Trace JSON: [{"kM":..,"kN":..,"energy":..,"millis":..}, ...]
nlohmann::json trace_to_json(const RefineTrace& trace);

struct RefineResult {
  FunctionalMap fmap;
  PointMap map;
  RefineTrace trace;
};

using MapInit = std::variant<FunctionalMap, PointMap>;

/// Iterative spectral upsampling. Starting from the k0_M x k0_N leading block
/// of the initial map (a point map is first converted at that size), each
/// level recovers a point map from the current C and re-expresses it one
/// step larger, until kmax; the last step is clamped to land on kmax
/// exactly. Rectangular mode grows sizes with rectangular_updates() instead
/// of `step`.
///
/// The trace has one record per size level; its energy is the orthogonality
/// energy of the level's point map converted at the probe size.
///
/// Sub-sampled mode (sample_count > 0) matches only FPS samples of M (seed)
/// and fits C to them by least squares; the final C is converted to a dense
/// map once. Candidates on N are all vertices, or FPS samples drawn with
/// seed + 1 when sample_target is set. This mode needs the meshes and
/// therefore the second overload.
RefineResult zoomout(const MapInit& init, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                     const RefineConfig& cfg);
RefineResult zoomout(const MapInit& init, const TriangleMesh& mesh_M, const SpectralBasis& basis_M,
                     const TriangleMesh& mesh_N, const SpectralBasis& basis_N, const RefineConfig& cfg);

/// (k_M + 1, k_N + 1 + ceil(k_N (100 - r) / 100)), r in [1, 100].
std::pair<int, int> rectangular_updates(int k_M, int k_N, int r);

/// Largest i <= K whose eigenvalue on M does not exceed the largest of the
/// first K eigenvalues on N, clamped to >= 1. Values within 1e-8 relative
/// count as equal.
int estimate_rank(const Eigen::VectorXd& lambda_M, const Eigen::VectorXd& lambda_N, int K);

/// Fixed-size spectral ICP: point map recovery, re-projection, and
/// projection to the nearest orthonormal matrix, `iters` times. One trace
/// record per iteration; `probe_size` 0 means the map size.
RefineResult icp_refine(const FunctionalMap& init, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                        int iters, NNMode mode = NNMode::Exact, int probe_size = 0);

}  // namespace zoomout
