#include "zoomout/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "zoomout/error.hpp"

namespace zoomout {

void RefineConfig::validate() const {
  if (k0_M < 1 || k0_N < 1) throw Error("refine config: initial sizes must be >= 1");
  if (k0_M > kmax_M || k0_N > kmax_N) {
    throw Error("refine config: k0 (" + std::to_string(k0_M) + "x" + std::to_string(k0_N) +
                ") exceeds kmax (" + std::to_string(kmax_M) + "x" + std::to_string(kmax_N) + ")");
  }
  if (step < 1) throw Error("refine config: step must be >= 1");
  if (sample_count < 0 || (sample_count > 0 && sample_count < std::max(kmax_M, kmax_N))) {
    throw Error("refine config: sample count must be 0 or >= max(kmax_M, kmax_N) = " +
                std::to_string(std::max(kmax_M, kmax_N)));
  }
  if (rank_estimate_K < 1) throw Error("refine config: rank probe size must be >= 1");
  if (probe_size < 0) throw Error("refine config: probe size must be >= 0");
  if (nn_width < 1) throw Error("refine config: nn width must be >= 1");
}

RefineConfig RefineConfig::square(int k0, int kmax, int step) {
  RefineConfig cfg;
  cfg.k0_M = cfg.k0_N = k0;
  cfg.kmax_M = cfg.kmax_N = kmax;
  cfg.step = step;
  return cfg;
}

void to_json(nlohmann::json& j, const RefineConfig& cfg) {
  j = nlohmann::json{{"k0_M", cfg.k0_M},
                     {"k0_N", cfg.k0_N},
                     {"kmax_M", cfg.kmax_M},
                     {"kmax_N", cfg.kmax_N},
                     {"step", cfg.step},
                     {"nn_mode", to_string(cfg.nn_mode)},
                     {"nn_width", cfg.nn_width},
                     {"sample_count", cfg.sample_count},
                     {"sample_target", cfg.sample_target},
                     {"seed", cfg.seed},
                     {"rectangular", cfg.rectangular},
                     {"rank_estimate_K", cfg.rank_estimate_K},
                     {"probe_size", cfg.resolved_probe()}};
}

nlohmann::json trace_to_json(const RefineTrace& trace) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : trace.records) {
    arr.push_back({{"kM", r.k_M}, {"kN", r.k_N}, {"energy", r.energy}, {"millis", r.millis}});
  }
  return arr;
}

std::pair<int, int> rectangular_updates(int k_M, int k_N, int r) {
  if (r < 1 || r > 100) throw Error("rectangular_updates: rank estimate " + std::to_string(r) + " outside [1, 100]");
  // ceil(k_N (100 - r) / 100) in integer arithmetic.
  const int extra = (k_N * (100 - r) + 99) / 100;
  return {k_M + 1, k_N + 1 + extra};
}

int estimate_rank(const Eigen::VectorXd& lambda_M, const Eigen::VectorXd& lambda_N, int K) {
  if (K < 1) throw Error("estimate_rank: K must be >= 1");
  if (lambda_M.size() < K || lambda_N.size() < K) {
    throw Error("estimate_rank: need " + std::to_string(K) + " eigenvalues, have " +
                std::to_string(lambda_M.size()) + " and " + std::to_string(lambda_N.size()));
  }
  const double max_N = lambda_N.head(K).maxCoeff();
  const double limit = max_N + 1e-8 * std::abs(max_N);
  int r = 0;
  for (int i = 0; i < K; ++i) {
    if (lambda_M[i] <= limit) r = i + 1;
  }
  return std::max(r, 1);
}

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Sampling {
  std::vector<int> source;
  std::vector<int> target;

  bool active() const { return !source.empty(); }
};

RefineResult run_zoomout(const MapInit& init, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                         const RefineConfig& cfg, const Sampling& samples) {
  const auto t0 = Clock::now();
  cfg.validate();
  if (cfg.kmax_M > basis_M.size() || cfg.kmax_N > basis_N.size()) {
    throw Error("zoomout: kmax " + std::to_string(cfg.kmax_M) + "x" + std::to_string(cfg.kmax_N) +
                " exceeds basis sizes " + std::to_string(basis_M.size()) + "x" + std::to_string(basis_N.size()));
  }
  const int probe = cfg.resolved_probe();
  if (probe > std::min(basis_M.size(), basis_N.size())) throw Error("zoomout: probe size exceeds basis size");

  FunctionalMap C;
  if (const auto* f = std::get_if<FunctionalMap>(&init)) {
    if (f->rows() < cfg.k0_M || f->cols() < cfg.k0_N) {
      throw Error("zoomout: initial map " + std::to_string(f->rows()) + "x" + std::to_string(f->cols()) +
                  " is smaller than k0 " + std::to_string(cfg.k0_M) + "x" + std::to_string(cfg.k0_N));
    }
    C.C = f->C.topLeftCorner(cfg.k0_M, cfg.k0_N);
  } else {
    C = pointmap_to_fmap(std::get<PointMap>(init), basis_M, basis_N, cfg.k0_M, cfg.k0_N);
  }

  int rank = 100;
  if (cfg.rectangular) {
    const int K = std::min({cfg.rank_estimate_K, basis_M.size(), basis_N.size()});
    rank = std::min(100, estimate_rank(basis_M.lambda, basis_N.lambda, K));
  }

  auto recover = [&](const FunctionalMap& fm) {
    return samples.active()
               ? fmap_to_pointmap(fm, basis_M, basis_N, cfg.nn_mode, samples.source, samples.target, cfg.nn_width)
               : fmap_to_pointmap(fm, basis_M, basis_N, cfg.nn_mode, {}, {}, cfg.nn_width);
  };
  auto express = [&](const PointMap& T, int k_M, int k_N) {
    return samples.active() ? sampled_fmap(samples.source, T, basis_M, basis_N, k_M, k_N)
                            : pointmap_to_fmap(T, basis_M, basis_N, k_M, k_N);
  };

  RefineResult result;
  PointMap T;
  while (true) {
    const int k_M = C.rows(), k_N = C.cols();
    T = recover(C);
    const double energy = orthogonality_energy(express(T, probe, probe), probe);
    result.trace.records.push_back({k_M, k_N, energy, millis_since(t0)});
    if (k_M >= cfg.kmax_M && k_N >= cfg.kmax_N) break;

    int next_M, next_N;
    if (cfg.rectangular) {
      std::tie(next_M, next_N) = rectangular_updates(k_M, k_N, rank);
    } else {
      next_M = k_M + cfg.step;
      next_N = k_N + cfg.step;
    }
    C = express(T, std::min(next_M, cfg.kmax_M), std::min(next_N, cfg.kmax_N));
  }

  result.map = samples.active() ? fmap_to_pointmap(C, basis_M, basis_N, cfg.nn_mode, {}, {}, cfg.nn_width)
                                : std::move(T);
  result.fmap = std::move(C);
  return result;
}

}  // namespace

RefineResult zoomout(const MapInit& init, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                     const RefineConfig& cfg) {
  if (cfg.sample_count > 0) throw Error("zoomout: sub-sampled mode needs the meshes (use the mesh overload)");
  return run_zoomout(init, basis_M, basis_N, cfg, {});
}

RefineResult zoomout(const MapInit& init, const TriangleMesh& mesh_M, const SpectralBasis& basis_M,
                     const TriangleMesh& mesh_N, const SpectralBasis& basis_N, const RefineConfig& cfg) {
  cfg.validate();
  if (mesh_M.num_vertices() != basis_M.num_vertices() || mesh_N.num_vertices() != basis_N.num_vertices()) {
    throw Error("zoomout: mesh and basis vertex counts differ");
  }
  Sampling samples;
  if (cfg.sample_count > 0) {
    samples.source = farthest_point_sample(mesh_M, std::min(cfg.sample_count, mesh_M.num_vertices()), cfg.seed).indices;
    if (cfg.sample_target) {
      samples.target =
          farthest_point_sample(mesh_N, std::min(cfg.sample_count, mesh_N.num_vertices()), cfg.seed + 1).indices;
    }
  }
  return run_zoomout(init, basis_M, basis_N, cfg, samples);
}

RefineResult icp_refine(const FunctionalMap& init, const SpectralBasis& basis_M, const SpectralBasis& basis_N,
                        int iters, NNMode mode, int probe_size) {
  const auto t0 = Clock::now();
  if (init.rows() != init.cols()) {
    throw Error("icp_refine: initial map must be square, got " + std::to_string(init.rows()) + "x" +
                std::to_string(init.cols()));
  }
  if (iters < 0) throw Error("icp_refine: iteration count must be >= 0");
  const int k = init.rows();
  if (k > basis_M.size() || k > basis_N.size()) throw Error("icp_refine: map size exceeds basis size");
  const int probe = probe_size > 0 ? probe_size : k;
  if (probe > std::min(basis_M.size(), basis_N.size())) throw Error("icp_refine: probe size exceeds basis size");

  RefineResult result;
  FunctionalMap C = init;
  for (int it = 0; it < iters; ++it) {
    const PointMap T = fmap_to_pointmap(C, basis_M, basis_N, mode);
    C = icp_project(pointmap_to_fmap(T, basis_M, basis_N, k, k));
    const double energy = orthogonality_energy(pointmap_to_fmap(T, basis_M, basis_N, probe, probe), probe);
    result.trace.records.push_back({k, k, energy, millis_since(t0)});
  }
  result.map = fmap_to_pointmap(C, basis_M, basis_N, mode);
  result.fmap = std::move(C);
  return result;
}

}  // namespace zoomout
