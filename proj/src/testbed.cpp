#include "zoomout/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "zoomout/error.hpp"

namespace zoomout {

const char* to_string(PairKind kind) {
  return kind == PairKind::PermutationIsometry ? "permutation_isometry" : "near_isometric_bend";
}

TriangleMesh make_icosphere(int subdivisions) {
  if (subdivisions < 0) throw Error("make_icosphere: negative subdivision level");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                                    {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = mid(tri[0], tri[1]), bc = mid(tri[1], tri[2]), ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }

  Vertices V(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  Triangles F(static_cast<Eigen::Index>(f.size()), 3);
  for (std::size_t i = 0; i < f.size(); ++i) F.row(static_cast<Eigen::Index>(i)) << f[i][0], f[i][1], f[i][2];
  return TriangleMesh(std::move(V), std::move(F));
}

double min_relative_gap(const Eigen::VectorXd& lambda, int count) {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < std::min<int>(count, static_cast<int>(lambda.size())); ++i) {
    gap = std::min(gap, (lambda[i + 1] - lambda[i]) / lambda[i + 1]);
  }
  return gap;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of the combined value
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + index + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

TriangleMesh blob_from_sphere(const TriangleMesh& sphere, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  struct Bump {
    Eigen::Vector3d center;
    double amplitude, width;
  };
  std::vector<Bump> bumps(12);
  for (auto& b : bumps) {
    b.center = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)).normalized();
    b.amplitude = -0.25 + 0.85 * uni(rng);
    b.width = 0.2 + 0.2 * uni(rng);
  }
  const Eigen::Vector3d axes(1.35, 1.0, 0.7);

  Vertices V = sphere.vertices();
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const Eigen::Vector3d u = V.row(i).transpose();
    double field = 0.0;
    for (const auto& b : bumps) field += b.amplitude * std::exp(-(u - b.center).squaredNorm() / (2 * b.width * b.width));
    V.row(i) = (std::exp(field) * u).cwiseProduct(axes).transpose();
  }
  return TriangleMesh(std::move(V), sphere.triangles());
}

}  // namespace

TriangleMesh make_asymmetric_blob(int n_target, std::uint64_t seed) {
  if (n_target < 50) throw Error("make_asymmetric_blob: n_target must be >= 50");
  int level = 0;
  long best = std::labs(12 - n_target);
  for (int s = 1; s <= 7; ++s) {
    const long count = 10L * (1L << (2 * s)) + 2;
    if (std::labs(count - n_target) < best) {
      best = std::labs(count - n_target);
      level = s;
    }
  }
  const TriangleMesh sphere = make_icosphere(level);
  for (int attempt = 0; attempt < 10; ++attempt) {
    TriangleMesh blob = blob_from_sphere(sphere, derive_seed(seed, attempt));
    const SpectralBasis basis = spectral_basis(cotan_laplacian(blob), 31);
    if (min_relative_gap(basis.lambda, 30) > 1e-4) return blob;
  }
  throw Error("make_asymmetric_blob: eigenvalue gap check failed 10 times for seed " + std::to_string(seed));
}

SyntheticPair make_permutation_pair(const TriangleMesh& mesh, const std::vector<int>& permutation) {
  const int n = mesh.num_vertices();
  if (static_cast<int>(permutation.size()) != n) throw Error("make_permutation_pair: permutation size mismatch");
  SyntheticPair pair;
  pair.kind = PairKind::PermutationIsometry;
  pair.gt_map.targets = permutation;
  pair.gt_map_rev.targets.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (permutation[i] < 0 || permutation[i] >= n || pair.gt_map_rev.targets[permutation[i]] != -1) {
      throw Error("make_permutation_pair: not a permutation");
    }
    pair.gt_map_rev.targets[permutation[i]] = i;
  }
  Vertices V(n, 3);
  for (int i = 0; i < n; ++i) V.row(permutation[i]) = mesh.vertices().row(i);
  Triangles F = mesh.triangles();
  for (Eigen::Index t = 0; t < F.rows(); ++t) {
    for (int c = 0; c < 3; ++c) F(t, c) = permutation[F(t, c)];
  }
  pair.mesh_M = mesh;
  pair.mesh_N = TriangleMesh(std::move(V), std::move(F));
  return pair;
}

SyntheticPair make_permutation_pair(const TriangleMesh& mesh, std::uint64_t seed) {
  std::vector<int> perm(mesh.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return make_permutation_pair(mesh, perm);
}

SyntheticPair make_bent_pair(const TriangleMesh& mesh, double bend_amount, std::uint64_t seed) {
  if (!(bend_amount >= 0.0)) throw Error("make_bent_pair: bend amount must be non-negative");
  SyntheticPair pair;
  pair.kind = PairKind::NearIsometricBend;
  pair.mesh_M = mesh;
  pair.gt_map = identity_map(mesh.num_vertices());
  pair.gt_map_rev = pair.gt_map;
  if (bend_amount == 0.0) {
    pair.mesh_N = mesh;
    return pair;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Quaterniond q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng)).normalized();
  const Eigen::Matrix3d R = q.toRotationMatrix();
  const Eigen::Vector3d centroid = mesh.vertices().colwise().mean().transpose();

  // Wrap the local x axis around a cylinder of radius 1/bend parallel to z;
  // the plane y = 0 is carried isometrically.
  const double radius = 1.0 / bend_amount;
  Vertices V = mesh.vertices();
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const Eigen::Vector3d p = R * (V.row(i).transpose() - centroid);
    const double arm = radius - p.y();
    const double angle = p.x() / radius;
    const Eigen::Vector3d bent(arm * std::sin(angle), radius - arm * std::cos(angle), p.z());
    V.row(i) = (R.transpose() * bent + centroid).transpose();
  }
  pair.mesh_N = TriangleMesh(std::move(V), mesh.triangles());
  return pair;
}

FunctionalMap PreparedPair::gt_fmap(int k) const { return pointmap_to_fmap(pair.gt_map, basis_M, basis_N, k, k); }

PreparedPair prepare_pair(SyntheticPair pair, int basis_size) {
  PreparedPair pp;
  pp.lap_M = cotan_laplacian(pair.mesh_M);
  pp.lap_N = cotan_laplacian(pair.mesh_N);
  pp.basis_M = spectral_basis(pp.lap_M, basis_size);
  pp.basis_N = spectral_basis(pp.lap_N, basis_size);
  pp.edges_M = edge_set(pair.mesh_M);
  pp.edges_N = edge_set(pair.mesh_N);
  std::vector<int> all_M(pair.mesh_M.num_vertices()), all_N(pair.mesh_N.num_vertices());
  std::iota(all_M.begin(), all_M.end(), 0);
  std::iota(all_N.begin(), all_N.end(), 0);
  pp.geo_M = dijkstra_geodesics(pair.mesh_M, pp.edges_M, all_M);
  pp.geo_N = dijkstra_geodesics(pair.mesh_N, pp.edges_N, all_N);
  pp.normalizer_M = area_normalizer(pair.mesh_M);
  pp.normalizer_N = area_normalizer(pair.mesh_N);
  pp.pair = std::move(pair);
  return pp;
}

MapReport evaluate_map(const PreparedPair& pp, const PointMap& map, const PointMap* reverse) {
  MapReport report;
  report.accuracy_mean = accuracy(map, pp.pair.gt_map, pp.geo_N, pp.normalizer_N);
  report.uncoverage_percent = uncoverage(map, pp.pair.mesh_N);
  report.edge_distortion_mean = edge_distortion(map, pp.edges_M, pp.geo_N);
  report.dirichlet = dirichlet_energy(map, pp.lap_M, pp.pair.mesh_N);
  if (reverse) report.bijectivity_mean = bijectivity(map, *reverse, pp.geo_M, pp.normalizer_M);
  return report;
}

double recovered_fraction(const PointMap& map, const PointMap& gt) {
  if (map.size() != gt.size()) throw Error("recovered_fraction: length mismatch");
  if (map.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < map.size(); ++i) hits += map[i] == gt[i];
  return static_cast<double>(hits) / static_cast<double>(map.size());
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json traces_json = nlohmann::json::array();
  for (const auto& t : traces) traces_json.push_back(trace_to_json(t));
  nlohmann::json reports_json = nlohmann::json::array();
  for (const auto& r : reports) reports_json.push_back(zoomout::to_json(r));
  return {{"label", label}, {"parameters", parameters}, {"summary", summary},
          {"traces", traces_json}, {"reports", reports_json}};
}

ExperimentResult run_stability_experiment(const PreparedPair& pp, const StabilityOptions& opts,
                                          const RefineConfig& cfg) {
  if (opts.trials < 1) throw Error("run_stability_experiment: trials must be >= 1");
  ExperimentResult out;
  out.label = "stability";
  out.parameters = {{"sigma", opts.sigma}, {"trials", opts.trials}, {"seed", opts.seed},
                    {"recovered_threshold", opts.recovered_threshold}, {"config", cfg}};

  const FunctionalMap gt = pointmap_to_fmap(pp.pair.gt_map, pp.basis_M, pp.basis_N, cfg.k0_M, cfg.k0_N);
  nlohmann::json trials = nlohmann::json::array();
  int converged = 0;
  double init_error_sum = 0.0;
  for (int t = 0; t < opts.trials; ++t) {
    const FunctionalMap noisy = perturb_fmap(gt, opts.sigma, derive_seed(opts.seed, t));
    const PointMap init_map = fmap_to_pointmap(noisy, pp.basis_M, pp.basis_N, cfg.nn_mode);
    const double init_error = accuracy(init_map, pp.pair.gt_map, pp.geo_N, pp.normalizer_N);
    const RefineResult res = zoomout(noisy, pp.pair.mesh_M, pp.basis_M, pp.pair.mesh_N, pp.basis_N, cfg);
    const MapReport report = evaluate_map(pp, res.map);
    const double recovered = recovered_fraction(res.map, pp.pair.gt_map);
    const bool ok = recovered >= opts.recovered_threshold;
    converged += ok;
    init_error_sum += init_error;
    trials.push_back({{"trial", t},
                      {"initial_accuracy", init_error},
                      {"final_accuracy", *report.accuracy_mean},
                      {"recovered_fraction", recovered},
                      {"converged", ok}});
    out.traces.push_back(res.trace);
    out.reports.push_back(report);
  }
  out.summary = {{"trials", trials},
                 {"converged", converged},
                 {"fraction_converged", static_cast<double>(converged) / opts.trials},
                 {"mean_initial_accuracy", init_error_sum / opts.trials}};
  return out;
}

ExperimentResult run_energy_trace_experiment(const PreparedPair& pp, const RefineConfig& cfg,
                                             const EnergyTraceOptions& opts) {
  ExperimentResult out;
  out.label = "energy-trace";
  out.parameters = {{"icp_iters", opts.icp_iters}, {"init_sigma", opts.init_sigma}, {"seed", opts.seed},
                    {"config", cfg}};
  const int probe = cfg.resolved_probe();
  const int k_icp = cfg.kmax_M;

  const FunctionalMap init = perturb_fmap(pointmap_to_fmap(pp.pair.gt_map, pp.basis_M, pp.basis_N, cfg.k0_M, cfg.k0_N),
                                          opts.init_sigma, opts.seed);
  const RefineResult zo = zoomout(init, pp.pair.mesh_M, pp.basis_M, pp.pair.mesh_N, pp.basis_N, cfg);

  const PointMap init_map = fmap_to_pointmap(init, pp.basis_M, pp.basis_N, cfg.nn_mode);
  const FunctionalMap icp_init = pointmap_to_fmap(init_map, pp.basis_M, pp.basis_N, k_icp, k_icp);
  const RefineResult icp = icp_refine(icp_init, pp.basis_M, pp.basis_N, opts.icp_iters, cfg.nn_mode, probe);

  auto final_energy = [&](const PointMap& m) {
    return orthogonality_energy(pointmap_to_fmap(m, pp.basis_M, pp.basis_N, probe, probe), probe);
  };
  const double e_init = final_energy(init_map);
  const double e_zo = final_energy(zo.map);
  const double e_icp = final_energy(icp.map);
  const double e_gt = final_energy(pp.pair.gt_map);

  out.traces = {zo.trace, icp.trace};
  out.reports = {evaluate_map(pp, zo.map), evaluate_map(pp, icp.map)};
  out.summary = {{"probe_size", probe},
                 {"initial_energy", e_init},
                 {"ground_truth_energy", e_gt},
                 {"zoomout_final_energy", e_zo},
                 {"icp_final_energy", e_icp},
                 {"zoomout_recovered_fraction", recovered_fraction(zo.map, pp.pair.gt_map)},
                 {"icp_recovered_fraction", recovered_fraction(icp.map, pp.pair.gt_map)}};
  return out;
}

ExperimentResult run_subsample_experiment(const PreparedPair& pp, const RefineConfig& cfg, int sample_count,
                                          double init_sigma, std::uint64_t seed) {
  ExperimentResult out;
  out.label = "subsample";
  RefineConfig dense = cfg;
  dense.sample_count = 0;
  RefineConfig sampled = cfg;
  sampled.sample_count = sample_count;
  sampled.seed = seed;
  out.parameters = {{"sample_count", sample_count}, {"init_sigma", init_sigma}, {"seed", seed}, {"config", dense}};

  const FunctionalMap init = perturb_fmap(pointmap_to_fmap(pp.pair.gt_map, pp.basis_M, pp.basis_N, cfg.k0_M, cfg.k0_N),
                                          init_sigma, seed);
  const RefineResult d = zoomout(init, pp.basis_M, pp.basis_N, dense);
  const RefineResult s = zoomout(init, pp.pair.mesh_M, pp.basis_M, pp.pair.mesh_N, pp.basis_N, sampled);

  out.traces = {d.trace, s.trace};
  out.reports = {evaluate_map(pp, d.map), evaluate_map(pp, s.map)};
  out.summary = {{"dense_accuracy", *out.reports[0].accuracy_mean},
                 {"sampled_accuracy", *out.reports[1].accuracy_mean},
                 {"dense_recovered_fraction", recovered_fraction(d.map, pp.pair.gt_map)},
                 {"sampled_recovered_fraction", recovered_fraction(s.map, pp.pair.gt_map)},
                 {"dense_millis", d.trace.records.empty() ? 0.0 : d.trace.records.back().millis},
                 {"sampled_millis", s.trace.records.empty() ? 0.0 : s.trace.records.back().millis}};
  return out;
}

}  // namespace zoomout
