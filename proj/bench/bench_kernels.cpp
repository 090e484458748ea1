// Serial reference vs OpenMP kernels on a synthetic blob.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "zoomout/kernels.hpp"
#include "zoomout/mesh.hpp"
#include "zoomout/spectral.hpp"
#include "zoomout/testbed.hpp"

namespace {

using namespace zoomout;

struct Fixture {
  TriangleMesh mesh;
  SpectralBasis basis;
  std::vector<int> targets;
  kernels::WeightedGraph graph;

  Fixture() : mesh(make_asymmetric_blob(2562, 7)) {
    basis = spectral_basis(cotan_laplacian(mesh), 60);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, mesh.num_vertices() - 1);
    targets.resize(mesh.num_vertices());
    for (int& t : targets) t = pick(rng);
    graph.adj.resize(mesh.num_vertices());
    for (const Edge& e : edge_set(mesh).edges) {
      graph.adj[e.a].emplace_back(e.b, e.length);
      graph.adj[e.b].emplace_back(e.a, e.length);
    }
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <bool Parallel>
void BM_ProjectPointmap(benchmark::State& state) {
  const auto& f = fixture();
  const int k = static_cast<int>(state.range(0));
  const Eigen::MatrixXd phi = f.basis.phi.leftCols(k);
  for (auto _ : state) {
    auto C = Parallel ? kernels::parallel::project_pointmap(phi, f.basis.mass, phi, f.targets)
                      : kernels::serial::project_pointmap(phi, f.basis.mass, phi, f.targets);
    benchmark::DoNotOptimize(C.data());
  }
}

template <bool Parallel>
void BM_NearestRows(benchmark::State& state) {
  const auto& f = fixture();
  const int k = static_cast<int>(state.range(0));
  const RowMatrix q = f.basis.phi.leftCols(k);
  for (auto _ : state) {
    auto nn = Parallel ? kernels::parallel::nearest_rows(q, q) : kernels::serial::nearest_rows(q, q);
    benchmark::DoNotOptimize(nn.data());
  }
}

template <bool Parallel>
void BM_QueryBatch(benchmark::State& state) {
  const auto& f = fixture();
  const int k = static_cast<int>(state.range(0));
  const RowMatrix q = f.basis.phi.leftCols(k);
  const NNIndex index(q, NNMode::Exact);
  for (auto _ : state) {
    auto nn = Parallel ? kernels::parallel::query_batch(index, q) : kernels::serial::query_batch(index, q);
    benchmark::DoNotOptimize(nn.data());
  }
}

template <bool Parallel>
void BM_Dijkstra(benchmark::State& state) {
  const auto& f = fixture();
  std::vector<int> sources(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < sources.size(); ++i) sources[i] = static_cast<int>(i * 7 % f.graph.size());
  for (auto _ : state) {
    auto d = Parallel ? kernels::parallel::dijkstra(f.graph, sources) : kernels::serial::dijkstra(f.graph, sources);
    benchmark::DoNotOptimize(d.data());
  }
}

}  // namespace

BENCHMARK(BM_ProjectPointmap<false>)->Arg(20)->Arg(60);
BENCHMARK(BM_ProjectPointmap<true>)->Arg(20)->Arg(60);
BENCHMARK(BM_NearestRows<false>)->Arg(20);
BENCHMARK(BM_NearestRows<true>)->Arg(20);
BENCHMARK(BM_QueryBatch<false>)->Arg(20)->Arg(60);
BENCHMARK(BM_QueryBatch<true>)->Arg(20)->Arg(60);
BENCHMARK(BM_Dijkstra<false>)->Arg(64);
BENCHMARK(BM_Dijkstra<true>)->Arg(64);

BENCHMARK_MAIN();
