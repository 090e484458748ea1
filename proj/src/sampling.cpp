#include <fstream>
#include <limits>
#include <random>

#include "zoomout/error.hpp"
#include "zoomout/sampling.hpp"

namespace zoomout {

std::vector<int> farthest_point_sample_from(const Vertices& points, int count, int start) {
  const int n = static_cast<int>(points.rows());
  if (count < 1 || count > n) {
    throw Error("farthest_point_sample: count " + std::to_string(count) + " outside [1, " + std::to_string(n) + "]");
  }
  if (start < 0 || start >= n) throw Error("farthest_point_sample: start vertex out of range");

  std::vector<int> chosen{start};
  chosen.reserve(count);
  std::vector<char> taken(n, 0);
  taken[start] = 1;
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  int last = start;
  while (static_cast<int>(chosen.size()) < count) {
    int arg = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = (points.row(i) - points.row(last)).squaredNorm();
      if (d < min_sq[i]) min_sq[i] = d;
      if (!taken[i] && min_sq[i] > best) {
        best = min_sq[i];
        arg = i;
      }
    }
    chosen.push_back(arg);
    taken[arg] = 1;
    last = arg;
  }
  return chosen;
}

SampleSet farthest_point_sample(const TriangleMesh& mesh, int count, std::uint64_t seed) {
  const int n = mesh.num_vertices();
  if (count < 1 || count > n) {
    throw Error("farthest_point_sample: count " + std::to_string(count) + " outside [1, " + std::to_string(n) + "]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  const int start = pick(rng);
  return {farthest_point_sample_from(mesh.vertices(), count, start), seed};
}

void save_samples(const SampleSet& samples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sample file: " + path.string());
  for (int i : samples.indices) out << i << '\n';
}

}  // namespace zoomout
