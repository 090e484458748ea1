#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "zoomout/mesh.hpp"

namespace zoomout {

enum class NNMode { Exact, Approximate };

inline constexpr int kDefaultApproxWidth = 128;

const char* to_string(NNMode mode);
NNMode nn_mode_from_string(const std::string& s);

struct SampleSet {
  std::vector<int> indices;
  std::uint64_t seed = 0;
};

/// Greedy Euclidean farthest point sampling from the vertex picked by
/// mt19937_64(seed); ties go to the smallest index.
SampleSet farthest_point_sample(const TriangleMesh& mesh, int count, std::uint64_t seed);

/// Same greedy rule over an arbitrary point set with an explicit start.
std::vector<int> farthest_point_sample_from(const Vertices& points, int count, int start);

void save_samples(const SampleSet& samples, const std::filesystem::path& path);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Neighbor {
  int index = -1;
  double distance = 0.0;  // Euclidean
};

/// k-d tree over the rows of an m x k matrix. Splits on the widest dimension
/// at the median. Exact mode returns the true nearest row (smallest index on
/// ties); approximate mode runs best-bin-first and stops after `width` leaves.
///
/// Immutable after construction; concurrent queries are safe.
class NNIndex {
 public:
  NNIndex(RowMatrix points, NNMode mode, int width = kDefaultApproxWidth);
  NNIndex(const Eigen::Ref<const Eigen::MatrixXd>& points, NNMode mode, int width = kDefaultApproxWidth);

  int size() const noexcept { return static_cast<int>(points_.rows()); }
  int dim() const noexcept { return static_cast<int>(points_.cols()); }
  NNMode mode() const noexcept { return mode_; }
  int width() const noexcept { return width_; }

  Neighbor query(std::span<const double> q) const;
  Neighbor query(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  /// Nearest row for every row of `queries` (OpenMP over queries).
  std::vector<Neighbor> query_batch(const Eigen::Ref<const RowMatrix>& queries) const;

 private:
  struct Node {
    int begin = 0, end = 0;     // range in order_ (leaves)
    int left = -1, right = -1;  // children (internal)
    int dim = -1;
    double split = 0.0;
  };

  int build(int begin, int end);
  void search_exact(int node, const double* q, Neighbor& best, double& best_sq) const;
  void search_approx(const double* q, Neighbor& best, double& best_sq) const;
  void scan_leaf(const Node& leaf, const double* q, Neighbor& best, double& best_sq) const;
  double box_distance(int node, const double* q) const;

  RowMatrix points_;
  NNMode mode_;
  int width_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  std::vector<double> lo_, hi_;  // per-node bounding boxes, dim() values each
};

NNIndex build_nn(const Eigen::Ref<const Eigen::MatrixXd>& points, NNMode mode,
                 int width = kDefaultApproxWidth);

Neighbor query_nn(const NNIndex& index, const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace zoomout
