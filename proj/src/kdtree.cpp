#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "zoomout/error.hpp"
#include "zoomout/kernels.hpp"
#include "zoomout/sampling.hpp"

namespace zoomout {

namespace {
constexpr int kLeafSize = 8;
}

const char* to_string(NNMode mode) { return mode == NNMode::Exact ? "exact" : "approx"; }

NNMode nn_mode_from_string(const std::string& s) {
  if (s == "exact") return NNMode::Exact;
  if (s == "approx" || s == "approximate") return NNMode::Approximate;
  throw Error("unknown nearest-neighbor mode '" + s + "' (expected exact or approx)");
}

NNIndex::NNIndex(const Eigen::Ref<const Eigen::MatrixXd>& points, NNMode mode, int width)
    : NNIndex(RowMatrix(points), mode, width) {}

NNIndex::NNIndex(RowMatrix points, NNMode mode, int width)
    : points_(std::move(points)), mode_(mode), width_(width) {
  if (points_.rows() < 1) throw Error("NNIndex: empty point set");
  if (points_.cols() < 1) throw Error("NNIndex: points must have at least one dimension");
  if (!points_.allFinite()) throw Error("NNIndex: non-finite point coordinates");
  if (width_ < 1) throw Error("NNIndex: approximate width must be >= 1");
  order_.resize(points_.rows());
  for (int i = 0; i < size(); ++i) order_[i] = i;
  nodes_.reserve(2 * (size() / kLeafSize + 1));
  build(0, size());
}

int NNIndex::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  lo_.resize(lo_.size() + dim());
  hi_.resize(hi_.size() + dim());

  int best_dim = 0;
  double best_spread = -1.0;
  for (int d = 0; d < dim(); ++d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = begin; i < end; ++i) {
      const double v = points_(order_[i], d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    lo_[static_cast<std::size_t>(id) * dim() + d] = lo;
    hi_[static_cast<std::size_t>(id) * dim() + d] = hi;
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = d;
    }
  }
  if (end - begin <= kLeafSize || best_spread <= 0.0) return id;

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    const double va = points_(a, best_dim), vb = points_(b, best_dim);
    return va < vb || (va == vb && a < b);
  });
  const double split = points_(order_[mid], best_dim);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].dim = best_dim;
  nodes_[id].split = split;
  return id;
}

void NNIndex::scan_leaf(const Node& leaf, const double* q, Neighbor& best, double& best_sq) const {
  for (int i = leaf.begin; i < leaf.end; ++i) {
    const int idx = order_[i];
    const double d = kernels::squared_distance(q, points_.row(idx).data(), dim());
    if (d < best_sq || (d == best_sq && idx < best.index)) {
      best_sq = d;
      best.index = idx;
    }
  }
}

// Left holds values <= split and right values >= split, so |q[dim] - split|
// lower-bounds the distance to anything on the far side. Far subtrees are
// visited on equality to keep the smallest-index tie rule exact.
void NNIndex::search_exact(int node, const double* q, Neighbor& best, double& best_sq) const {
  const Node& nd = nodes_[node];
  if (nd.left < 0) {
    scan_leaf(nd, q, best, best_sq);
    return;
  }
  const double diff = q[nd.dim] - nd.split;
  const int near = diff < 0.0 ? nd.left : nd.right;
  const int far = diff < 0.0 ? nd.right : nd.left;
  search_exact(near, q, best, best_sq);
  if (diff * diff <= best_sq) search_exact(far, q, best, best_sq);
}

double NNIndex::box_distance(int node, const double* q) const {
  const double* lo = lo_.data() + static_cast<std::size_t>(node) * dim();
  const double* hi = hi_.data() + static_cast<std::size_t>(node) * dim();
  double s = 0.0;
  for (int d = 0; d < dim(); ++d) {
    const double e = q[d] < lo[d] ? lo[d] - q[d] : (q[d] > hi[d] ? q[d] - hi[d] : 0.0);
    s += e * e;
  }
  return s;
}

// Best-bin-first: unexplored branches are ordered by the distance from q to
// their bounding box; at most width_ leaves are scanned.
void NNIndex::search_approx(const double* q, Neighbor& best, double& best_sq) const {
  using Item = std::pair<double, int>;  // (lower bound, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> branches;
  branches.emplace(0.0, 0);
  int leaves = 0;
  while (!branches.empty() && leaves < width_) {
    auto [bound, node] = branches.top();
    branches.pop();
    if (bound > best_sq) break;
    while (nodes_[node].left >= 0) {
      const Node& nd = nodes_[node];
      const double diff = q[nd.dim] - nd.split;
      const int near = diff < 0.0 ? nd.left : nd.right;
      const int far = diff < 0.0 ? nd.right : nd.left;
      const double far_bound = box_distance(far, q);
      if (far_bound <= best_sq) branches.emplace(far_bound, far);
      node = near;
    }
    scan_leaf(nodes_[node], q, best, best_sq);
    ++leaves;
  }
}

Neighbor NNIndex::query(std::span<const double> q) const {
  if (static_cast<int>(q.size()) != dim()) {
    throw Error("NNIndex: query has dimension " + std::to_string(q.size()) + ", index has " +
                std::to_string(dim()));
  }
  Neighbor best;
  double best_sq = std::numeric_limits<double>::infinity();
  if (mode_ == NNMode::Exact) {
    search_exact(0, q.data(), best, best_sq);
  } else {
    search_approx(q.data(), best, best_sq);
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

Neighbor NNIndex::query(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  const Eigen::VectorXd copy = q;
  return query(std::span<const double>(copy.data(), static_cast<std::size_t>(copy.size())));
}

std::vector<Neighbor> NNIndex::query_batch(const Eigen::Ref<const RowMatrix>& queries) const {
  if (queries.cols() != dim()) throw Error("NNIndex: query batch dimension mismatch");
  return kernels::parallel::query_batch(*this, queries);
}

NNIndex build_nn(const Eigen::Ref<const Eigen::MatrixXd>& points, NNMode mode, int width) {
  return NNIndex(points, mode, width);
}

Neighbor query_nn(const NNIndex& index, const Eigen::Ref<const Eigen::VectorXd>& q) { return index.query(q); }

}  // namespace zoomout
