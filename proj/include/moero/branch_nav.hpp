#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "moero/types.hpp"
#include "moero/vq.hpp"

namespace moero::nav {

inline constexpr std::size_t kDefaultBufferSize = 512;
inline constexpr double kBalanceRatio = 3.0;
inline constexpr int kKmeansMaxIterations = 100;

enum class RouteReason {
  Uninitialized,  ///< no cluster kernel yet: least-used branch
  Balance,        ///< max/min routing count ratio above 3: least-used branch
  Kernel,         ///< cluster kernel assignment
};

const char* to_string(RouteReason r);

struct RouteDecision {
  int branch = 0;
  RouteReason reason = RouteReason::Uninitialized;
  /// What the kernel would have chosen, when initialized.
  std::optional<int> kernel_branch;

  bool overridden() const { return kernel_branch && *kernel_branch != branch; }
};

struct KMeansResult {
  RealMatrix centers;  ///< L2-normalized rows
  std::vector<int> assignments;
  int iterations = 0;
  bool reseeded = false;  ///< an empty or duplicate cluster had to be re-seeded
};

/// L2-normalized copy of a vector (zero vectors stay zero).
std::vector<double> normalized(std::span<const double> v);
double cosine(std::span<const double> a, std::span<const double> b);

/// Spherical k-means: rows normalized, assignment by max cosine similarity
/// (ties to the smallest center index), centers renormalized every iteration,
/// k-means++ seeding on cosine distance.
KMeansResult spherical_kmeans(const RealMatrix& points, int k, std::uint64_t seed,
                              int max_iterations = kKmeansMaxIterations);

/// Sparse router: buffered word frequencies, cosine k-means cluster kernel,
/// and a least-used override whenever routing becomes unbalanced.
class BranchNavState {
 public:
  explicit BranchNavState(int n_branch, std::size_t buffer_capacity = kDefaultBufferSize, std::uint64_t kmeans_seed = 0);

  int branches() const { return n_branch_; }
  std::size_t buffer_capacity() const { return capacity_; }
  const std::vector<std::vector<double>>& buffer() const { return buffer_; }
  const std::optional<RealMatrix>& centers() const { return centers_; }
  bool kernel_initialized() const { return centers_.has_value(); }
  const std::vector<std::uint64_t>& routing_counts() const { return counts_; }
  int epoch() const { return epoch_; }
  bool buffering_enabled() const { return epoch_ >= 2; }
  std::uint64_t kmeans_seed() const { return seed_; }
  bool degenerate_kernel() const { return degenerate_; }

  /// Buffer a sample from epoch 2 on; a full buffer initializes the kernel.
  void observe(const vq::WordFrequency& wf);
  /// Cluster the buffer into the kernel and clear it.
  void init_kernel();
  /// Choose exactly one branch and count it.
  RouteDecision route(const vq::WordFrequency& wf);
  void advance_epoch() { ++epoch_; }

  /// Kernel assignment without touching counts. Exact cosine ties go to the
  /// least-used tied center, then the smallest index.
  int kernel_assign(std::span<const double> wf) const;
  /// max(C)/min(C) > 3, with min = 0 and max > 0 counted as unbalanced.
  bool unbalanced() const;
  int least_used() const;

  /// Restore a persisted snapshot.
  void restore(std::vector<std::uint64_t> counts, int epoch, std::optional<RealMatrix> centers);

 private:
  int n_branch_;
  std::size_t capacity_;
  std::uint64_t seed_;
  std::vector<std::vector<double>> buffer_;
  std::optional<RealMatrix> centers_;
  std::vector<std::uint64_t> counts_;
  int epoch_ = 1;
  bool degenerate_ = false;
};

}  // namespace moero::nav
