#include "moero/branch_nav.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "moero/rng.hpp"

namespace moero::nav {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

int best_center(const RealMatrix& centers, std::span<const double> p) {
  int best = 0;
  double best_s = dot(p, centers.row(0));
  for (std::size_t c = 1; c < centers.rows; ++c) {
    const double s = dot(p, centers.row(c));
    if (s > best_s) {
      best_s = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

// Centers that agree up to rounding are snapped to the earlier copy so that
// kernel ties are exact. Returns whether any pair was merged.
bool snap_duplicate_rows(RealMatrix& m) {
  bool any = false;
  for (std::size_t a = 0; a < m.rows; ++a)
    for (std::size_t b = a + 1; b < m.rows; ++b)
      if (dot(m.row(a), m.row(b)) >= 1.0 - 1e-12) {
        std::copy(m.row(a).begin(), m.row(a).end(), m.row(b).begin());
        any = true;
      }
  return any;
}

}  // namespace

const char* to_string(RouteReason r) {
  switch (r) {
    case RouteReason::Uninitialized: return "uninitialized";
    case RouteReason::Balance: return "balance";
    case RouteReason::Kernel: return "kernel";
  }
  return "unknown";
}

std::vector<double> normalized(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0)
    for (auto& x : out) x /= n;
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

KMeansResult spherical_kmeans(const RealMatrix& points, int k, std::uint64_t seed, int max_iterations) {
  if (k < 1) throw ParameterError("k-means needs k >= 1");
  if (points.rows < static_cast<std::size_t>(k))
    throw PreconditionError("k-means needs at least k points, got " + std::to_string(points.rows));
  const std::size_t n = points.rows, d = points.cols;
  RealMatrix unit(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = normalized(points.row(i));
    std::copy(v.begin(), v.end(), unit.row(i).begin());
  }

  KMeansResult res{RealMatrix(static_cast<std::size_t>(k), d), std::vector<int>(n, -1), 0, false};
  auto& centers = res.centers;
  Rng rng(sub_seed(seed, "spherical-kmeans"));

  // k-means++ on cosine distance 1 - cos
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  auto place = [&](std::size_t c, std::size_t row) {
    std::copy(unit.row(row).begin(), unit.row(row).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], std::max(0.0, 1.0 - dot(unit.row(i), unit.row(row))));
  };
  place(0, static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : dist) total += v * v;
    std::size_t pick;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= dist[pick] * dist[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      res.reseeded = true;
    }
    place(static_cast<std::size_t>(c), pick);
  }

  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = best_center(centers, unit.row(i));
      if (a != res.assignments[i]) {
        res.assignments[i] = a;
        changed = true;
      }
    }
    res.iterations = it + 1;
    if (!changed && it > 0) break;

    RealMatrix sums(static_cast<std::size_t>(k), d);
    std::vector<std::size_t> members(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(res.assignments[i]);
      ++members[a];
      for (std::size_t j = 0; j < d; ++j) sums(a, j) += unit(i, j);
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (members[c] == 0) {
        // re-seed an empty cluster on the point least similar to its center
        std::size_t far = 0;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          const double s = dot(unit.row(i), centers.row(static_cast<std::size_t>(res.assignments[i])));
          if (s < worst) {
            worst = s;
            far = i;
          }
        }
        std::copy(unit.row(far).begin(), unit.row(far).end(), centers.row(c).begin());
        res.reseeded = true;
        continue;
      }
      const auto v = normalized(sums.row(c));
      std::copy(v.begin(), v.end(), centers.row(c).begin());
    }
  }
  return res;
}

BranchNavState::BranchNavState(int n_branch, std::size_t buffer_capacity, std::uint64_t kmeans_seed)
    : n_branch_(n_branch), capacity_(buffer_capacity), seed_(kmeans_seed), counts_(static_cast<std::size_t>(n_branch), 0) {
  if (n_branch < 1) throw ParameterError("branch count must be >= 1");
  if (buffer_capacity < static_cast<std::size_t>(n_branch)) throw ParameterError("buffer must hold at least one vector per branch");
}

void BranchNavState::observe(const vq::WordFrequency& wf) {
  if (!buffering_enabled() || centers_ || buffer_.size() >= capacity_) return;
  if (!buffer_.empty() && buffer_.front().size() != wf.size()) throw DimensionError("word frequency length changed");
  buffer_.emplace_back(wf.values().begin(), wf.values().end());
  if (buffer_.size() == capacity_) init_kernel();
}

void BranchNavState::init_kernel() {
  if (buffer_.size() < static_cast<std::size_t>(n_branch_))
    throw PreconditionError("kernel init needs at least " + std::to_string(n_branch_) + " buffered vectors, have " +
                            std::to_string(buffer_.size()));
  RealMatrix pts(buffer_.size(), buffer_.front().size());
  for (std::size_t i = 0; i < buffer_.size(); ++i) std::copy(buffer_[i].begin(), buffer_[i].end(), pts.row(i).begin());
  auto km = spherical_kmeans(pts, n_branch_, seed_);
  degenerate_ = snap_duplicate_rows(km.centers);
  if (degenerate_) spdlog::warn("branchnav: duplicate cluster centers; kernel ties fall through to least-used");
  centers_ = std::move(km.centers);
  buffer_.clear();
  buffer_.shrink_to_fit();
}

int BranchNavState::least_used() const {
  return static_cast<int>(std::min_element(counts_.begin(), counts_.end()) - counts_.begin());
}

bool BranchNavState::unbalanced() const {
  const auto [lo, hi] = std::minmax_element(counts_.begin(), counts_.end());
  if (*hi == 0) return false;
  if (*lo == 0) return true;
  return static_cast<double>(*hi) / static_cast<double>(*lo) > kBalanceRatio;
}

int BranchNavState::kernel_assign(std::span<const double> wf) const {
  if (!centers_) throw PreconditionError("cluster kernel not initialized");
  if (wf.size() != centers_->cols) throw DimensionError("word frequency length does not match the kernel");
  const auto p = normalized(wf);
  double best_s = -std::numeric_limits<double>::infinity();
  int best = 0;
  for (std::size_t c = 0; c < centers_->rows; ++c) {
    const double s = dot(p, centers_->row(c));
    if (s > best_s || (s == best_s && counts_[c] < counts_[static_cast<std::size_t>(best)])) {
      best_s = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

RouteDecision BranchNavState::route(const vq::WordFrequency& wf) {
  RouteDecision d;
  if (!centers_) {
    d.reason = RouteReason::Uninitialized;
    d.branch = least_used();
  } else {
    d.kernel_branch = kernel_assign(wf.values());
    if (unbalanced()) {
      d.reason = RouteReason::Balance;
      d.branch = least_used();
    } else {
      d.reason = RouteReason::Kernel;
      d.branch = *d.kernel_branch;
    }
  }
  if (d.overridden())
    spdlog::debug("branchnav: balance override sends sample to branch {} instead of {}", d.branch, *d.kernel_branch);
  ++counts_[static_cast<std::size_t>(d.branch)];
  return d;
}

void BranchNavState::restore(std::vector<std::uint64_t> counts, int epoch, std::optional<RealMatrix> centers) {
  if (counts.size() != static_cast<std::size_t>(n_branch_)) throw DimensionError("routing counts length must equal branch count");
  if (epoch < 1) throw ParameterError("epoch must be >= 1");
  if (centers && centers->rows != static_cast<std::size_t>(n_branch_)) throw DimensionError("centers must have one row per branch");
  counts_ = std::move(counts);
  epoch_ = epoch;
  centers_ = std::move(centers);
  if (centers_)
    for (std::size_t c = 0; c < centers_->rows; ++c) {
      const auto v = normalized(centers_->row(c));
      std::copy(v.begin(), v.end(), centers_->row(c).begin());
    }
  buffer_.clear();
}

}  // namespace moero::nav
