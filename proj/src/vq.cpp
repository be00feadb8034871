#include "moero/vq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "moero/rng.hpp"

namespace moero::vq {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

void check_finite(const RealMatrix& m) {
  for (double v : m.values)
    if (!std::isfinite(v)) throw ParameterError("codewords must be finite");
}

}  // namespace

Codebook::Codebook(RealMatrix codewords, double decay)
    : Codebook(codewords, std::vector<double>(codewords.rows, 1.0), decay) {}

Codebook::Codebook(RealMatrix codewords, std::vector<double> ema_counts, double decay)
    : codewords_(std::move(codewords)), ema_counts_(std::move(ema_counts)), decay_(decay) {
  if (codewords_.rows < 2) throw ParameterError("codebook needs K >= 2");
  if (codewords_.cols < 1) throw ParameterError("codeword dimension must be >= 1");
  if (!(decay >= 0.0 && decay < 1.0)) throw ParameterError("EMA decay must lie in [0, 1)");
  if (ema_counts_.size() != codewords_.rows) throw DimensionError("ema_counts length must equal K");
  for (double c : ema_counts_)
    if (!(c >= 0.0)) throw ParameterError("ema_counts must be >= 0");
  check_finite(codewords_);
  ema_sums_ = RealMatrix(codewords_.rows, codewords_.cols);
  for (std::size_t k = 0; k < codewords_.rows; ++k)
    for (std::size_t j = 0; j < codewords_.cols; ++j) ema_sums_(k, j) = codewords_(k, j) * ema_counts_[k];
}

void Codebook::set_codeword(std::size_t k, std::span<const double> value) {
  if (value.size() != dim()) throw DimensionError("codeword dimension mismatch");
  std::copy(value.begin(), value.end(), codewords_.row(k).begin());
  for (std::size_t j = 0; j < dim(); ++j) ema_sums_(k, j) = value[j] * ema_counts_[k];
}

Quantized quantize(const RealMatrix& features, const Codebook& cb) {
  if (features.cols != cb.dim())
    throw DimensionError("feature width " + std::to_string(features.cols) + " does not match codeword dimension " +
                         std::to_string(cb.dim()));
  if (features.rows < 1) throw DimensionError("quantize needs at least one feature");
  Quantized q{std::vector<int>(features.rows), RealMatrix(features.rows, features.cols)};
  const auto n = static_cast<std::ptrdiff_t>(features.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = features.row(static_cast<std::size_t>(i));
    int best = 0;
    double best_d = squared_distance(row, cb.codeword(0));
    for (std::size_t k = 1; k < cb.size(); ++k) {
      const double d = squared_distance(row, cb.codeword(k));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    q.indices[static_cast<std::size_t>(i)] = best;
    const auto e = cb.codeword(static_cast<std::size_t>(best));
    std::copy(e.begin(), e.end(), q.values.row(static_cast<std::size_t>(i)).begin());
  }
  return q;
}

VqLossReport vq_loss(const RealMatrix& features, const Codebook& cb, double beta, double gamma) {
  if (!(beta >= 0.0) || !(gamma >= 0.0)) throw ParameterError("beta and gamma must be >= 0");
  const auto q = quantize(features, cb);
  double acc = 0.0;
  for (std::size_t i = 0; i < features.rows; ++i) acc += squared_distance(features.row(i), q.values.row(i));
  const double gap = acc / static_cast<double>(features.rows);
  return VqLossReport{gap, gap, gap, beta, gamma};
}

void ema_update(Codebook& cb, const RealMatrix& features, std::span<const int> indices, std::uint64_t seed) {
  if (features.rows != indices.size()) throw DimensionError("features and indices differ in length");
  if (features.cols != cb.dim()) throw DimensionError("feature width does not match codeword dimension");
  const std::size_t k_total = cb.size(), d = cb.dim();
  std::vector<double> counts(k_total, 0.0);
  RealMatrix sums(k_total, d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int k = indices[i];
    if (k < 0 || static_cast<std::size_t>(k) >= k_total) throw ContractViolation("codeword index out of range");
    counts[static_cast<std::size_t>(k)] += 1.0;
    const auto f = features.row(i);
    for (std::size_t j = 0; j < d; ++j) sums(static_cast<std::size_t>(k), j) += f[j];
  }

  const double decay = cb.decay_;
  for (std::size_t k = 0; k < k_total; ++k) {
    cb.ema_counts_[k] = decay * cb.ema_counts_[k] + (1.0 - decay) * counts[k];
    const double denom = std::max(cb.ema_counts_[k], kEmaEpsilon);
    for (std::size_t j = 0; j < d; ++j) {
      cb.ema_sums_(k, j) = decay * cb.ema_sums_(k, j) + (1.0 - decay) * sums(k, j);
      cb.codewords_(k, j) = cb.ema_sums_(k, j) / denom;
    }
  }

  if (features.rows == 0) return;
  Rng rng(sub_seed(seed, "dead-code"));
  for (std::size_t k = 0; k < k_total; ++k) {
    if (counts[k] > 0.0 || cb.ema_counts_[k] >= kDeadCodeThreshold) continue;
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(features.rows) - 1));
    const auto f = features.row(pick);
    cb.ema_counts_[k] = 1.0;
    for (std::size_t j = 0; j < d; ++j) cb.codewords_(k, j) = cb.ema_sums_(k, j) = f[j];
  }
}

Codebook init_kmeanspp(const RealMatrix& features, std::size_t k, double decay, std::uint64_t seed) {
  if (features.rows < 1) throw PreconditionError("k-means++ needs at least one feature");
  Rng rng(sub_seed(seed, "kmeans++"));
  RealMatrix centers(k, features.cols);
  std::vector<double> best(features.rows, std::numeric_limits<double>::infinity());
  auto place = [&](std::size_t c, std::size_t row) {
    const auto f = features.row(row);
    std::copy(f.begin(), f.end(), centers.row(c).begin());
    for (std::size_t i = 0; i < features.rows; ++i) best[i] = std::min(best[i], squared_distance(features.row(i), f));
  };
  place(0, static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(features.rows) - 1)));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double b : best) total += b;
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick + 1 < features.rows; ++pick) {
        target -= best[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(features.rows) - 1));
    }
    place(c, pick);
  }
  return Codebook(std::move(centers), decay);
}

Codebook train(const RealMatrix& features, std::size_t k, double decay, int iterations, std::uint64_t seed) {
  Codebook cb = init_kmeanspp(features, k, decay, seed);
  for (int it = 0; it < iterations; ++it) {
    const auto q = quantize(features, cb);
    ema_update(cb, features, q.indices, sub_seed(seed, "ema", std::to_string(it)));
  }
  return cb;
}

WordFrequency::WordFrequency(std::vector<double> hist) : hist_(std::move(hist)) {
  if (hist_.empty()) throw ParameterError("word frequency must be non-empty");
  double total = 0.0;
  for (double v : hist_) {
    if (!(v >= 0.0)) throw ParameterError("word frequency entries must be >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("word frequency must sum to 1");
}

WordFrequency word_frequency(std::span<const int> indices, std::size_t k, std::size_t n_pix) {
  if (n_pix != indices.size()) throw PreconditionError("n_pix must equal the number of quantized vectors");
  if (n_pix == 0) throw PreconditionError("word frequency of an empty index list");
  std::vector<std::size_t> counts(k, 0);
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= k)
      throw ContractViolation("codeword index " + std::to_string(idx) + " outside [0, " + std::to_string(k) + ")");
    ++counts[static_cast<std::size_t>(idx)];
  }
  std::vector<double> hist(k);
  for (std::size_t i = 0; i < k; ++i) hist[i] = static_cast<double>(counts[i]) / static_cast<double>(n_pix);
  return WordFrequency(std::move(hist));
}

RealMatrix extract_features(const ComplexImage& x, int patch) {
  if (patch < 1 || x.height() % patch != 0 || x.width() % patch != 0)
    throw ParameterError("patch " + std::to_string(patch) + " must divide the image size");
  const int th = x.height() / patch, tw = x.width() / patch;
  RealMatrix out(static_cast<std::size_t>(th) * tw, static_cast<std::size_t>(2 * patch * patch));
  for (int ty = 0; ty < th; ++ty)
    for (int tx = 0; tx < tw; ++tx) {
      auto row = out.row(static_cast<std::size_t>(ty) * tw + tx);
      std::size_t j = 0;
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px) {
          const cplx v = x(ty * patch + py, tx * patch + px);
          row[j++] = v.real();
          row[j++] = v.imag();
        }
    }
  return out;
}

ComplexImage fold_features(const RealMatrix& rows, int h, int w, int patch) {
  if (patch < 1 || h % patch != 0 || w % patch != 0) throw ParameterError("patch must divide the image size");
  const int th = h / patch, tw = w / patch;
  if (rows.rows != static_cast<std::size_t>(th) * tw || rows.cols != static_cast<std::size_t>(2 * patch * patch))
    throw DimensionError("feature rows do not match the patch geometry");
  ComplexImage x(h, w);
  for (int ty = 0; ty < th; ++ty)
    for (int tx = 0; tx < tw; ++tx) {
      const auto row = rows.row(static_cast<std::size_t>(ty) * tw + tx);
      std::size_t j = 0;
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px, j += 2) x(ty * patch + py, tx * patch + px) = {row[j], row[j + 1]};
    }
  return x;
}

ComplexImage prompt_fuse(const ComplexImage& x, const RealMatrix& quantized, int patch, double alpha) {
  const ComplexImage xq = fold_features(quantized, x.height(), x.width(), patch);
  if (alpha == 0.0) return x;
  ComplexImage out = x;
  auto o = out.data();
  const auto q = xq.data();
  for (std::size_t p = 0; p < o.size(); ++p) o[p] += alpha * (q[p] - o[p]);
  return out;
}

}  // namespace moero::vq
