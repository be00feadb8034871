#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moero/types.hpp"

namespace moero::vq {

inline constexpr std::size_t kDefaultCodebookSize = 1024;
inline constexpr int kDefaultPatch = 2;
inline constexpr double kEmaEpsilon = 1e-5;
inline constexpr double kDeadCodeThreshold = 1e-3;

/// K x d codebook with exponential-moving-average accumulators.
class Codebook {
 public:
  Codebook() = default;
  /// Accumulators start at unit mass per codeword (ema_sums = codewords).
  Codebook(RealMatrix codewords, double decay);
  Codebook(RealMatrix codewords, std::vector<double> ema_counts, double decay);

  std::size_t size() const { return codewords_.rows; }
  std::size_t dim() const { return codewords_.cols; }
  double decay() const { return decay_; }

  const RealMatrix& codewords() const { return codewords_; }
  std::span<const double> codeword(std::size_t k) const { return codewords_.row(k); }
  const std::vector<double>& ema_counts() const { return ema_counts_; }
  const RealMatrix& ema_sums() const { return ema_sums_; }

  void set_codeword(std::size_t k, std::span<const double> value);

  friend void ema_update(Codebook& cb, const RealMatrix& features, std::span<const int> indices, std::uint64_t seed);

 private:
  RealMatrix codewords_;
  std::vector<double> ema_counts_;
  RealMatrix ema_sums_;
  double decay_ = 0.99;
};

struct Quantized {
  std::vector<int> indices;
  RealMatrix values;
};

/// Nearest codeword under squared Euclidean distance; ties go to the smallest index.
Quantized quantize(const RealMatrix& features, const Codebook& cb);

struct VqLossReport {
  double codebook_loss = 0.0;
  double commitment_loss = 0.0;
  double alignment_loss = 0.0;
  double beta = 0.25;
  double gamma = 0.0;

  double total() const { return codebook_loss + beta * commitment_loss + gamma * alignment_loss; }
};

/// Three-term VQ loss evaluated on values. Without autograd the stop-gradient
/// is the identity, so all three terms equal the mean squared quantization gap;
/// they are reported separately with their weights.
VqLossReport vq_loss(const RealMatrix& features, const Codebook& cb, double beta = 0.25, double gamma = 0.0);

/// One EMA step over an assigned batch, followed by dead-code revival: codewords
/// that received no features and whose EMA count fell below kDeadCodeThreshold
/// are re-seeded onto a random feature of the batch.
void ema_update(Codebook& cb, const RealMatrix& features, std::span<const int> indices, std::uint64_t seed);

/// k-means++ seeding over a feature batch.
Codebook init_kmeanspp(const RealMatrix& features, std::size_t k, double decay, std::uint64_t seed);

/// k-means++ init followed by `iterations` quantize + EMA rounds.
Codebook train(const RealMatrix& features, std::size_t k, double decay, int iterations, std::uint64_t seed);

/// Normalized token histogram (sums to 1).
class WordFrequency {
 public:
  WordFrequency() = default;
  explicit WordFrequency(std::vector<double> hist);

  std::size_t size() const { return hist_.size(); }
  std::span<const double> values() const { return hist_; }
  double operator[](std::size_t k) const { return hist_[k]; }

  friend bool operator==(const WordFrequency&, const WordFrequency&) = default;

 private:
  std::vector<double> hist_;
};

/// bincount(indices) / n_pix. n_pix must equal indices.size().
WordFrequency word_frequency(std::span<const int> indices, std::size_t k, std::size_t n_pix);

/// Non-overlapping patch x patch tiles, one row each: re/im interleaved per
/// pixel in row-major tile order, so d = 2 * patch^2.
RealMatrix extract_features(const ComplexImage& x, int patch);

/// Inverse of extract_features.
ComplexImage fold_features(const RealMatrix& rows, int h, int w, int patch);

/// x + alpha * (fold(quantized) - x). alpha == 0 returns x unchanged.
ComplexImage prompt_fuse(const ComplexImage& x, const RealMatrix& quantized, int patch, double alpha);

}  // namespace moero::vq
