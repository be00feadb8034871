#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "moero/error.hpp"

namespace moero {

using cplx = std::complex<double>;

/// Single complex 2-D image, row-major [H, W]. H is the phase-encode axis.
class ComplexImage {
 public:
  ComplexImage() = default;
  ComplexImage(int h, int w);
  ComplexImage(int h, int w, std::vector<cplx> data);

  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cplx& operator()(int y, int x) { return data_[static_cast<std::size_t>(y) * w_ + x]; }
  const cplx& operator()(int y, int x) const { return data_[static_cast<std::size_t>(y) * w_ + x]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }
  std::vector<cplx>& storage() { return data_; }

  bool same_shape(const ComplexImage& o) const { return h_ == o.h_ && w_ == o.w_; }
  bool all_finite() const;

  friend bool operator==(const ComplexImage&, const ComplexImage&) = default;

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<cplx> data_;
};

/// Stack of C complex images laid out [C, H, W]. The tag keeps coil maps and
/// k-space from being mixed up at call sites.
template <class Tag>
class CoilStack {
 public:
  CoilStack() = default;
  CoilStack(int c, int h, int w)
      : c_(c), h_(h), w_(w), data_(static_cast<std::size_t>(c) * h * w) {
    if (c < 1 || h < 1 || w < 1) throw DimensionError("coil stack dimensions must be positive");
  }
  CoilStack(int c, int h, int w, std::vector<cplx> data) : c_(c), h_(h), w_(w), data_(std::move(data)) {
    if (c < 1 || h < 1 || w < 1) throw DimensionError("coil stack dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(c) * h * w)
      throw DimensionError("coil stack payload does not match [C, H, W]");
  }

  int coils() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t plane() const { return static_cast<std::size_t>(h_) * w_; }
  std::size_t size() const { return data_.size(); }

  cplx& operator()(int c, int y, int x) { return data_[c * plane() + static_cast<std::size_t>(y) * w_ + x]; }
  const cplx& operator()(int c, int y, int x) const {
    return data_[c * plane() + static_cast<std::size_t>(y) * w_ + x];
  }

  std::span<cplx> coil(int c) { return std::span<cplx>(data_).subspan(c * plane(), plane()); }
  std::span<const cplx> coil(int c) const { return std::span<const cplx>(data_).subspan(c * plane(), plane()); }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  template <class OtherTag>
  bool same_shape(const CoilStack<OtherTag>& o) const {
    return c_ == o.coils() && h_ == o.height() && w_ == o.width();
  }
  bool matches_image(const ComplexImage& x) const { return h_ == x.height() && w_ == x.width(); }

  friend bool operator==(const CoilStack&, const CoilStack&) = default;

 private:
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<cplx> data_;
};

struct SensitivityTag {};
struct KSpaceTag {};

/// Complex coil sensitivities S_c, normalized so that sum_c |S_c|^2 = 1 per pixel.
using CoilSensitivityMaps = CoilStack<SensitivityTag>;
/// Per-coil frequency-domain data; index along H is the phase-encode line.
using KSpace = CoilStack<KSpaceTag>;

/// Row-major real matrix used for feature batches and codebooks.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  RealMatrix(std::size_t r, std::size_t c, std::vector<double> v);

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<double> row(std::size_t r) { return std::span<double>(values).subspan(r * cols, cols); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }

  friend bool operator==(const RealMatrix&, const RealMatrix&) = default;
};

/// Complex inner product <a, b> = sum conj(a_i) b_i.
cplx inner(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);
double max_abs(std::span<const cplx> a);

}  // namespace moero
