#include "moero/types.hpp"

#include <cmath>
#include <string>

namespace moero {

ComplexImage::ComplexImage(int h, int w) : h_(h), w_(w), data_(static_cast<std::size_t>(h) * w) {
  if (h < 4 || w < 4) throw DimensionError("image must be at least 4x4, got " + std::to_string(h) + "x" + std::to_string(w));
}

ComplexImage::ComplexImage(int h, int w, std::vector<cplx> data) : h_(h), w_(w), data_(std::move(data)) {
  if (h < 4 || w < 4) throw DimensionError("image must be at least 4x4, got " + std::to_string(h) + "x" + std::to_string(w));
  if (data_.size() != static_cast<std::size_t>(h) * w) throw DimensionError("image payload does not match [H, W]");
}

bool ComplexImage::all_finite() const {
  for (const auto& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

RealMatrix::RealMatrix(std::size_t r, std::size_t c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != r * c) throw DimensionError("matrix payload does not match rows x cols");
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw DimensionError("inner product of unequal lengths");
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(std::span<const cplx> a) {
  double acc = 0.0;
  for (const auto& v : a) acc += std::norm(v);
  return std::sqrt(acc);
}

double max_abs(std::span<const cplx> a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace moero
