#pragma once

// CTNS tensor container:
//   bytes 0-7   magic "CTNS0001"
//   byte  8     dtype (0 complex64 interleaved re/im, 1 float32, 2 uint8)
//   byte  9     rank r <= 4
//   bytes 10-11 reserved, zero
//   then r little-endian u32 dims, then the row-major little-endian payload.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "moero/types.hpp"

namespace moero::ctns {

enum class DType : std::uint8_t { Complex64 = 0, Float32 = 1, UInt8 = 2 };

struct Tensor {
  DType dtype = DType::Float32;
  std::vector<std::uint32_t> dims;
  std::vector<std::byte> payload;

  std::size_t count() const;

  static Tensor from_complex(std::vector<std::uint32_t> dims, std::span<const cplx> values);
  static Tensor from_real(std::vector<std::uint32_t> dims, std::span<const double> values);
  static Tensor from_bytes(std::vector<std::uint32_t> dims, std::span<const std::uint8_t> values);

  std::vector<cplx> to_complex() const;
  std::vector<double> to_real() const;
  std::vector<std::uint8_t> to_bytes() const;
};

std::vector<std::byte> encode(const Tensor& t);
Tensor decode(std::span<const std::byte> bytes);

void write(const std::filesystem::path& path, const Tensor& t);
Tensor read(const std::filesystem::path& path);

// Typed helpers for the core array types.
Tensor to_tensor(const ComplexImage& x);
Tensor to_tensor(const KSpace& y);
Tensor to_tensor(const CoilSensitivityMaps& s);
Tensor to_tensor(const RealMatrix& m);

ComplexImage to_image(const Tensor& t);
KSpace to_kspace(const Tensor& t);
CoilSensitivityMaps to_maps(const Tensor& t);
RealMatrix to_matrix(const Tensor& t);

}  // namespace moero::ctns
