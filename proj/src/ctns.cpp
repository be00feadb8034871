#include "moero/ctns.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace moero::ctns {
namespace {

constexpr std::array<unsigned char, 8> kMagic{'C', 'T', 'N', 'S', '0', '0', '0', '1'};

static_assert(std::endian::native == std::endian::little, "CTNS I/O assumes a little-endian host");

std::size_t element_size(DType d) {
  switch (d) {
    case DType::Complex64: return 8;
    case DType::Float32: return 4;
    case DType::UInt8: return 1;
  }
  throw FormatError("unknown CTNS dtype");
}

std::size_t product(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void check_dims(const std::vector<std::uint32_t>& dims) {
  if (dims.size() > 4) throw FormatError("CTNS rank must be <= 4");
}

template <class T>
void put(std::vector<std::byte>& out, T v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::byte> in, std::size_t off) {
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  return v;
}

std::vector<std::uint32_t> u32_dims(std::initializer_list<int> dims) {
  std::vector<std::uint32_t> out;
  for (int d : dims) out.push_back(static_cast<std::uint32_t>(d));
  return out;
}

void expect(const Tensor& t, DType d, std::size_t rank_lo, std::size_t rank_hi, const char* what) {
  if (t.dtype != d) throw FormatError(std::string(what) + ": unexpected CTNS dtype");
  if (t.dims.size() < rank_lo || t.dims.size() > rank_hi) throw FormatError(std::string(what) + ": unexpected CTNS rank");
}

template <class Stack>
Stack to_stack(const Tensor& t, const char* what) {
  expect(t, DType::Complex64, 2, 3, what);
  if (t.dims.size() == 2) return Stack(1, static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), t.to_complex());
  return Stack(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]), t.to_complex());
}

}  // namespace

std::size_t Tensor::count() const { return product(dims); }

Tensor Tensor::from_complex(std::vector<std::uint32_t> dims, std::span<const cplx> values) {
  check_dims(dims);
  if (product(dims) != values.size()) throw DimensionError("CTNS dims do not match value count");
  Tensor t{DType::Complex64, std::move(dims), {}};
  t.payload.resize(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float re = static_cast<float>(values[i].real()), im = static_cast<float>(values[i].imag());
    std::memcpy(t.payload.data() + 8 * i, &re, 4);
    std::memcpy(t.payload.data() + 8 * i + 4, &im, 4);
  }
  return t;
}

Tensor Tensor::from_real(std::vector<std::uint32_t> dims, std::span<const double> values) {
  check_dims(dims);
  if (product(dims) != values.size()) throw DimensionError("CTNS dims do not match value count");
  Tensor t{DType::Float32, std::move(dims), {}};
  t.payload.resize(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = static_cast<float>(values[i]);
    std::memcpy(t.payload.data() + 4 * i, &v, 4);
  }
  return t;
}

Tensor Tensor::from_bytes(std::vector<std::uint32_t> dims, std::span<const std::uint8_t> values) {
  check_dims(dims);
  if (product(dims) != values.size()) throw DimensionError("CTNS dims do not match value count");
  Tensor t{DType::UInt8, std::move(dims), {}};
  t.payload.resize(values.size());
  if (!values.empty()) std::memcpy(t.payload.data(), values.data(), values.size());
  return t;
}

std::vector<cplx> Tensor::to_complex() const {
  if (dtype != DType::Complex64) throw FormatError("CTNS tensor is not complex64");
  std::vector<cplx> out(count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    float re, im;
    std::memcpy(&re, payload.data() + 8 * i, 4);
    std::memcpy(&im, payload.data() + 8 * i + 4, 4);
    out[i] = {re, im};
  }
  return out;
}

std::vector<double> Tensor::to_real() const {
  if (dtype != DType::Float32) throw FormatError("CTNS tensor is not float32");
  std::vector<double> out(count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    float v;
    std::memcpy(&v, payload.data() + 4 * i, 4);
    out[i] = v;
  }
  return out;
}

std::vector<std::uint8_t> Tensor::to_bytes() const {
  if (dtype != DType::UInt8) throw FormatError("CTNS tensor is not uint8");
  std::vector<std::uint8_t> out(count());
  if (!out.empty()) std::memcpy(out.data(), payload.data(), out.size());
  return out;
}

std::vector<std::byte> encode(const Tensor& t) {
  check_dims(t.dims);
  if (t.payload.size() != t.count() * element_size(t.dtype)) throw FormatError("CTNS payload size mismatch");
  std::vector<std::byte> out;
  out.reserve(12 + 4 * t.dims.size() + t.payload.size());
  for (auto c : kMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(static_cast<std::byte>(t.dtype));
  out.push_back(static_cast<std::byte>(t.dims.size()));
  out.push_back(std::byte{0});
  out.push_back(std::byte{0});
  for (auto d : t.dims) put(out, d);
  out.insert(out.end(), t.payload.begin(), t.payload.end());
  return out;
}

Tensor decode(std::span<const std::byte> bytes) {
  if (bytes.size() < 12) throw FormatError("CTNS header truncated");
  for (std::size_t i = 0; i < kMagic.size(); ++i)
    if (bytes[i] != static_cast<std::byte>(kMagic[i])) throw FormatError("bad CTNS magic");
  const auto code = static_cast<std::uint8_t>(bytes[8]);
  if (code > 2) throw FormatError("unknown CTNS dtype code " + std::to_string(code));
  const auto rank = static_cast<std::size_t>(bytes[9]);
  if (rank > 4) throw FormatError("CTNS rank must be <= 4");
  if (bytes[10] != std::byte{0} || bytes[11] != std::byte{0}) throw FormatError("CTNS reserved bytes must be zero");
  if (bytes.size() < 12 + 4 * rank) throw FormatError("CTNS dims truncated");
  Tensor t;
  t.dtype = static_cast<DType>(code);
  for (std::size_t i = 0; i < rank; ++i) t.dims.push_back(get<std::uint32_t>(bytes, 12 + 4 * i));
  const std::size_t off = 12 + 4 * rank;
  const std::size_t need = t.count() * element_size(t.dtype);
  if (bytes.size() - off != need) throw FormatError("CTNS payload size mismatch");
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(off), bytes.end());
  return t;
}

void write(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("write failed: " + path.string());
}

Tensor read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(std::as_bytes(std::span<const char>(raw)));
}

Tensor to_tensor(const ComplexImage& x) { return Tensor::from_complex(u32_dims({x.height(), x.width()}), x.data()); }

Tensor to_tensor(const KSpace& y) {
  return Tensor::from_complex(u32_dims({y.coils(), y.height(), y.width()}), y.data());
}

Tensor to_tensor(const CoilSensitivityMaps& s) {
  return Tensor::from_complex(u32_dims({s.coils(), s.height(), s.width()}), s.data());
}

Tensor to_tensor(const RealMatrix& m) {
  return Tensor::from_real({static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)}, m.values);
}

ComplexImage to_image(const Tensor& t) {
  expect(t, DType::Complex64, 2, 3, "image");
  if (t.dims.size() == 3 && t.dims[0] != 1) throw FormatError("image: expected a single [H, W] plane");
  const auto h = t.dims[t.dims.size() - 2], w = t.dims.back();
  return ComplexImage(static_cast<int>(h), static_cast<int>(w), t.to_complex());
}

KSpace to_kspace(const Tensor& t) { return to_stack<KSpace>(t, "k-space"); }

CoilSensitivityMaps to_maps(const Tensor& t) { return to_stack<CoilSensitivityMaps>(t, "coil maps"); }

RealMatrix to_matrix(const Tensor& t) {
  expect(t, DType::Float32, 1, 2, "matrix");
  const std::size_t rows = t.dims.size() == 2 ? t.dims[0] : 1;
  return RealMatrix(rows, t.dims.back(), t.to_real());
}

}  // namespace moero::ctns
