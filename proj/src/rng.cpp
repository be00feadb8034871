#include "moero/rng.hpp"

#include <cmath>
#include <numbers>

namespace moero {

Rng::Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // rejection sampling to avoid modulo bias
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t master, std::string_view component, std::string_view sample_id) {
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](unsigned char b) {
    h ^= b;
    h *= kPrime;
  };
  for (int i = 0; i < 8; ++i) feed(static_cast<unsigned char>(master >> (8 * i)));
  for (char ch : component) feed(static_cast<unsigned char>(ch));
  feed(0xff);
  for (char ch : sample_id) feed(static_cast<unsigned char>(ch));
  return mix64(h);
}

}  // namespace moero
