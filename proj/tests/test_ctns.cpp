#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "moero/ctns.hpp"
#include "moero/mri_core.hpp"

using namespace moero;

TEST_CASE("header layout") {
  const std::vector<cplx> v{{1.0, -2.0}, {0.5, 0.25}};
  const auto bytes = ctns::encode(ctns::Tensor::from_complex({2}, v));
  REQUIRE(bytes.size() == 12 + 4 + 2 * 8);
  const char magic[] = "CTNS0001";
  for (int i = 0; i < 8; ++i) CHECK(bytes[static_cast<std::size_t>(i)] == static_cast<std::byte>(magic[i]));
  CHECK(bytes[8] == std::byte{0});
  CHECK(bytes[9] == std::byte{1});
  CHECK(bytes[10] == std::byte{0});
  CHECK(bytes[11] == std::byte{0});
  CHECK(bytes[12] == std::byte{2});
  CHECK(bytes[13] == std::byte{0});
}

TEST_CASE("complex64 round trip") {
  const auto x = make_phantom(16, 20, 3);
  const auto back = ctns::to_image(ctns::decode(ctns::encode(ctns::to_tensor(x))));
  REQUIRE(back.same_shape(x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(back.data()[i] - x.data()[i]) < 1e-6);
  }
}

TEST_CASE("coil maps and k-space keep [C, H, W]") {
  const auto s = make_coil_maps(3, 16, 16, 1);
  const auto t = ctns::to_tensor(s);
  CHECK(t.dims == std::vector<std::uint32_t>{3, 16, 16});
  const auto back = ctns::to_maps(ctns::decode(ctns::encode(t)));
  CHECK(back.coils() == 3);
  CHECK(ctns::to_kspace(t).coils() == 3);
}

TEST_CASE("real and byte tensors") {
  RealMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(ctns::to_matrix(ctns::decode(ctns::encode(ctns::to_tensor(m)))) == m);
  const std::vector<std::uint8_t> b{0, 1, 1, 0};
  CHECK(ctns::decode(ctns::encode(ctns::Tensor::from_bytes({4}, b))).to_bytes() == b);
}

TEST_CASE("malformed input is rejected") {
  auto bytes = ctns::encode(ctns::Tensor::from_bytes({2}, std::vector<std::uint8_t>{1, 0}));
  SUBCASE("magic") {
    bytes[0] = std::byte{'X'};
    CHECK_THROWS_AS(ctns::decode(bytes), FormatError);
  }
  SUBCASE("dtype") {
    bytes[8] = std::byte{7};
    CHECK_THROWS_AS(ctns::decode(bytes), FormatError);
  }
  SUBCASE("rank") {
    bytes[9] = std::byte{5};
    CHECK_THROWS_AS(ctns::decode(bytes), FormatError);
  }
  SUBCASE("reserved") {
    bytes[11] = std::byte{1};
    CHECK_THROWS_AS(ctns::decode(bytes), FormatError);
  }
  SUBCASE("truncated payload") {
    bytes.pop_back();
    CHECK_THROWS_AS(ctns::decode(bytes), FormatError);
  }
  SUBCASE("wrong typed view") {
    CHECK_THROWS_AS(ctns::decode(bytes).to_complex(), FormatError);
  }
}

TEST_CASE("file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "moero_test_ctns.ctns";
  const auto x = make_phantom(16, 16, 9);
  ctns::write(path, ctns::to_tensor(x));
  CHECK(ctns::to_image(ctns::read(path)).same_shape(x));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(ctns::read(path), FormatError);
}
