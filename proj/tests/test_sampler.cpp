#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "moero/error.hpp"
#include "moero/sampler.hpp"

using namespace moero;
using namespace moero::sampler;

namespace {

std::vector<SampleRecord> split(int majority, int minority, const std::string& cat = "contrast") {
  std::vector<SampleRecord> r;
  for (int i = 0; i < majority + minority; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%04d", i);
    r.push_back({id, {{cat, i < majority ? "cine" : "lge"}}});
  }
  return r;
}

}  // namespace

TEST_CASE("90/10 multipliers") {
  CHECK(std::abs(multiplier(100, 2, 10) - 4.2) < 1e-9);
  CHECK(std::abs(multiplier(100, 2, 90) - (1.0 + (50.0 / 90.0 - 1.0) * 0.8)) < 1e-9);
  CHECK(multiplier(100, 2, 90) == doctest::Approx(0.64444).epsilon(1e-4));
  const auto recs = split(90, 10);
  const auto w = update_weights(recs, {"contrast"});
  CHECK(std::abs(w.at("s0000") - 0.644444444444) < 1e-9);
  CHECK(std::abs(w.at("s0095") - 4.2) < 1e-9);
}

TEST_CASE("groups at average size keep weight 1") {
  const auto w = update_weights(split(50, 50), {"contrast"});
  for (const auto& [id, v] : w) CHECK(v == 1.0);
  CHECK(multiplier(60, 3, 20) == 1.0);
}

TEST_CASE("two categories multiply and commute") {
  auto recs = split(30, 10);
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].attributes["center"] = i % 4 == 0 ? "siteA" : "siteB";
  const auto ab = update_weights(recs, {"contrast", "center"});
  const auto ba = update_weights(recs, {"center", "contrast"});
  const auto a = update_weights(recs, {"contrast"});
  const auto b = update_weights(recs, {"center"});
  for (const auto& r : recs) {
    CHECK(ab.at(r.id) == doctest::Approx(a.at(r.id) * b.at(r.id)).epsilon(1e-14));
    CHECK(ab.at(r.id) == doctest::Approx(ba.at(r.id)).epsilon(1e-14));
  }
}

TEST_CASE("prior weights compound") {
  const auto recs = split(90, 10);
  const auto once = update_weights(recs, {"contrast"});
  const auto twice = update_weights(recs, {"contrast"}, once);
  CHECK(twice.at("s0099") == doctest::Approx(4.2 * 4.2));
}

TEST_CASE("group mass ratio") {
  const auto recs = split(90, 10);
  const auto m = group_mass(recs, update_weights(recs, {"contrast"}), "contrast");
  CHECK(m.at("cine") == doctest::Approx(58.0));
  CHECK(m.at("lge") == doctest::Approx(42.0));
  CHECK(m.at("cine") / m.at("lge") <= 1.4);
  for (int minority = 1; minority < 50; ++minority) {
    const auto r = split(100 - minority, minority);
    const auto mm = group_mass(r, update_weights(r, {"contrast"}), "contrast");
    const double before = (100.0 - minority) / minority;
    CHECK(mm.at("cine") / mm.at("lge") < before);
  }
}

TEST_CASE("stochastic rounding") {
  const WeightTable one{{"a", 1.0}, {"b", 3.0}};
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto d = draws_from_weights(one, s);
    CHECK(d.at("a") == 1);
    CHECK(d.at("b") == 3);
  }
  double sum = 0;
  const WeightTable t{{"x", 4.2}, {"y", 0.6444}};
  constexpr int n = 100000;
  for (int s = 0; s < n; ++s) {
    const auto d = draws_from_weights(t, static_cast<std::uint64_t>(s));
    CHECK((d.at("x") == 4 || d.at("x") == 5));
    CHECK(d.at("y") <= 1);
    sum += static_cast<double>(d.at("x"));
  }
  const double mean = sum / n;
  CHECK(mean >= 4.15);
  CHECK(mean <= 4.25);
  CHECK(draws_from_weights(t, 7) == draws_from_weights(t, 7));
}

TEST_CASE("multipliers stay above 0.2 so the clamp never fires") {
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 100; ++i) recs.push_back({"m" + std::to_string(i), {{"c", "big"}}});
  for (int g = 0; g < 99; ++g) recs.push_back({"g" + std::to_string(g), {{"c", "grp" + std::to_string(g)}}});
  UpdateStats stats;
  const auto w = update_weights(recs, {"c"}, {}, &stats);
  CHECK(stats.clamped == 0);
  CHECK(w.at("m0") == doctest::Approx(1 + (1.99 / 100 - 1) * 0.8));
  for (std::size_t c = 1; c <= 100000; c *= 10) CHECK(multiplier(100000, 1000, c) > 0.2);
}

TEST_CASE("errors") {
  const auto recs = split(3, 1);
  CHECK_THROWS_AS(multiplier(10, 0, 1), ParameterError);
  CHECK_THROWS_AS(multiplier(10, 2, 0), ParameterError);
  CHECK_THROWS_AS(update_weights({}, {"c"}), ParameterError);
  CHECK_THROWS_AS(update_weights(recs, {"missing"}), ParameterError);
  CHECK_THROWS_AS(update_weights(recs, {"contrast"}, {{"s0000", 1.0}}), ParameterError);
  CHECK_THROWS_AS(draws_from_weights({{"a", 0.0}}, 0), ParameterError);
}
