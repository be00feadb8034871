#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "moero/experiment.hpp"

using namespace moero;
using namespace moero::experiment;
using nlohmann::json;

namespace {

json base_config() {
  return json{{"seed", 11},
              {"height", 32},
              {"coils", 4},
              {"n_samples", 3},
              {"epochs", 2},
              {"masks", {{"families", {"uniform", "kt-gaussian"}}, {"accelerations", {4, 8}}, {"acs", 8}}},
              {"policy", {{"flip_h", 0.5}, {"shift", {{"p", 0.5}, {"max", 3}}}, {"noise", {{"p", 0.5}, {"level", "light"}}}}},
              {"grid",
               {{"n_cascade", 3},
                {"n_branch", 2},
                {"patch", 2},
                {"experts", {{"kind", "gaussian"}, {"strength", 0.05}, {"radius", 1}}},
                {"nav", {{"buffer", 2}}}}},
              {"codebook", {{"K", 8}, {"iters", 3}}}};
}

ExperimentResult run(const json& j) { return run_experiment(config_from_json(j, ".")); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Column `c` of every data row.
std::vector<std::string> column(const std::string& csv, int c) {
  std::vector<std::string> out;
  auto ls = lines(csv);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::istringstream in(ls[i]);
    std::string cell;
    for (int k = 0; k <= c; ++k) std::getline(in, cell, ',');
    out.push_back(cell);
  }
  return out;
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("repeated runs are byte identical") {
  const auto a = run(base_config());
  const auto b = run(base_config());
  CHECK(a.csv == b.csv);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.failures.empty());
  const auto ls = lines(a.csv);
  REQUIRE(ls.size() == 4);
  CHECK(ls[0] == kCsvHeader);
  CHECK(a.csv.find('\r') == std::string::npos);
  auto other = base_config();
  other["seed"] = 12;
  CHECK(run(other).csv != a.csv);
}

TEST_CASE("one branch and two identical branches give the same metrics") {
  auto one = base_config();
  one["grid"]["n_branch"] = 1;
  const auto a = run(one);
  const auto b = run(base_config());
  for (int c : {4, 5, 6}) CHECK(column(a.csv, c) == column(b.csv, c));
}

TEST_CASE("empty sample list gives a header-only CSV") {
  auto j = base_config();
  j["n_samples"] = 0;
  const auto r = run(j);
  CHECK(r.csv == std::string(kCsvHeader) + "\n");
  CHECK(r.failures.empty());
}

TEST_CASE("failing samples are collected, the rest still run") {
  auto j = base_config();
  j["width"] = 24;  // quarter turns need square images
  j["n_samples"] = 8;
  j["epochs"] = 1;
  j["policy"] = {{"rot90", 1.0}};
  const auto r = run(j);
  REQUIRE_FALSE(r.failures.empty());
  std::set<std::string> failed;
  for (const auto& f : r.failures) {
    failed.insert(f.sample_id);
    CHECK(f.message.find("square") != std::string::npos);
  }
  const auto ids = column(r.csv, 0);
  CHECK(ids.size() + failed.size() == 8);
  for (const auto& id : ids) CHECK(failed.count(id) == 0);
  CHECK(r.report["failures"].size() == failed.size());
}

TEST_CASE("independent routing is deterministic") {
  auto j = base_config();
  j["independent_routing"] = true;
  const auto a = run(j);
  const auto b = run(j);
  CHECK(a.csv == b.csv);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.failures.empty());
}

TEST_CASE("config validation") {
  auto j = base_config();
  j["epochs"] = 0;
  CHECK_THROWS(run(j));
  j = base_config();
  j["masks"]["accelerations"] = json::array({1});
  CHECK_THROWS(run(j));
}
