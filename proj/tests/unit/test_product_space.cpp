#include <doctest.h>

#include <random>

#include <json.hpp>

#include <portspill/error.hpp>
#include <portspill/product_space.hpp>

#include "oracles.hpp"

using namespace portspill;

namespace {

ProximityMatrix three(double a, double b, double c) {
  ProximityMatrix p;
  p.products = std::make_shared<ProductUniverse>(
      std::vector<ProductCode>{{"0101", 1, 5}, {"8541", 16, 9}, {"9999", 21, std::nullopt}});
  p.values = Eigen::MatrixXd::Zero(3, 3);
  p.values(0, 1) = p.values(1, 0) = a;
  p.values(0, 2) = p.values(2, 0) = b;
  p.values(1, 2) = p.values(2, 1) = c;
  p.window = YearRange{2000, 2000};
  return p;
}

ExportPanel panel_for(const ProximityMatrix& p) {
  ExportPanel e;
  e.products = p.products;
  e.locations = std::make_shared<LocationRegistry>(LocationKind::Region, std::vector<std::string>{"R"});
  e.cells[CellKey{0, 0, 2000}] = 3.0;
  e.cells[CellKey{0, 0, 2001}] = 100.0;  // outside the window
  e.cells[CellKey{0, 1, 2000}] = 5.0;
  e.first_year = 2000;
  e.last_year = 2001;
  return e;
}

}  // namespace

TEST_CASE("threshold one keeps only the maximum spanning tree") {
  const auto p = three(0.9, 0.5, 0.1);
  const auto g = build_product_space(p, panel_for(p), 1.0);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].source == 0);
  CHECK(g.edges[0].target == 1);
  CHECK(g.edges[0].weight == 0.9);
  CHECK(g.edges[1].target == 2);
  CHECK(g.edges[1].weight == 0.5);
  for (const auto& e : g.edges) CHECK(e.mst);
  CHECK(g.nodes[0].size == 3.0);
  CHECK(g.nodes[1].size == 5.0);
  CHECK(g.nodes[1].leamer == std::optional<int>(9));
  CHECK_FALSE(g.nodes[2].leamer);
}

TEST_CASE("threshold zero keeps every positive pair") {
  const auto p = three(0.9, 0.5, 0.1);
  const auto g = build_product_space(p, panel_for(p), 0.0);
  CHECK(g.edges.size() == 3);
  CHECK_FALSE(g.edges[2].mst);
}

TEST_CASE("zero proximity pairs never become edges") {
  const auto p = three(0.0, 0.4, 0.0);
  const auto g = build_product_space(p, panel_for(p), 0.0);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].source == 0);
  CHECK(g.edges[0].target == 2);
}

TEST_CASE("single product graph") {
  ProximityMatrix p;
  p.products = std::make_shared<ProductUniverse>(std::vector<ProductCode>{{"0101", 1, 5}});
  p.values = Eigen::MatrixXd::Zero(1, 1);
  ExportPanel e;
  e.products = p.products;
  const auto g = build_product_space(p, e, 0.5);
  CHECK(g.nodes.size() == 1);
  CHECK(g.edges.empty());
}

TEST_CASE("mst agrees with brute force over spanning trees") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = three(u(rng), u(rng), u(rng));
    const auto g = build_product_space(p, panel_for(p), 1.0);
    const double w01 = p.values(0, 1), w02 = p.values(0, 2), w12 = p.values(1, 2);
    const double best = std::max({w01 + w02, w01 + w12, w02 + w12});
    double got = 0.0;
    for (const auto& e : g.edges) got += e.weight;
    CHECK(got == doctest::Approx(best).epsilon(1e-15));
  }
}

TEST_CASE("graph exports") {
  const auto p = three(0.9, 0.5, 0.1);
  const auto g = build_product_space(p, panel_for(p), 0.3);
  const auto j = nlohmann::json::parse(graph_to_json(g));
  CHECK(j["nodes"].size() == 3);
  CHECK(j["edges"].size() == 2);
  CHECK(j["nodes"][2]["leamer"].is_null());
  CHECK(j["edges"][0]["mst"] == true);
  const auto xml = graph_to_graphml(g);
  CHECK(xml.find("<graphml") != std::string::npos);
  CHECK(xml.find("8541") != std::string::npos);
  CHECK_THROWS_AS(build_product_space(p, panel_for(p), 1.5), Error);
}
