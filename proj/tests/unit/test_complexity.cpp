#include <doctest.h>

#include <cmath>

#include <portspill/complexity.hpp>
#include <portspill/error.hpp>

#include "oracles.hpp"

using namespace portspill;

namespace {

// x[l][i] for one year.
ExportPanel one_year(const oracle::Matrix& x, int year = 2010) {
  oracle::DensePanel p;
  p.first_year = year;
  p.x.push_back(x);
  return oracle::to_export_panel(p);
}

ProximityMatrix proximity_of(const ExportPanel& panel) {
  const YearRange w{panel.first_year, panel.last_year};
  return compute_proximity(compute_rca(panel, RcaPooling::PooledWindow, w), w);
}

}  // namespace

TEST_CASE("rca of a uniform panel is one everywhere") {
  const auto cube = compute_rca(one_year({{5, 5, 5}, {5, 5, 5}}), RcaPooling::PerYear);
  const auto& s = cube.slices.at(0);
  for (Eigen::Index l = 0; l < 2; ++l)
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(s.rca(l, i) == 1.0);
      CHECK(s.advantage(static_cast<std::size_t>(l), static_cast<std::size_t>(i)));
    }
  CHECK(s.ubiquity == std::vector<int>{2, 2, 2});
}

TEST_CASE("rca of the two by two example") {
  const auto cube = compute_rca(one_year({{10, 0}, {10, 10}}), RcaPooling::PerYear);
  const auto& r = cube.slices.at(0).rca;
  CHECK(r(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r(1, 1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(cube.advantage(0, 0, 2010));
  CHECK_FALSE(cube.advantage(1, 0, 2010));
  CHECK(cube.ubiquity(0, 2010) == 1);
}

TEST_CASE("single location single product has rca one") {
  const auto cube = compute_rca(one_year({{7}}), RcaPooling::PerYear);
  CHECK(cube.slices.at(0).rca(0, 0) == 1.0);
  CHECK(cube.advantage(0, 0, 2010));
}

TEST_CASE("threshold is inclusive") {
  // Location 0 share of product 0 equals the aggregate share exactly.
  const auto cube = compute_rca(one_year({{1, 1}, {1, 1}}), RcaPooling::PerYear);
  CHECK(cube.slices.at(0).rca(0, 0) == 1.0);
  CHECK(cube.advantage(0, 0, 2010));
}

TEST_CASE("locations without exports carry no advantage") {
  const auto cube = compute_rca(one_year({{3, 4}, {0, 0}}), RcaPooling::PerYear);
  const auto& s = cube.slices.at(0);
  CHECK(s.present == std::vector<std::uint8_t>{1, 0});
  CHECK_FALSE(s.advantage(1, 0));
}

TEST_CASE("empty year raises EmptyYear") {
  oracle::DensePanel p;
  p.x = {{{1.0, 2.0}}, {{0.0, 0.0}}};
  try {
    compute_rca(oracle::to_export_panel(p), RcaPooling::PerYear);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyYear);
  }
}

TEST_CASE("pooled rca sums values over the window") {
  oracle::DensePanel p;
  p.first_year = 2006;
  p.x = {{{10, 0}, {0, 10}}, {{0, 10}, {10, 0}}, {{10, 10}, {0, 10}}};
  const auto panel = oracle::to_export_panel(p);
  const auto pooled = compute_rca(panel, RcaPooling::PooledWindow);
  REQUIRE(pooled.slices.size() == 1);
  const auto ref = oracle::rca(oracle::pooled(p));
  for (Eigen::Index l = 0; l < 2; ++l)
    for (Eigen::Index i = 0; i < 2; ++i) CHECK(pooled.slices[0].rca(l, i) == doctest::Approx(ref[l][i]).epsilon(1e-14));
  const auto w = compute_rca(panel, RcaPooling::PooledWindow, YearRange{2007, 2007});
  CHECK(w.window == YearRange{2007, 2007});
  CHECK(w.slices[0].rca(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("proximity examples") {
  SUBCASE("identical location sets give one") {
    const auto prox = proximity_of(one_year({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}));
    CHECK(prox.values(0, 1) == 1.0);
    CHECK(prox.values(0, 0) == 0.0);
  }
  SUBCASE("disjoint sets give zero") {
    const auto prox = proximity_of(one_year({{1, 0}, {0, 1}}));
    CHECK(prox.values(0, 1) == 0.0);
  }
  SUBCASE("i in {A,B}, j in {B,C,D} gives one third") {
    AdvantageCube cube;
    cube.pooling = RcaPooling::PooledWindow;
    cube.window = YearRange{2010, 2010};
    cube.locations =
        std::make_shared<LocationRegistry>(LocationKind::Region, std::vector<std::string>{"A", "B", "C", "D"});
    cube.products = std::make_shared<ProductUniverse>(std::vector<ProductCode>{{"0101", 1, 5}, {"0102", 1, 5}});
    AdvantageSlice s;
    s.year = 2010;
    s.rca = Eigen::MatrixXd::Zero(4, 2);
    s.m = {1, 0,  //
           1, 1,  //
           0, 1,  //
           0, 1};
    s.present = {1, 1, 1, 1};
    s.ubiquity = {2, 3};
    cube.slices.push_back(s);
    const auto prox = compute_proximity(cube, cube.window);
    CHECK(prox.values(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(prox.values(1, 0) == prox.values(0, 1));
  }
}

TEST_CASE("proximity requires a pooled cube over the same window") {
  const auto panel = one_year({{1, 2}, {2, 1}});
  const auto yearly = compute_rca(panel, RcaPooling::PerYear);
  CHECK_THROWS_AS(compute_proximity(yearly, YearRange{2010, 2010}), Error);
}

TEST_CASE("density examples") {
  ProximityMatrix prox;
  prox.values = Eigen::MatrixXd::Zero(4, 4);
  // product 0 relates to 1 (0.6) and 2 (0.2); product 3 is isolated.
  prox.values(0, 1) = prox.values(1, 0) = 0.6;
  prox.values(0, 2) = prox.values(2, 0) = 0.2;
  AdvantageCube cube;
  cube.locations = std::make_shared<LocationRegistry>(LocationKind::Region, std::vector<std::string>{"A", "B", "C"});
  cube.products = std::make_shared<ProductUniverse>(
      std::vector<ProductCode>{{"0101", 1, 5}, {"0102", 1, 5}, {"0103", 1, 5}, {"0104", 1, 5}});
  AdvantageSlice s;
  s.year = 2010;
  s.rca = Eigen::MatrixXd::Zero(3, 4);
  s.m = {0, 1, 0, 0,  // only j1
         1, 1, 1, 1,  // all ones
         0, 0, 0, 0};
  s.present = {1, 1, 1};
  s.ubiquity = {1, 2, 1, 1};
  cube.slices.push_back(s);
  const auto d = compute_density(cube, prox);
  CHECK(d.at(0, 0, 2010).value() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(d.at(1, 0, 2010).value() == 1.0);
  CHECK(d.at(1, 1, 2010).value() == 1.0);
  CHECK(d.at(2, 0, 2010).value() == 0.0);
  CHECK_FALSE(d.at(1, 3, 2010));
  CHECK(std::isnan(d.density[0](1, 3)));
  CHECK_FALSE(d.at(0, 0, 2011));
}

TEST_CASE("nearest products order and ties") {
  const auto prox = proximity_of(one_year({{1, 1, 1, 0}, {1, 1, 0, 1}, {0, 1, 1, 1}}));
  CHECK(nearest_products(prox, "0100", 0).empty());
  const auto top = nearest_products(prox, "0100", 3);
  REQUIRE(top.size() == 3);
  for (std::size_t k = 1; k < top.size(); ++k) CHECK(top[k - 1].second >= top[k].second);

  ProximityMatrix flat;
  flat.products = prox.products;
  flat.values = Eigen::MatrixXd::Constant(4, 4, 0.5);
  flat.values.diagonal().setZero();
  const auto tied = nearest_products(flat, "0200", 2);
  CHECK(tied[0].first == "0100");
  CHECK(tied[1].first == "0300");
  CHECK_THROWS_AS(nearest_products(flat, "9999", 1), Error);
}

TEST_CASE("trm counts ports with positive routed value") {
  oracle::DensePanel p;
  p.x = {{{30.0, 4.0}}};
  auto panel = oracle::to_export_panel(p);
  CHECK_THROWS_AS(compute_trm(panel), Error);
  panel.routing[RouteKey{0, 0, 2000, "PUS"}] = 10.0;
  panel.routing[RouteKey{0, 0, 2000, "INC"}] = 20.0;
  panel.routing[RouteKey{0, 1, 2000, "PUS"}] = 4.0;
  panel.routing[RouteKey{0, 1, 2000, "INC"}] = 0.0;
  const auto trm = compute_trm(panel);
  CHECK(trm.at(CellKey{0, 0, 2000}) == 2);
  CHECK(trm.at(CellKey{0, 1, 2000}) == 1);
  CHECK_FALSE(trm.count(CellKey{0, 0, 2001}));
}

TEST_CASE("des counts distinct destination continents") {
  oracle::DensePanel p;
  p.x = {{{6.0, 1.0}}};
  auto panel = oracle::to_export_panel(p, LocationKind::Port);
  panel.routing[RouteKey{0, 0, 2000, "DE"}] = 1.0;
  panel.routing[RouteKey{0, 0, 2000, "FR"}] = 2.0;
  panel.routing[RouteKey{0, 0, 2000, "CN"}] = 3.0;
  panel.routing[RouteKey{0, 1, 2000, "CN"}] = 1.0;
  ContinentMap cont;
  cont.add("DE", Continent::Europe);
  cont.add("FR", Continent::Europe);
  cont.add("CN", Continent::Asia);
  const auto des = compute_des(panel, cont);
  CHECK(des.at(CellKey{0, 0, 2000}) == 2);
  CHECK(des.at(CellKey{0, 1, 2000}) == 1);
  panel.routing[RouteKey{0, 1, 2000, "XX"}] = 1.0;
  try {
    compute_des(panel, cont);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnmappedCountry);
  }
}
