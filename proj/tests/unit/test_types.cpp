#include <doctest.h>

#include <cmath>
#include <limits>

#include <portspill/error.hpp>
#include <portspill/types.hpp>

using namespace portspill;

namespace {

ExportPanel tiny_panel(std::vector<std::tuple<int, int, int, double>> cells) {
  ExportPanel p;
  p.locations = std::make_shared<LocationRegistry>(LocationKind::Region, std::vector<std::string>{"RA", "RB"});
  p.products = std::make_shared<ProductUniverse>(std::vector<ProductCode>{{"0101", 1, 5}, {"8541", 16, 9}});
  for (auto [l, i, y, v] : cells) p.cells[CellKey{l, i, y}] = v;
  p.first_year = p.cells.empty() ? 0 : p.cells.begin()->first.year;
  p.last_year = p.first_year;
  for (const auto& [k, v] : p.cells) {
    p.first_year = std::min(p.first_year, k.year);
    p.last_year = std::max(p.last_year, k.year);
  }
  return p;
}

}  // namespace

TEST_CASE("hs4 codes are left padded and validated") {
  CHECK(ProductCode::normalize_hs4("505") == "0505");
  CHECK(ProductCode::normalize_hs4("8541") == "8541");
  CHECK_THROWS_AS(ProductCode::normalize_hs4("85411"), Error);
  CHECK_THROWS_AS(ProductCode::normalize_hs4("85a1"), Error);
  CHECK_THROWS_AS(ProductCode::normalize_hs4(""), Error);
}

TEST_CASE("product universe sorts codes and rejects duplicates") {
  ProductUniverse u({{"8541", 16, 9}, {"101", 1, 5}});
  CHECK(u.size() == 2);
  CHECK(u.at(0).hs4 == "0101");
  CHECK(u.index_of("8541") == 1);
  CHECK(u.find("0101") == std::optional<std::size_t>(0));
  CHECK_FALSE(u.find("9999"));
  try {
    u.index_of("9999");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownProductCode);
  }
  CHECK_THROWS_AS(ProductUniverse({{"0101", 1, 5}, {"101", 1, 5}}), Error);
  CHECK_THROWS_AS(ProductUniverse({{"0101", 1, 11}}), Error);
}

TEST_CASE("location registries keep kinds separate") {
  LocationRegistry regions(LocationKind::Region, {"RBUS", "RINC"});
  CHECK(regions.kind() == LocationKind::Region);
  CHECK(regions.index_of("RINC") == 1);
  try {
    regions.index_of("PUS");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLocationCode);
  }
  CHECK(parse_location_kind(to_string(LocationKind::Port)) == LocationKind::Port);
}

TEST_CASE("bundled port-region map lists every port with its region") {
  const auto map = reference_port_region_map();
  CHECK(map.ports().size() == 41);
  const auto regions = load_location_registry(bundled_data_path("regions.csv"), LocationKind::Region);
  CHECK(regions.size() == 26);
  for (const auto& r : map.regions()) CHECK(regions.find(r));
  CHECK(map.region_of("PUS") == std::optional<std::string>("RBUS"));
  const auto busan = map.ports_of("RBUS");
  CHECK(std::find(busan.begin(), busan.end(), "PSN") != busan.end());
}

TEST_CASE("port-region map rejects a port with two regions") {
  try {
    PortRegionMap({{"PUS", "RBUS"}, {"PUS", "RINC"}});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConflictingMapping);
  }
  CHECK_NOTHROW(PortRegionMap({{"PUS", "RBUS"}, {"PUS", "RBUS"}}));
}

TEST_CASE("hs sections and bundled leamer classes") {
  CHECK(hs_section("0101") == 1);
  CHECK(hs_section("8541") == 16);
  CHECK(hs_section("2709") == 5);
  CHECK(bundled_leamer("0101") == std::optional<int>(5));
  CHECK(bundled_leamer("2709") == std::optional<int>(1));
}

TEST_CASE("continent map detects conflicting duplicates") {
  ContinentMap m;
  m.add("DE", Continent::Europe);
  m.add("DE", Continent::Europe);
  CHECK(m.at("DE") == Continent::Europe);
  try {
    m.add("DE", Continent::Asia);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConflictingMapping);
  }
  try {
    (void)m.at("FR");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnmappedCountry);
  }
  CHECK(parse_continent("North America") == Continent::NorthAmerica);
}

TEST_CASE("validate_panel flags negative values and year gaps") {
  SUBCASE("negative cell") {
    const auto r = validate_panel(tiny_panel({{0, 0, 2006, 1.0}, {1, 1, 2006, -3.0}}));
    CHECK(r.count(ViolationKind::NegativeValue) == 1);
  }
  SUBCASE("year gap") {
    const auto r = validate_panel(tiny_panel({{0, 0, 2006, 1.0}, {1, 1, 2008, 2.0}}));
    REQUIRE(r.count(ViolationKind::YearGap) == 1);
    CHECK(r.violations.front().year == 2007);
  }
  SUBCASE("non-finite value") {
    const auto r = validate_panel(tiny_panel({{0, 0, 2006, std::numeric_limits<double>::infinity()}}));
    CHECK(r.count(ViolationKind::NonFiniteValue) == 1);
  }
  SUBCASE("routing that sums to the cells") {
    auto p = tiny_panel({{0, 0, 2006, 30.0}, {1, 1, 2006, 5.0}});
    p.routing[RouteKey{0, 0, 2006, "PUS"}] = 10.0;
    p.routing[RouteKey{0, 0, 2006, "INC"}] = 20.0;
    p.routing[RouteKey{1, 1, 2006, "PUS"}] = 5.0;
    CHECK(validate_panel(p).ok());
    p.routing[RouteKey{1, 1, 2006, "PUS"}] = 4.0;
    CHECK(validate_panel(p).count(ViolationKind::RoutingMismatch) == 1);
  }
}

TEST_CASE("pci table keeps gaps absent") {
  PciTable t;
  t.set("8541", 2010, 0.8);
  CHECK(t.get("8541", 2010) == std::optional<double>(0.8));
  CHECK_FALSE(t.get("8541", 2011));
}
