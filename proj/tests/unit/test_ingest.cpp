#include <doctest.h>

#include <algorithm>
#include <random>

#include <portspill/error.hpp>
#include <portspill/ingest.hpp>

#include "scratch.hpp"

using namespace portspill;

namespace {

PanelRegistries registries() {
  PanelRegistries r;
  r.locations = std::make_shared<LocationRegistry>(LocationKind::Region, std::vector<std::string>{"RBUS", "RINC"});
  r.products = std::make_shared<ProductUniverse>(std::vector<ProductCode>{{"0101", 1, 5}, {"8541", 16, 9}});
  r.via = std::make_shared<LocationRegistry>(LocationKind::Port, std::vector<std::string>{"INC", "PUS"});
  return r;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("duplicate keys are summed") {
  scratch::Dir d("ingest");
  const auto path = d.write("x.csv",
                            "region,product,year,port,value\n"
                            "RBUS,8541,2010,PUS,100\n"
                            "RBUS,8541,2010,INC,50\n");
  const auto p = load_export_csv(path, LocationKind::Region, ExportSchema::defaults(LocationKind::Region), registries());
  REQUIRE(p.cells.size() == 1);
  CHECK(p.cells.begin()->second == 150.0);
  CHECK(p.routing.size() == 2);
  CHECK(p.first_year == 2010);
  CHECK(p.last_year == 2010);
}

TEST_CASE("negative and malformed values are rejected with a line number") {
  scratch::Dir d("ingest");
  const auto neg = d.write("neg.csv", "region,product,year,port,value\nRBUS,8541,2010,PUS,-5\n");
  try {
    load_export_csv(neg, LocationKind::Region, ExportSchema::defaults(LocationKind::Region), registries());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedRow);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  const auto short_row = d.write("short.csv", "region,product,year,port,value\nRBUS,8541,2010\n");
  CHECK(kind_of([&] {
          load_export_csv(short_row, LocationKind::Region, ExportSchema::defaults(LocationKind::Region), registries());
        }) == ErrorKind::MalformedRow);
}

TEST_CASE("unknown codes are reported by kind") {
  scratch::Dir d("ingest");
  const auto schema = ExportSchema::defaults(LocationKind::Region);
  const auto bad_prod = d.write("p.csv", "region,product,year,port,value\nRBUS,9999,2010,PUS,1\n");
  CHECK(kind_of([&] { load_export_csv(bad_prod, LocationKind::Region, schema, registries()); }) ==
        ErrorKind::UnknownProductCode);
  const auto bad_loc = d.write("l.csv", "region,product,year,port,value\nRXXX,8541,2010,PUS,1\n");
  CHECK(kind_of([&] { load_export_csv(bad_loc, LocationKind::Region, schema, registries()); }) ==
        ErrorKind::UnknownLocationCode);
  const auto bad_port = d.write("v.csv", "region,product,year,port,value\nRBUS,8541,2010,XXX,1\n");
  CHECK(kind_of([&] { load_export_csv(bad_port, LocationKind::Region, schema, registries()); }) ==
        ErrorKind::UnknownLocationCode);
}

TEST_CASE("empty file with a header gives an empty panel") {
  scratch::Dir d("ingest");
  const auto path = d.write("e.csv", "region,product,year,port,value\n");
  const auto p = load_export_csv(path, LocationKind::Region, ExportSchema::defaults(LocationKind::Region), registries());
  CHECK(p.empty());
}

TEST_CASE("schema mapping renames columns and short codes are padded") {
  scratch::Dir d("ingest");
  const auto path = d.write("m.csv", "\xEF\xBB\xBF" "yr,where,hs,usd\n2011,RINC,101,7.5\n");
  ExportSchema s;
  s.location = "where";
  s.product = "hs";
  s.year = "yr";
  s.value = "usd";
  const auto p = load_export_csv(path, LocationKind::Region, s, registries());
  REQUIRE(p.cells.size() == 1);
  const auto& [key, v] = *p.cells.begin();
  CHECK(key.location == 1);
  CHECK(key.product == 0);
  CHECK(v == 7.5);
  CHECK_FALSE(p.has_routing());
}

TEST_CASE("row order does not change the loaded panel") {
  scratch::Dir d("ingest");
  std::vector<std::string> rows;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int k = 0; k < 60; ++k) {
    const char* reg = k % 2 ? "RBUS" : "RINC";
    const char* prod = k % 3 ? "0101" : "8541";
    const char* port = k % 5 ? "PUS" : "INC";
    rows.push_back(std::string(reg) + "," + prod + "," + std::to_string(2010 + k % 4) + "," + port + "," +
                   std::to_string(u(rng)));
  }
  std::string a = "region,product,year,port,value\n", b = a;
  for (const auto& r : rows) a += r + "\n";
  std::shuffle(rows.begin(), rows.end(), rng);
  for (const auto& r : rows) b += r + "\n";
  const auto schema = ExportSchema::defaults(LocationKind::Region);
  const auto pa = load_export_csv(d.write("a.csv", a), LocationKind::Region, schema, registries());
  const auto pb = load_export_csv(d.write("b.csv", b), LocationKind::Region, schema, registries());
  CHECK(pa.cells == pb.cells);
  CHECK(pa.routing == pb.routing);
  CHECK(export_panel_csv(pa) == export_panel_csv(pb));
}

TEST_CASE("canonical export text loads back to the same panel") {
  scratch::Dir d("ingest");
  const auto path = d.write("x.csv",
                            "region,product,year,port,value\n"
                            "RBUS,8541,2010,PUS,100.25\n"
                            "RBUS,8541,2010,INC,0.1\n"
                            "RINC,0101,2011,INC,3\n");
  const auto schema = ExportSchema::defaults(LocationKind::Region);
  const auto p = load_export_csv(path, LocationKind::Region, schema, registries());
  const auto q = load_export_csv(d.write("y.csv", export_panel_csv(p)), LocationKind::Region, schema, registries());
  CHECK(p.cells == q.cells);
  CHECK(p.routing == q.routing);
}

TEST_CASE("pci conversion averages over concordance sources") {
  scratch::Dir d("ingest");
  const auto conc = load_concordance(d.write("c.csv",
                                             "hs2002,hs2017\n"
                                             "8541,8541\n"
                                             "3701,3707\n"
                                             "3702,3707\n"
                                             "0101,0101\n"));
  CHECK(conc.sources("3707")->size() == 2);
  CHECK(conc.targets("3701")->count("3707") == 1);
  const auto raw = load_pci_csv(d.write("p.csv",
                                        "hs2002,year,pci\n"
                                        "8541,2010,0.8\n"
                                        "3701,2010,0.2\n"
                                        "3702,2010,0.6\n"));
  const auto pci = convert_pci(raw, conc);
  CHECK(pci.get("8541", 2010) == std::optional<double>(0.8));
  REQUIRE(pci.get("3707", 2010));
  CHECK(*pci.get("3707", 2010) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_FALSE(pci.get("0101", 2010));

  PciTable orphan;
  orphan.set("9999", 2010, 1.0);
  CHECK(kind_of([&] { convert_pci(orphan, conc); }) == ErrorKind::MissingConcordance);
}

TEST_CASE("continent file loading") {
  scratch::Dir d("ingest");
  const auto m = load_continent_map(d.write("ok.csv", "country,continent\nDE,Europe\nCN,Asia\n"));
  CHECK(m.at("DE") == Continent::Europe);
  CHECK(m.size() == 2);
  CHECK(kind_of([&] { load_continent_map(d.write("bad.csv", "country,continent\nDE,Europe\nDE,Asia\n")); }) ==
        ErrorKind::ConflictingMapping);
  const auto empty = load_continent_map(d.write("empty.csv", "country,continent\n"));
  CHECK(empty.size() == 0);
}

TEST_CASE("missing files raise Io") {
  CHECK(kind_of([] { load_concordance("/nonexistent/portspill/c.csv"); }) == ErrorKind::Io);
}
