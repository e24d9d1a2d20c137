#include "portspill/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"

namespace portspill {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::UnknownProductCode: return "UnknownProductCode";
    case ErrorKind::UnknownLocationCode: return "UnknownLocationCode";
    case ErrorKind::MissingConcordance: return "MissingConcordance";
    case ErrorKind::ConflictingMapping: return "ConflictingMapping";
    case ErrorKind::EmptyYear: return "EmptyYear";
    case ErrorKind::UnknownProduct: return "UnknownProduct";
    case ErrorKind::MissingRouting: return "MissingRouting";
    case ErrorKind::UnmappedCountry: return "UnmappedCountry";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::UnmappedPort: return "UnmappedPort";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::MissingCovariate: return "MissingCovariate";
    case ErrorKind::UnknownCoefficient: return "UnknownCoefficient";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorKind::MissingUpstreamArtifact: return "MissingUpstreamArtifact";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(LocationKind kind) {
  return kind == LocationKind::Region ? "region" : "port";
}

LocationKind parse_location_kind(std::string_view text) {
  if (text == "region") return LocationKind::Region;
  if (text == "port") return LocationKind::Port;
  throw Error(ErrorKind::ConfigError, "unknown location kind '" + std::string(text) + "'");
}

std::string ProductCode::normalize_hs4(std::string_view raw) {
  if (raw.empty() || raw.size() > 4 ||
      !std::all_of(raw.begin(), raw.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw Error(ErrorKind::UnknownProductCode, "not a four-digit HS code: '" + std::string(raw) + "'");
  return std::string(4 - raw.size(), '0') + std::string(raw);
}

ProductUniverse::ProductUniverse(std::vector<ProductCode> products) : products_(std::move(products)) {
  for (auto& p : products_) {
    p.hs4 = ProductCode::normalize_hs4(p.hs4);
    if (p.leamer && (*p.leamer < 1 || *p.leamer > 10))
      throw Error(ErrorKind::MalformedRow, "Leamer class out of range for " + p.hs4);
  }
  std::sort(products_.begin(), products_.end(),
            [](const ProductCode& a, const ProductCode& b) { return a.hs4 < b.hs4; });
  for (std::size_t i = 0; i < products_.size(); ++i) {
    if (!index_.emplace(products_[i].hs4, i).second)
      throw Error(ErrorKind::ConflictingMapping, "duplicate product " + products_[i].hs4);
  }
}

std::optional<std::size_t> ProductUniverse::find(std::string_view hs4) const {
  std::string key;
  try {
    key = ProductCode::normalize_hs4(hs4);
  } catch (const Error&) {
    return std::nullopt;
  }
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ProductUniverse::index_of(std::string_view hs4) const {
  if (auto i = find(hs4)) return *i;
  throw Error(ErrorKind::UnknownProductCode, std::string(hs4));
}

LocationRegistry::LocationRegistry(LocationKind kind, std::vector<std::string> codes)
    : kind_(kind), codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (codes_[i].empty()) throw Error(ErrorKind::MalformedRow, "empty location code");
    if (!index_.emplace(codes_[i], i).second)
      throw Error(ErrorKind::ConflictingMapping, "duplicate location " + codes_[i]);
  }
}

std::optional<std::size_t> LocationRegistry::find(std::string_view code) const {
  auto it = index_.find(std::string(code));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LocationRegistry::index_of(std::string_view code) const {
  if (auto i = find(code)) return *i;
  throw Error(ErrorKind::UnknownLocationCode, std::string(to_string(kind_)) + " " + std::string(code));
}

PortRegionMap::PortRegionMap(std::vector<std::pair<std::string, std::string>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].first == pairs[i - 1].first)
      throw Error(ErrorKind::ConflictingMapping,
                  "port " + pairs[i].first + " mapped to " + pairs[i - 1].second + " and " + pairs[i].second);
  }
  pairs_ = std::move(pairs);
}

std::optional<std::string> PortRegionMap::region_of(std::string_view port) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), port,
                             [](const auto& p, std::string_view key) { return p.first < key; });
  if (it == pairs_.end() || it->first != port) return std::nullopt;
  return it->second;
}

std::vector<std::string> PortRegionMap::ports_of(std::string_view region) const {
  std::vector<std::string> out;
  for (const auto& [port, r] : pairs_)
    if (r == region) out.push_back(port);
  return out;
}

std::vector<std::string> PortRegionMap::ports() const {
  std::vector<std::string> out;
  for (const auto& p : pairs_) out.push_back(p.first);
  return out;
}

std::vector<std::string> PortRegionMap::regions() const {
  std::set<std::string> s;
  for (const auto& p : pairs_) s.insert(p.second);
  return {s.begin(), s.end()};
}

std::vector<int> ExportPanel::years() const {
  std::vector<int> out;
  for (int y = first_year; y <= last_year; ++y) out.push_back(y);
  return out;
}

double ExportPanel::value(std::size_t location, std::size_t product, int year) const {
  auto it = cells.find(CellKey{static_cast<std::int32_t>(location), static_cast<std::int32_t>(product), year});
  return it == cells.end() ? 0.0 : it->second;
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

ValidationReport validate_panel(const ExportPanel& panel) {
  ValidationReport report;
  const std::size_t n_loc = panel.locations ? panel.locations->size() : 0;
  const std::size_t n_prod = panel.products ? panel.products->size() : 0;
  std::set<int> years;

  for (const auto& [key, value] : panel.cells) {
    years.insert(key.year);
    if (key.location < 0 || static_cast<std::size_t>(key.location) >= n_loc || key.product < 0 ||
        static_cast<std::size_t>(key.product) >= n_prod) {
      report.violations.push_back({ViolationKind::UnknownCode, key.year, "cell index out of registry range"});
      continue;
    }
    if (!std::isfinite(value)) {
      report.violations.push_back({ViolationKind::NonFiniteValue, key.year,
                                   panel.locations->code(key.location) + "/" + panel.products->at(key.product).hs4});
    } else if (value < 0.0) {
      report.violations.push_back({ViolationKind::NegativeValue, key.year,
                                   panel.locations->code(key.location) + "/" + panel.products->at(key.product).hs4});
    }
  }
  if (!years.empty()) {
    for (int y = *years.begin(); y <= *years.rbegin(); ++y)
      if (!years.count(y)) report.violations.push_back({ViolationKind::YearGap, y, "no cells for year"});
  }

  if (panel.has_routing()) {
    std::map<CellKey, double> routed;
    for (const auto& [key, value] : panel.routing) {
      if (!std::isfinite(value) || value < 0.0)
        report.violations.push_back({ViolationKind::NegativeValue, key.year, "routing via " + key.via});
      if (panel.via_registry && !panel.via_registry->find(key.via))
        report.violations.push_back({ViolationKind::UnknownCode, key.year, "routing target " + key.via});
      routed[CellKey{key.location, key.product, key.year}] += value;
    }
    if (panel.kind == LocationKind::Region) {
      auto check = [&](const CellKey& key, double cell, double sum) {
        const double scale = std::max(std::abs(cell), std::abs(sum));
        if (std::abs(cell - sum) > 1e-6 * scale)
          report.violations.push_back({ViolationKind::RoutingMismatch, key.year,
                                       "cell " + csv::format_double(cell) + " vs routed " + csv::format_double(sum)});
      };
      for (const auto& [key, cell] : panel.cells) {
        auto it = routed.find(key);
        check(key, cell, it == routed.end() ? 0.0 : it->second);
      }
      for (const auto& [key, sum] : routed)
        if (!panel.cells.count(key)) check(key, 0.0, sum);
    }
  }
  return report;
}

void PciTable::set(std::string code, int year, double value) {
  values_[{std::move(code), year}] = value;
}

std::optional<double> PciTable::get(std::string_view code, int year) const {
  auto it = values_.find({std::string(code), year});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(Continent c) {
  switch (c) {
    case Continent::Africa: return "Africa";
    case Continent::Asia: return "Asia";
    case Continent::Europe: return "Europe";
    case Continent::NorthAmerica: return "NorthAmerica";
    case Continent::SouthAmerica: return "SouthAmerica";
    case Continent::Oceania: return "Oceania";
  }
  return "?";
}

Continent parse_continent(std::string_view text) {
  std::string key;
  for (char c : text)
    if (c != ' ' && c != '_' && c != '-') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "africa") return Continent::Africa;
  if (key == "asia") return Continent::Asia;
  if (key == "europe") return Continent::Europe;
  if (key == "northamerica") return Continent::NorthAmerica;
  if (key == "southamerica") return Continent::SouthAmerica;
  if (key == "oceania") return Continent::Oceania;
  throw Error(ErrorKind::MalformedRow, "unknown continent '" + std::string(text) + "'");
}

void ContinentMap::add(std::string country, Continent continent) {
  auto [it, inserted] = map_.emplace(country, continent);
  if (!inserted && it->second != continent)
    throw Error(ErrorKind::ConflictingMapping, country);
}

std::optional<Continent> ContinentMap::find(std::string_view country) const {
  auto it = map_.find(country);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

Continent ContinentMap::at(std::string_view country) const {
  if (auto c = find(country)) return *c;
  throw Error(ErrorKind::UnmappedCountry, std::string(country));
}

// --- registries -------------------------------------------------------------

namespace {

std::string at_line(const csv::Reader& r) {
  return r.path() + ":" + std::to_string(r.line_number());
}

}  // namespace

int hs_section(std::string_view hs4) {
  const std::string code = ProductCode::normalize_hs4(hs4);
  const int chapter = (code[0] - '0') * 10 + (code[1] - '0');
  // Last chapter of sections I..XXI.
  static constexpr int kLastChapter[] = {5, 14, 15, 24, 27, 38, 40, 43, 46, 49, 63,
                                         67, 70, 71, 83, 85, 89, 92, 93, 96, 99};
  for (int s = 0; s < 21; ++s)
    if (chapter <= kLastChapter[s]) return s + 1;
  return 21;
}

std::string bundled_data_path(std::string_view file) {
  return std::string(PORTSPILL_DATA_DIR) + "/" + std::string(file);
}

std::optional<int> bundled_leamer(std::string_view hs4) {
  static const std::map<std::string, int> table = [] {
    std::map<std::string, int> t;
    csv::Reader r(bundled_data_path("leamer_hs2.csv"));
    const auto c_hs2 = r.require_column("hs2");
    const auto c_leamer = r.require_column("leamer");
    std::vector<std::string> f;
    while (r.next(f)) t[f.at(c_hs2)] = static_cast<int>(csv::parse_int(f.at(c_leamer)).value());
    return t;
  }();
  const std::string code = ProductCode::normalize_hs4(hs4);
  auto it = table.find(code.substr(0, 2));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

ProductUniverse load_product_registry(const std::string& path) {
  csv::Reader r(path);
  const auto c_hs4 = r.require_column("hs4");
  const auto c_section = r.column("section");
  const auto c_leamer = r.column("leamer");
  std::vector<ProductCode> products;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != r.header().size()) throw Error(ErrorKind::MalformedRow, at_line(r) + ": field count");
    ProductCode p;
    p.hs4 = ProductCode::normalize_hs4(f[c_hs4]);
    p.section = hs_section(p.hs4);
    if (c_section && !f[*c_section].empty()) {
      auto s = csv::parse_int(f[*c_section]);
      if (!s || *s < 1 || *s > 21) throw Error(ErrorKind::MalformedRow, at_line(r) + ": bad section");
      p.section = static_cast<int>(*s);
    }
    const std::string leamer = c_leamer ? f[*c_leamer] : std::string();
    if (leamer.empty()) {
      p.leamer = bundled_leamer(p.hs4);
    } else if (leamer != "unknown") {
      auto l = csv::parse_int(leamer);
      if (!l || *l < 1 || *l > 10) throw Error(ErrorKind::MalformedRow, at_line(r) + ": bad Leamer class");
      p.leamer = static_cast<int>(*l);
    }
    products.push_back(std::move(p));
  }
  return ProductUniverse(std::move(products));
}

void write_product_registry(const ProductUniverse& universe, const std::string& path) {
  csv::Writer w;
  w.row({"hs4", "section", "leamer"});
  for (const auto& p : universe.products())
    w.row({p.hs4, std::to_string(p.section), p.leamer ? std::to_string(*p.leamer) : "unknown"});
  csv::write_if_changed(path, w.str());
}

LocationRegistry load_location_registry(const std::string& path, LocationKind kind) {
  csv::Reader r(path);
  const auto c_code = r.require_column("code");
  std::vector<std::string> codes;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (c_code >= f.size()) throw Error(ErrorKind::MalformedRow, at_line(r));
    codes.push_back(f[c_code]);
  }
  return LocationRegistry(kind, std::move(codes));
}

void write_location_registry(const LocationRegistry& registry, const std::string& path) {
  csv::Writer w;
  w.row({"code"});
  for (const auto& c : registry.codes()) w.row({c});
  csv::write_if_changed(path, w.str());
}

PortRegionMap load_port_region_map(const std::string& path) {
  csv::Reader r(path);
  const auto c_port = r.require_column("port");
  const auto c_region = r.require_column("region");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (std::max(c_port, c_region) >= f.size()) throw Error(ErrorKind::MalformedRow, at_line(r));
    pairs.emplace_back(f[c_port], f[c_region]);
  }
  return PortRegionMap(std::move(pairs));
}

void write_port_region_map(const PortRegionMap& map, const std::string& path) {
  csv::Writer w;
  w.row({"port", "region"});
  for (const auto& [port, region] : map.pairs()) w.row({port, region});
  csv::write_if_changed(path, w.str());
}

PortRegionMap reference_port_region_map() {
  return load_port_region_map(bundled_data_path("port_regions.csv"));
}

}  // namespace portspill
