#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace portspill {

enum class LocationKind { Region, Port };

std::string_view to_string(LocationKind kind);
LocationKind parse_location_kind(std::string_view text);

// Four-digit HS (rev. 2017) product with its section and Leamer class.
struct ProductCode {
  std::string hs4;
  int section = 0;
  std::optional<int> leamer;

  // Left-pads numeric codes to four digits ("505" -> "0505"); throws on
  // anything that is not 1-4 ASCII digits.
  static std::string normalize_hs4(std::string_view raw);
};

struct LocationId {
  LocationKind kind = LocationKind::Region;
  std::string code;

  auto operator<=>(const LocationId&) const = default;
};

// Fixed product universe, sorted by HS code. Products never observed in a
// panel still own an index so matrix shapes are stable across years.
class ProductUniverse {
 public:
  ProductUniverse() = default;
  explicit ProductUniverse(std::vector<ProductCode> products);

  std::size_t size() const noexcept { return products_.size(); }
  const ProductCode& at(std::size_t i) const { return products_.at(i); }
  std::span<const ProductCode> products() const noexcept { return products_; }

  std::optional<std::size_t> find(std::string_view hs4) const;
  // Throws Error(UnknownProductCode).
  std::size_t index_of(std::string_view hs4) const;

 private:
  std::vector<ProductCode> products_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Codes of one location kind. Region and port codes live in separate
// registries.
class LocationRegistry {
 public:
  LocationRegistry() = default;
  LocationRegistry(LocationKind kind, std::vector<std::string> codes);

  LocationKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return codes_.size(); }
  const std::string& code(std::size_t i) const { return codes_.at(i); }
  std::span<const std::string> codes() const noexcept { return codes_; }

  std::optional<std::size_t> find(std::string_view code) const;
  // Throws Error(UnknownLocationCode).
  std::size_t index_of(std::string_view code) const;

 private:
  LocationKind kind_ = LocationKind::Region;
  std::vector<std::string> codes_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Port -> region assignment. Every port belongs to exactly one region; a
// region may host several ports.
class PortRegionMap {
 public:
  PortRegionMap() = default;
  // Throws Error(ConflictingMapping) when a port is listed with two regions.
  explicit PortRegionMap(std::vector<std::pair<std::string, std::string>> pairs);

  std::span<const std::pair<std::string, std::string>> pairs() const noexcept { return pairs_; }
  std::optional<std::string> region_of(std::string_view port) const;
  std::vector<std::string> ports_of(std::string_view region) const;
  std::vector<std::string> ports() const;
  std::vector<std::string> regions() const;

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;  // sorted by port
};

struct CellKey {
  std::int32_t location = 0;
  std::int32_t product = 0;
  std::int32_t year = 0;

  auto operator<=>(const CellKey&) const = default;
};

// Region panels route through ports; port panels route to destination
// countries. `via` holds the port or country code.
struct RouteKey {
  std::int32_t location = 0;
  std::int32_t product = 0;
  std::int32_t year = 0;
  std::string via;

  auto operator<=>(const RouteKey&) const = default;
};

// Location x product x year export values in US dollars.
struct ExportPanel {
  LocationKind kind = LocationKind::Region;
  std::shared_ptr<const LocationRegistry> locations;
  std::shared_ptr<const ProductUniverse> products;
  // Registry the routing `via` codes must belong to (ports for region
  // panels). Null when routing targets are free-form (countries).
  std::shared_ptr<const LocationRegistry> via_registry;
  std::map<CellKey, double> cells;
  std::map<RouteKey, double> routing;
  int first_year = 0;
  int last_year = -1;

  bool empty() const noexcept { return cells.empty(); }
  bool has_routing() const noexcept { return !routing.empty(); }
  std::vector<int> years() const;
  double value(std::size_t location, std::size_t product, int year) const;
};

enum class ViolationKind { NegativeValue, NonFiniteValue, YearGap, RoutingMismatch, UnknownCode };

struct Violation {
  ViolationKind kind;
  int year = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

ValidationReport validate_panel(const ExportPanel& panel);

// Product complexity values keyed by (product code, year). Gaps stay absent.
class PciTable {
 public:
  void set(std::string code, int year, double value);
  std::optional<double> get(std::string_view code, int year) const;
  std::size_t size() const noexcept { return values_.size(); }
  const std::map<std::pair<std::string, int>, double>& values() const noexcept { return values_; }

 private:
  std::map<std::pair<std::string, int>, double> values_;
};

enum class Continent { Africa, Asia, Europe, NorthAmerica, SouthAmerica, Oceania };

std::string_view to_string(Continent c);
Continent parse_continent(std::string_view text);

class ContinentMap {
 public:
  // Throws Error(ConflictingMapping) if `country` is already mapped elsewhere.
  void add(std::string country, Continent continent);
  // Throws Error(UnmappedCountry).
  Continent at(std::string_view country) const;
  std::optional<Continent> find(std::string_view country) const;
  std::size_t size() const noexcept { return map_.size(); }
  const std::map<std::string, Continent, std::less<>>& entries() const noexcept { return map_; }

 private:
  std::map<std::string, Continent, std::less<>> map_;
};

// Registry files (UTF-8 CSV with header):
//   products:  hs4,section,leamer        (leamer blank -> bundled chapter table,
//                                          "unknown" -> no class)
//   locations: code[,name]
//   ports map: port,region[,...]         (extra columns ignored)
ProductUniverse load_product_registry(const std::string& path);
void write_product_registry(const ProductUniverse& universe, const std::string& path);
LocationRegistry load_location_registry(const std::string& path, LocationKind kind);
void write_location_registry(const LocationRegistry& registry, const std::string& path);
PortRegionMap load_port_region_map(const std::string& path);
void write_port_region_map(const PortRegionMap& map, const std::string& path);

// Bundled assets under data/.
std::string bundled_data_path(std::string_view file);
PortRegionMap reference_port_region_map();
std::optional<int> bundled_leamer(std::string_view hs4);
int hs_section(std::string_view hs4);

}  // namespace portspill
