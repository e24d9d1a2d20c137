#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "portspill/types.hpp"

namespace portspill {

struct YearRange {
  int first = 0;
  int last = -1;

  bool contains(int year) const noexcept { return year >= first && year <= last; }
  bool empty() const noexcept { return last < first; }
  auto operator<=>(const YearRange&) const = default;
};

enum class RcaPooling { PerYear, PooledWindow };

// RCA, binary advantage and ubiquity for one year (or one pooled window).
// Locations with zero total exports have `present == 0` and no advantage.
struct AdvantageSlice {
  int year = 0;                      // first year of the window when pooled
  Eigen::MatrixXd rca;               // locations x products
  std::vector<std::uint8_t> m;       // locations x products, row-major
  std::vector<std::uint8_t> present;  // per location
  std::vector<int> ubiquity;         // per product

  bool advantage(std::size_t location, std::size_t product) const {
    return m[location * static_cast<std::size_t>(rca.cols()) + product] != 0;
  }
};

struct AdvantageCube {
  LocationKind kind = LocationKind::Region;
  RcaPooling pooling = RcaPooling::PerYear;
  YearRange window;
  std::shared_ptr<const LocationRegistry> locations;
  std::shared_ptr<const ProductUniverse> products;
  std::vector<AdvantageSlice> slices;  // ascending years; one slice when pooled

  const AdvantageSlice* slice(int year) const;
  bool advantage(std::size_t location, std::size_t product, int year) const;
  int ubiquity(std::size_t product, int year) const;
  std::vector<int> years() const;
};

// Balassa RCA with an inclusive threshold: M = 1 iff RCA >= 1.
// PooledWindow sums values over `window` (default: the panel's full range)
// before taking the ratio. Throws Error(EmptyYear) for a year (or window) with
// zero total.
AdvantageCube compute_rca(const ExportPanel& panel, RcaPooling pooling,
                          std::optional<YearRange> window = std::nullopt);

enum class ProximityKind { Production, Transport };

std::string_view to_string(ProximityKind kind);

struct ProximityMatrix {
  ProximityKind kind = ProximityKind::Production;
  YearRange window;
  std::shared_ptr<const ProductUniverse> products;
  Eigen::MatrixXd values;  // symmetric, zero diagonal
};

// Minimum conditional co-occurrence probability over a pooled cube:
// sum_loc M_i M_j / max(u_i, u_j). Products with zero ubiquity get 0.
ProximityMatrix compute_proximity(const AdvantageCube& cube, YearRange window);

// Yearly relatedness density; NaN marks an undefined entry (isolated product).
struct RelatednessPanel {
  LocationKind kind = LocationKind::Region;
  std::shared_ptr<const LocationRegistry> locations;
  std::shared_ptr<const ProductUniverse> products;
  std::vector<int> years;
  std::vector<Eigen::MatrixXd> density;  // per year: locations x products

  std::optional<double> at(std::size_t location, std::size_t product, int year) const;
};

RelatednessPanel compute_density(const AdvantageCube& cube, const ProximityMatrix& prox);

// Top-n neighbours by descending proximity, ties broken by ascending HS code.
// Throws Error(UnknownProduct).
std::vector<std::pair<std::string, double>> nearest_products(const ProximityMatrix& prox, std::string_view hs4,
                                                             std::size_t n);

// (location, product, year) -> count. Absent keys mean "no shipments".
using CountMap = std::map<CellKey, int>;

// Distinct ports with positive routed value. Throws Error(MissingRouting).
CountMap compute_trm(const ExportPanel& regional);

// Distinct destination continents with positive value. Throws
// Error(UnmappedCountry) / Error(MissingRouting).
CountMap compute_des(const ExportPanel& port_panel, const ContinentMap& continents);

}  // namespace portspill
