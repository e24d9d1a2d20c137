#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "portspill/complexity.hpp"
#include "portspill/types.hpp"

namespace portspill {

// How the forward (t+2..t+4 advantaged) and backward (t-2..t-1 not
// advantaged) conditions treat base years near the panel edges.
//   Truncate:        both conditions over whichever required years exist.
//   StrictSkip:      only base years whose full windows are inside the data.
//   FootnoteLiteral: base years in the first two years get the backward
//                    condition only, years past last-4 the forward condition
//                    only, interior years both; each over available years.
// Every policy needs the t+2 observation and M(t+2) = 1 for a jump.
enum class BoundaryPolicy { Truncate, StrictSkip, FootnoteLiteral };

std::string_view to_string(BoundaryPolicy policy);
BoundaryPolicy parse_boundary_policy(std::string_view text);

// Outcome for base year index t of one advantage series, or nullopt when
// (t) is not a candidate under the policy.
std::optional<int> jump_outcome(std::span<const std::uint8_t> m, std::size_t t, BoundaryPolicy policy);

struct JumpPanel {
  std::shared_ptr<const LocationRegistry> regions;
  std::shared_ptr<const ProductUniverse> products;
  BoundaryPolicy policy = BoundaryPolicy::Truncate;
  std::vector<int> base_years;
  std::vector<std::uint8_t> candidate;  // [year][region][product]
  std::vector<std::uint8_t> s;

  std::optional<int> outcome(std::size_t region, std::size_t product, int year) const;
  std::size_t candidate_count() const;
};

// Throws Error(WindowTooShort) if no base year admits the t+2 check.
JumpPanel detect_jumps(const AdvantageCube& cube, BoundaryPolicy policy = BoundaryPolicy::Truncate);

// One estimation row. Region-level tables leave the port-side fields empty.
struct Observation {
  std::string region;
  std::string port;
  std::string product;
  int year = 0;
  int s = 0;
  double omega = 0.0;
  std::optional<double> port_omega;  // Omega
  int k = 0;
  std::optional<int> port_k;  // K
  double pci = 0.0;
  int trm = 0;
  std::optional<int> des;
  std::optional<int> leamer;
};

struct EstimationTable {
  bool matched = false;
  std::vector<Observation> rows;  // sorted by (region, port, product, year)
};

struct DropReport {
  std::size_t candidates = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count

  std::string to_json() const;
};

struct TableBuild {
  EstimationTable table;
  DropReport report;
};

// One row per candidate with S, omega, k, PCI and TRM. Drop reasons:
// "missing_pci", "undefined_omega", "missing_trm" (region shipped nothing).
TableBuild build_region_table(const JumpPanel& jumps, const RelatednessPanel& omega, const AdvantageCube& cube,
                              const PciTable& pci, const CountMap& trm);

// Joins each region row to every port of its region. Rows whose Omega is
// undefined (product outside the port's pooled export universe, isolated
// product, or missing year) are dropped as "undefined_Omega". `des`, when
// given, adds destination-continent counts (0 when the port shipped nothing).
// Throws Error(UnmappedPort) when a port of the port cube is not in `map`.
TableBuild build_matched_table(const EstimationTable& region_table, const RelatednessPanel& port_omega,
                               const AdvantageCube& port_cube, const PortRegionMap& map,
                               const CountMap* des = nullptr);

enum class SplitScheme { PciMean, LeamerGroups, Periods };

std::string_view to_string(SplitScheme scheme);
SplitScheme parse_split_scheme(std::string_view text);

// pci-mean:     low (PCI < sample mean) / high
// leamer-groups: low (1-6) / medium (7-8) / high (9-10); unknown excluded
// periods:      crisis (2007-2009) / recovery (2010-2013) / post_crisis
//               (2014-2018), keyed on the base year
std::vector<std::pair<std::string, EstimationTable>> split_sample(const EstimationTable& table, SplitScheme scheme);

std::string table_to_csv(const EstimationTable& table);
EstimationTable table_from_csv(const std::string& path);

}  // namespace portspill
