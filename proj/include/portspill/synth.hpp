#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "portspill/types.hpp"

namespace portspill {

// Probit index coefficients of the planted entry law.
struct SynthBeta {
  double constant = -2.5;
  double omega = 7.0;       // own relatedness density
  double port_omega = 0.7;  // density of the region's port (regions only)
  double k = 0.0;
  double port_k = 0.0;
  double pci = 0.0;
  double trm = 0.0;
};

struct SynthConfig {
  std::size_t n_regions = 20;
  std::size_t n_ports = 8;  // each port sits in its own region, so n_ports <= n_regions
  std::size_t n_products = 200;
  std::size_t n_years = 12;
  std::size_t n_communities = 10;
  std::size_t n_countries = 12;
  std::size_t communities_per_location = 2;
  int first_year = 2007;
  SynthBeta beta;
  SynthBeta port_beta{-2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  double affinity_in = 0.5;   // anchor advantage probability inside a location's communities
  double affinity_out = 0.03;
  double fill_rate = 0.7;     // share of non-advantaged region cells with small exports
  double churn = 0.0;         // per-block exit probability of non-anchor advantages
  std::uint64_t seed = 1;

  // Throws Error(InfeasibleConfig).
  void validate() const;
};

SynthConfig synth_config_from_json(const std::string& text);
std::string synth_config_to_json(const SynthConfig& config);

struct SynthTruthRow {
  std::string region;
  std::string port;  // empty for regions without a port
  std::string product;
  int year = 0;
  double omega = 0.0;  // NaN for isolated products
  std::optional<double> port_omega;
  int s = 0;
};

struct SynthData {
  SynthConfig config;
  std::shared_ptr<const ProductUniverse> products;
  std::shared_ptr<const LocationRegistry> regions;
  std::shared_ptr<const LocationRegistry> ports;
  std::shared_ptr<const LocationRegistry> countries;
  ExportPanel region_panel;
  ExportPanel port_panel;
  PortRegionMap map{{}};
  PciTable pci;
  ContinentMap continents;
  std::vector<int> community;  // per product index; -1 for the balancing product
  std::string filler;          // hs4 of the balancing product (no PCI)
  std::vector<SynthTruthRow> truth;  // candidate rows, (region, product, year) order
};

// Region and port panels whose yearly advantage matrices follow the planted
// probit entry law with respect to the densities the pipeline recomputes.
// Two-year blocks share values; advantages enter only at block starts.
SynthData generate(const SynthConfig& config);

// Writes the ingest inputs: products.csv, regions.csv, ports.csv,
// port_regions.csv, region_exports.csv, port_exports.csv, pci_hs2002.csv,
// concordance.csv, continents.csv, plus truth.csv and synth_config.json.
// Returns the file names written (relative to dir).
std::vector<std::string> write_synth_inputs(const SynthData& data, const std::string& dir);

std::string truth_to_csv(const std::vector<SynthTruthRow>& truth);

}  // namespace portspill
