#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "portspill/types.hpp"

namespace portspill {

// Column names of a raw export file. `via` is the routing column: the port
// for region files, the destination country for port files. An empty `via`
// disables routing.
struct ExportSchema {
  std::string location;
  std::string product = "product";
  std::string year = "year";
  std::string value = "value";
  std::string via;

  static ExportSchema defaults(LocationKind kind);
};

struct PanelRegistries {
  std::shared_ptr<const LocationRegistry> locations;
  std::shared_ptr<const ProductUniverse> products;
  std::shared_ptr<const LocationRegistry> via;  // port registry for region panels
};

// Rows with identical keys are summed in sorted (key, value) order, so any
// permutation of the input yields a bit-identical panel.
// Errors: MalformedRow (with line number), UnknownProductCode,
// UnknownLocationCode.
ExportPanel load_export_csv(const std::string& path, LocationKind kind, const ExportSchema& schema,
                            const PanelRegistries& registries);

// Canonical text form consumed by load_export_csv with default schema.
std::string export_panel_csv(const ExportPanel& panel);

// HS2002 -> HS2017 correspondence with the reverse view.
class HsConcordance {
 public:
  void add(const std::string& hs2002, const std::string& hs2017);

  const std::set<std::string>* targets(const std::string& hs2002) const;
  const std::set<std::string>* sources(const std::string& hs2017) const;
  const std::map<std::string, std::set<std::string>>& forward() const noexcept { return forward_; }
  const std::map<std::string, std::set<std::string>>& reverse() const noexcept { return reverse_; }

 private:
  std::map<std::string, std::set<std::string>> forward_;
  std::map<std::string, std::set<std::string>> reverse_;
};

HsConcordance load_concordance(const std::string& path);

// PCI file: hs2002,year,pci.
PciTable load_pci_csv(const std::string& path);

// Unweighted mean over the HS2002 sources of every HS2017 code, per year.
// Throws Error(MissingConcordance) for a raw code the concordance lacks.
PciTable convert_pci(const PciTable& raw, const HsConcordance& concordance);

// country,continent. Conflicting duplicates throw Error(ConflictingMapping).
ContinentMap load_continent_map(const std::string& path);

}  // namespace portspill
