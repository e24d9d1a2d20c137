#include "portspill/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"

namespace portspill {

ExportSchema ExportSchema::defaults(LocationKind kind) {
  ExportSchema s;
  if (kind == LocationKind::Region) {
    s.location = "region";
    s.via = "port";
  } else {
    s.location = "port";
    s.via = "destination_country";
  }
  return s;
}

namespace {

std::string where(const csv::Reader& r) {
  return r.path() + ":" + std::to_string(r.line_number());
}

template <class Key>
std::map<Key, double> sum_sorted(std::vector<std::pair<Key, double>> rows) {
  std::sort(rows.begin(), rows.end());
  std::map<Key, double> out;
  auto hint = out.end();
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double acc = 0.0;
    for (; j < rows.size() && rows[j].first == rows[i].first; ++j) acc += rows[j].second;
    hint = out.emplace_hint(hint, rows[i].first, acc);
    i = j;
  }
  return out;
}

}  // namespace

ExportPanel load_export_csv(const std::string& path, LocationKind kind, const ExportSchema& schema,
                            const PanelRegistries& registries) {
  if (!registries.locations || !registries.products)
    throw Error(ErrorKind::ConfigError, "load_export_csv needs location and product registries");
  csv::Reader r(path);
  const auto c_loc = r.require_column(schema.location);
  const auto c_prod = r.require_column(schema.product);
  const auto c_year = r.require_column(schema.year);
  const auto c_value = r.require_column(schema.value);
  const std::optional<std::size_t> c_via = schema.via.empty() ? std::nullopt : r.column(schema.via);

  std::vector<std::pair<CellKey, double>> cell_rows;
  std::vector<std::pair<RouteKey, double>> route_rows;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != r.header().size())
      throw Error(ErrorKind::MalformedRow, where(r) + ": expected " + std::to_string(r.header().size()) +
                                               " fields, got " + std::to_string(f.size()));
    const auto year = csv::parse_int(f[c_year]);
    if (!year) throw Error(ErrorKind::MalformedRow, where(r) + ": bad year '" + f[c_year] + "'");
    const auto value = csv::parse_double(f[c_value]);
    if (!value || !std::isfinite(*value) || *value < 0.0)
      throw Error(ErrorKind::MalformedRow, where(r) + ": bad value '" + f[c_value] + "'");
    std::size_t loc = 0;
    std::size_t prod = 0;
    try {
      loc = registries.locations->index_of(f[c_loc]);
      prod = registries.products->index_of(f[c_prod]);
    } catch (const Error& e) {
      throw Error(e.kind(), where(r) + ": " + (e.kind() == ErrorKind::UnknownProductCode ? f[c_prod] : f[c_loc]));
    }
    const CellKey key{static_cast<std::int32_t>(loc), static_cast<std::int32_t>(prod),
                      static_cast<std::int32_t>(*year)};
    cell_rows.emplace_back(key, *value);
    if (c_via && !f[*c_via].empty()) {
      if (registries.via && !registries.via->find(f[*c_via]))
        throw Error(ErrorKind::UnknownLocationCode, where(r) + ": " + f[*c_via]);
      route_rows.emplace_back(RouteKey{key.location, key.product, key.year, f[*c_via]}, *value);
    }
  }

  ExportPanel panel;
  panel.kind = kind;
  panel.locations = registries.locations;
  panel.products = registries.products;
  panel.via_registry = registries.via;
  panel.cells = sum_sorted(std::move(cell_rows));
  panel.routing = sum_sorted(std::move(route_rows));
  if (!panel.cells.empty()) {
    panel.first_year = panel.cells.begin()->first.year;
    panel.last_year = panel.first_year;
    for (const auto& [key, v] : panel.cells) {
      panel.first_year = std::min(panel.first_year, key.year);
      panel.last_year = std::max(panel.last_year, key.year);
    }
  }
  const auto report = validate_panel(panel);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw Error(ErrorKind::MalformedRow, path + ": invalid panel (" + std::to_string(report.violations.size()) +
                                             " violations; first: year " + std::to_string(v.year) + " " + v.detail +
                                             ")");
  }
  return panel;
}

std::string export_panel_csv(const ExportPanel& panel) {
  const bool region = panel.kind == LocationKind::Region;
  csv::Writer w;
  w.row({region ? "region" : "port", "product", "year", region ? "port" : "destination_country", "value"});
  if (panel.has_routing()) {
    // One row per routed shipment; any cell remainder not covered by routing
    // is written with an empty routing field.
    std::map<CellKey, double> routed;
    for (const auto& [key, value] : panel.routing) {
      w.row({panel.locations->code(key.location), panel.products->at(key.product).hs4, std::to_string(key.year),
             key.via, csv::format_double(value)});
      routed[CellKey{key.location, key.product, key.year}] += value;
    }
    for (const auto& [key, value] : panel.cells) {
      auto it = routed.find(key);
      if (it == routed.end())
        w.row({panel.locations->code(key.location), panel.products->at(key.product).hs4, std::to_string(key.year),
               "", csv::format_double(value)});
    }
  } else {
    for (const auto& [key, value] : panel.cells)
      w.row({panel.locations->code(key.location), panel.products->at(key.product).hs4, std::to_string(key.year), "",
             csv::format_double(value)});
  }
  return w.str();
}

void HsConcordance::add(const std::string& hs2002, const std::string& hs2017) {
  const auto from = ProductCode::normalize_hs4(hs2002);
  const auto to = ProductCode::normalize_hs4(hs2017);
  forward_[from].insert(to);
  reverse_[to].insert(from);
}

const std::set<std::string>* HsConcordance::targets(const std::string& hs2002) const {
  auto it = forward_.find(hs2002);
  return it == forward_.end() ? nullptr : &it->second;
}

const std::set<std::string>* HsConcordance::sources(const std::string& hs2017) const {
  auto it = reverse_.find(hs2017);
  return it == reverse_.end() ? nullptr : &it->second;
}

HsConcordance load_concordance(const std::string& path) {
  csv::Reader r(path);
  const auto c_from = r.require_column("hs2002");
  const auto c_to = r.require_column("hs2017");
  HsConcordance conc;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (std::max(c_from, c_to) >= f.size()) throw Error(ErrorKind::MalformedRow, where(r));
    try {
      conc.add(f[c_from], f[c_to]);
    } catch (const Error&) {
      throw Error(ErrorKind::MalformedRow, where(r) + ": bad HS code");
    }
  }
  return conc;
}

PciTable load_pci_csv(const std::string& path) {
  csv::Reader r(path);
  const auto c_code = r.require_column("hs2002");
  const auto c_year = r.require_column("year");
  const auto c_pci = r.require_column("pci");
  PciTable table;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != r.header().size()) throw Error(ErrorKind::MalformedRow, where(r));
    const auto year = csv::parse_int(f[c_year]);
    const auto pci = csv::parse_double(f[c_pci]);
    if (!year || !pci || !std::isfinite(*pci)) throw Error(ErrorKind::MalformedRow, where(r));
    std::string code;
    try {
      code = ProductCode::normalize_hs4(f[c_code]);
    } catch (const Error&) {
      throw Error(ErrorKind::MalformedRow, where(r) + ": bad HS code");
    }
    table.set(std::move(code), static_cast<int>(*year), *pci);
  }
  return table;
}

PciTable convert_pci(const PciTable& raw, const HsConcordance& concordance) {
  // (hs2017, year) -> source values in hs2002 order
  std::map<std::pair<std::string, int>, std::vector<double>> pooled;
  for (const auto& [key, value] : raw.values()) {
    const auto* targets = concordance.targets(key.first);
    if (!targets || targets->empty()) throw Error(ErrorKind::MissingConcordance, key.first);
    for (const auto& to : *targets) pooled[{to, key.second}].push_back(value);
  }
  PciTable out;
  for (const auto& [key, values] : pooled) {
    double sum = 0.0;
    for (double v : values) sum += v;
    out.set(key.first, key.second, sum / static_cast<double>(values.size()));
  }
  return out;
}

ContinentMap load_continent_map(const std::string& path) {
  csv::Reader r(path);
  const auto c_country = r.require_column("country");
  const auto c_continent = r.require_column("continent");
  ContinentMap map;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (std::max(c_country, c_continent) >= f.size()) throw Error(ErrorKind::MalformedRow, where(r));
    map.add(f[c_country], parse_continent(f[c_continent]));
  }
  return map;
}

}  // namespace portspill
