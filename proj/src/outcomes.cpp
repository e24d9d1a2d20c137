#include "portspill/outcomes.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"

namespace portspill {

std::string_view to_string(BoundaryPolicy policy) {
  switch (policy) {
    case BoundaryPolicy::Truncate: return "truncate";
    case BoundaryPolicy::StrictSkip: return "strict-skip";
    case BoundaryPolicy::FootnoteLiteral: return "footnote-literal";
  }
  return "?";
}

BoundaryPolicy parse_boundary_policy(std::string_view text) {
  if (text == "truncate") return BoundaryPolicy::Truncate;
  if (text == "strict-skip") return BoundaryPolicy::StrictSkip;
  if (text == "footnote-literal") return BoundaryPolicy::FootnoteLiteral;
  throw Error(ErrorKind::ConfigError, "unknown boundary policy '" + std::string(text) + "'");
}

std::optional<int> jump_outcome(std::span<const std::uint8_t> m, std::size_t t, BoundaryPolicy policy) {
  const auto n = static_cast<long>(m.size());
  const auto tt = static_cast<long>(t);
  if (tt + 2 >= n || m[t] != 0) return std::nullopt;
  if (policy == BoundaryPolicy::StrictSkip && (tt < 2 || tt + 4 >= n)) return std::nullopt;

  bool forward = true;
  bool backward = true;
  if (policy == BoundaryPolicy::FootnoteLiteral) {
    forward = tt >= 2;
    backward = tt <= n - 5;
  }
  if (!m[t + 2]) return 0;
  if (forward)
    for (long k = tt + 3; k <= std::min(tt + 4, n - 1); ++k)
      if (!m[static_cast<std::size_t>(k)]) return 0;
  if (backward)
    for (long k = std::max(0L, tt - 2); k < tt; ++k)
      if (m[static_cast<std::size_t>(k)]) return 0;
  return 1;
}

std::optional<int> JumpPanel::outcome(std::size_t region, std::size_t product, int year) const {
  auto it = std::lower_bound(base_years.begin(), base_years.end(), year);
  if (it == base_years.end() || *it != year) return std::nullopt;
  const std::size_t t = static_cast<std::size_t>(it - base_years.begin());
  const std::size_t idx = (t * regions->size() + region) * products->size() + product;
  if (!candidate[idx]) return std::nullopt;
  return s[idx];
}

std::size_t JumpPanel::candidate_count() const {
  return static_cast<std::size_t>(std::count(candidate.begin(), candidate.end(), std::uint8_t{1}));
}

JumpPanel detect_jumps(const AdvantageCube& cube, BoundaryPolicy policy) {
  if (cube.pooling != RcaPooling::PerYear) throw Error(ErrorKind::InvalidSpec, "jump detection needs a yearly cube");
  const auto years = cube.years();
  for (std::size_t k = 1; k < years.size(); ++k)
    if (years[k] != years[k - 1] + 1) throw Error(ErrorKind::InvalidSpec, "cube years are not contiguous");
  if (years.size() < 3) throw Error(ErrorKind::WindowTooShort, "need at least three years for the t+2 check");

  JumpPanel out;
  out.regions = cube.locations;
  out.products = cube.products;
  out.policy = policy;
  const std::size_t n_loc = cube.locations->size();
  const std::size_t n_prod = cube.products->size();
  for (std::size_t t = 0; t + 2 < years.size(); ++t) out.base_years.push_back(years[t]);
  out.candidate.assign(out.base_years.size() * n_loc * n_prod, 0);
  out.s.assign(out.candidate.size(), 0);

  std::vector<std::uint8_t> series(years.size());
  for (std::size_t l = 0; l < n_loc; ++l) {
    for (std::size_t i = 0; i < n_prod; ++i) {
      for (std::size_t y = 0; y < years.size(); ++y) series[y] = cube.slices[y].advantage(l, i) ? 1 : 0;
      for (std::size_t t = 0; t < out.base_years.size(); ++t) {
        const auto s = jump_outcome(series, t, policy);
        if (!s) continue;
        const std::size_t idx = (t * n_loc + l) * n_prod + i;
        out.candidate[idx] = 1;
        out.s[idx] = static_cast<std::uint8_t>(*s);
      }
    }
  }
  return out;
}

std::string DropReport::to_json() const {
  nlohmann::ordered_json j;
  j["candidates"] = candidates;
  j["kept"] = kept;
  j["dropped"] = nlohmann::ordered_json::object();
  for (const auto& [reason, n] : dropped) j["dropped"][reason] = n;
  return j.dump(2) + "\n";
}

TableBuild build_region_table(const JumpPanel& jumps, const RelatednessPanel& omega, const AdvantageCube& cube,
                              const PciTable& pci, const CountMap& trm) {
  TableBuild out;
  out.report.dropped = {{"missing_pci", 0}, {"undefined_omega", 0}, {"missing_trm", 0}};
  const std::size_t n_loc = jumps.regions->size();
  const std::size_t n_prod = jumps.products->size();
  for (std::size_t l = 0; l < n_loc; ++l) {
    for (std::size_t i = 0; i < n_prod; ++i) {
      const auto& product = jumps.products->at(i);
      for (int year : jumps.base_years) {
        const auto s = jumps.outcome(l, i, year);
        if (!s) continue;
        ++out.report.candidates;
        const auto p = pci.get(product.hs4, year);
        if (!p) {
          ++out.report.dropped["missing_pci"];
          continue;
        }
        const auto w = omega.at(l, i, year);
        if (!w) {
          ++out.report.dropped["undefined_omega"];
          continue;
        }
        auto it = trm.find(CellKey{static_cast<std::int32_t>(l), static_cast<std::int32_t>(i), year});
        if (it == trm.end()) {
          ++out.report.dropped["missing_trm"];
          continue;
        }
        Observation o;
        o.region = jumps.regions->code(l);
        o.product = product.hs4;
        o.year = year;
        o.s = *s;
        o.omega = *w;
        o.k = cube.ubiquity(i, year);
        o.pci = *p;
        o.trm = it->second;
        o.leamer = product.leamer;
        out.table.rows.push_back(std::move(o));
      }
    }
  }
  out.report.kept = out.table.rows.size();
  return out;
}

TableBuild build_matched_table(const EstimationTable& region_table, const RelatednessPanel& port_omega,
                               const AdvantageCube& port_cube, const PortRegionMap& map, const CountMap* des) {
  const auto& ports = *port_cube.locations;
  for (const auto& code : ports.codes())
    if (!map.region_of(code)) throw Error(ErrorKind::UnmappedPort, code);

  // Pooled export universe per port: any year with a positive value.
  const std::size_t n_prod = port_cube.products->size();
  std::vector<std::uint8_t> handled(ports.size() * n_prod, 0);
  for (const auto& s : port_cube.slices)
    for (std::size_t p = 0; p < ports.size(); ++p)
      for (std::size_t i = 0; i < n_prod; ++i)
        if (s.rca(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) > 0.0) handled[p * n_prod + i] = 1;

  TableBuild out;
  out.table.matched = true;
  out.report.dropped = {{"undefined_Omega", 0}};
  for (const auto& row : region_table.rows) {
    for (const auto& port : map.ports_of(row.region)) {
      const auto p = ports.find(port);
      if (!p) continue;  // port absent from the port panel
      ++out.report.candidates;
      const auto i = port_cube.products->find(row.product);
      std::optional<double> omega_p;
      if (i && handled[*p * n_prod + *i]) omega_p = port_omega.at(*p, *i, row.year);
      if (!omega_p) {
        ++out.report.dropped["undefined_Omega"];
        continue;
      }
      Observation o = row;
      o.port = port;
      o.port_omega = omega_p;
      o.port_k = port_cube.ubiquity(*i, row.year);
      if (des) {
        auto it = des->find(CellKey{static_cast<std::int32_t>(*p), static_cast<std::int32_t>(*i), row.year});
        o.des = it == des->end() ? 0 : it->second;
      }
      out.table.rows.push_back(std::move(o));
    }
  }
  std::stable_sort(out.table.rows.begin(), out.table.rows.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.region, a.port, a.product, a.year) < std::tie(b.region, b.port, b.product, b.year);
  });
  out.report.kept = out.table.rows.size();
  return out;
}

std::string_view to_string(SplitScheme scheme) {
  switch (scheme) {
    case SplitScheme::PciMean: return "pci-mean";
    case SplitScheme::LeamerGroups: return "leamer-groups";
    case SplitScheme::Periods: return "periods";
  }
  return "?";
}

SplitScheme parse_split_scheme(std::string_view text) {
  if (text == "pci-mean") return SplitScheme::PciMean;
  if (text == "leamer-groups") return SplitScheme::LeamerGroups;
  if (text == "periods") return SplitScheme::Periods;
  throw Error(ErrorKind::ConfigError, "unknown split scheme '" + std::string(text) + "'");
}

std::vector<std::pair<std::string, EstimationTable>> split_sample(const EstimationTable& table, SplitScheme scheme) {
  auto make = [&](std::initializer_list<const char*> names) {
    std::vector<std::pair<std::string, EstimationTable>> out;
    for (const char* n : names) out.emplace_back(n, EstimationTable{table.matched, {}});
    return out;
  };
  switch (scheme) {
    case SplitScheme::PciMean: {
      auto out = make({"low", "high"});
      if (table.rows.empty()) return out;
      double sum = 0.0;
      for (const auto& r : table.rows) sum += r.pci;
      const double mean = sum / static_cast<double>(table.rows.size());
      for (const auto& r : table.rows) out[r.pci < mean ? 0 : 1].second.rows.push_back(r);
      return out;
    }
    case SplitScheme::LeamerGroups: {
      auto out = make({"low", "medium", "high"});
      for (const auto& r : table.rows) {
        if (!r.leamer) continue;
        const int g = *r.leamer <= 6 ? 0 : (*r.leamer <= 8 ? 1 : 2);
        out[static_cast<std::size_t>(g)].second.rows.push_back(r);
      }
      return out;
    }
    case SplitScheme::Periods: {
      auto out = make({"crisis", "recovery", "post_crisis"});
      for (const auto& r : table.rows) {
        if (r.year >= 2007 && r.year <= 2009) out[0].second.rows.push_back(r);
        else if (r.year >= 2010 && r.year <= 2013) out[1].second.rows.push_back(r);
        else if (r.year >= 2014 && r.year <= 2018) out[2].second.rows.push_back(r);
      }
      return out;
    }
  }
  return {};
}

namespace {

template <class T>
std::string opt_text(const std::optional<T>& v) {
  if (!v) return "NA";
  if constexpr (std::is_floating_point_v<T>) return csv::format_double(*v);
  else return std::to_string(*v);
}

}  // namespace

std::string table_to_csv(const EstimationTable& table) {
  csv::Writer w;
  w.row({"region", "port", "product", "year", "S", "omega", "Omega", "k", "K", "PCI", "TRM", "DES", "leamer"});
  for (const auto& r : table.rows)
    w.row({r.region, r.port, r.product, std::to_string(r.year), std::to_string(r.s), csv::format_double(r.omega),
           opt_text(r.port_omega), std::to_string(r.k), opt_text(r.port_k), csv::format_double(r.pci),
           std::to_string(r.trm), opt_text(r.des), opt_text(r.leamer)});
  return w.str();
}

EstimationTable table_from_csv(const std::string& path) {
  csv::Reader r(path);
  const char* names[] = {"region", "port", "product", "year", "S", "omega", "Omega",
                         "k", "K", "PCI", "TRM", "DES", "leamer"};
  std::size_t c[13];
  for (int k = 0; k < 13; ++k) c[k] = r.require_column(names[k]);
  EstimationTable table;
  std::vector<std::string> f;
  auto bad = [&] { return Error(ErrorKind::MalformedRow, r.path() + ":" + std::to_string(r.line_number())); };
  auto num = [&](const std::string& s) {
    auto v = csv::parse_double(s);
    if (!v) throw bad();
    return *v;
  };
  auto integer = [&](const std::string& s) {
    auto v = csv::parse_int(s);
    if (!v) throw bad();
    return static_cast<int>(*v);
  };
  while (r.next(f)) {
    if (f.size() != r.header().size()) throw bad();
    Observation o;
    o.region = f[c[0]];
    o.port = f[c[1]];
    o.product = f[c[2]];
    o.year = integer(f[c[3]]);
    o.s = integer(f[c[4]]);
    o.omega = num(f[c[5]]);
    if (f[c[6]] != "NA") o.port_omega = num(f[c[6]]);
    o.k = integer(f[c[7]]);
    if (f[c[8]] != "NA") o.port_k = integer(f[c[8]]);
    o.pci = num(f[c[9]]);
    o.trm = integer(f[c[10]]);
    if (f[c[11]] != "NA") o.des = integer(f[c[11]]);
    if (f[c[12]] != "NA") o.leamer = integer(f[c[12]]);
    if (!o.port.empty()) table.matched = true;
    table.rows.push_back(std::move(o));
  }
  return table;
}

}  // namespace portspill
