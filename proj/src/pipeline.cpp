#include "portspill/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"
#include "portspill/parallel.hpp"
#include "portspill/product_space.hpp"
#include "portspill/report.hpp"

extern char** environ;

namespace portspill {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

Analysis analyze(const ExportPanel& regions, const ExportPanel& ports, const PortRegionMap& map, const PciTable& pci,
                 const ContinentMap* continents, const AnalysisOptions& options) {
  Analysis a;
  const YearRange region_window = options.proximity_window.value_or(YearRange{regions.first_year, regions.last_year});
  const YearRange port_window = options.proximity_window.value_or(YearRange{ports.first_year, ports.last_year});
  a.region_cube = compute_rca(regions, RcaPooling::PerYear);
  a.region_pooled = compute_rca(regions, RcaPooling::PooledWindow, region_window);
  a.port_cube = compute_rca(ports, RcaPooling::PerYear);
  a.port_pooled = compute_rca(ports, RcaPooling::PooledWindow, port_window);
  a.production = compute_proximity(a.region_pooled, region_window);
  a.transport = compute_proximity(a.port_pooled, port_window);
  a.omega = compute_density(a.region_cube, a.production);
  a.port_omega = compute_density(a.port_cube, a.transport);
  a.jumps = detect_jumps(a.region_cube, options.policy);
  a.trm = compute_trm(regions);
  if (continents) a.des = compute_des(ports, *continents);
  a.region = build_region_table(a.jumps, a.omega, a.region_cube, pci, a.trm);
  a.matched = build_matched_table(a.region.table, a.port_omega, a.port_cube, map, a.des ? &*a.des : nullptr);
  return a;
}

ModelSpec region_model(Family family) {
  ModelSpec s;
  s.family = family;
  s.regressors = {"omega", "k", "PCI", "TRM"};
  return s;
}

ModelSpec matched_model(Family family, bool with_des) {
  ModelSpec s;
  s.family = family;
  s.regressors = {"omega", "Omega", "k", "K", "PCI", "TRM"};
  if (with_des) s.regressors.push_back("DES");
  return s;
}

// ---- run configuration ----------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, v] : j.items()) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      config_error("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error("bad value for '" + where + "': " + j.dump());
  }
}

void read_schema(const json& j, const std::string& where, ExportSchema& s) {
  check_keys(j, where, {"location", "product", "year", "value", "via"});
  if (j.contains("location")) s.location = get<std::string>(j["location"], where + ".location");
  if (j.contains("product")) s.product = get<std::string>(j["product"], where + ".product");
  if (j.contains("year")) s.year = get<std::string>(j["year"], where + ".year");
  if (j.contains("value")) s.value = get<std::string>(j["value"], where + ".value");
  if (j.contains("via")) s.via = get<std::string>(j["via"], where + ".via");
}

ordered_json write_schema(const ExportSchema& s) {
  ordered_json j;
  j["location"] = s.location;
  j["product"] = s.product;
  j["year"] = s.year;
  j["value"] = s.value;
  j["via"] = s.via;
  return j;
}

template <class Fn>
auto parsed(const json& j, const std::string& where, Fn&& fn) {
  const auto text = get<std::string>(j, where);
  try {
    return fn(text);
  } catch (const Error& e) {
    config_error("bad value for '" + where + "': " + text);
  }
}

RunConfig from_json_value(const json& j, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  check_keys(j, "", {"inputs", "schema", "options", "model", "output", "synth", "threads"});
  if (j.contains("inputs")) {
    const auto& in = j["inputs"];
    check_keys(in, "inputs", {"products", "regions", "ports", "port_regions", "region_exports", "port_exports", "pci",
                              "concordance", "continents"});
    auto set = [&](const char* key, std::string& dst) {
      if (in.contains(key)) dst = get<std::string>(in[key], std::string("inputs.") + key);
    };
    set("products", c.inputs.products);
    set("regions", c.inputs.regions);
    set("ports", c.inputs.ports);
    set("port_regions", c.inputs.port_regions);
    set("region_exports", c.inputs.region_exports);
    set("port_exports", c.inputs.port_exports);
    set("pci", c.inputs.pci);
    set("concordance", c.inputs.concordance);
    set("continents", c.inputs.continents);
  }
  if (j.contains("schema")) {
    check_keys(j["schema"], "schema", {"region_exports", "port_exports"});
    if (j["schema"].contains("region_exports"))
      read_schema(j["schema"]["region_exports"], "schema.region_exports", c.region_schema);
    if (j["schema"].contains("port_exports"))
      read_schema(j["schema"]["port_exports"], "schema.port_exports", c.port_schema);
  }
  if (j.contains("options")) {
    const auto& o = j["options"];
    check_keys(o, "options", {"proximity_window", "boundary_policy", "edge_threshold", "splits"});
    if (o.contains("proximity_window")) {
      const auto& w = o["proximity_window"];
      if (w.is_null()) c.proximity_window.reset();
      else {
        const auto v = get<std::vector<int>>(w, "options.proximity_window");
        if (v.size() != 2 || v[1] < v[0]) config_error("options.proximity_window must be [first, last]");
        c.proximity_window = YearRange{v[0], v[1]};
      }
    }
    if (o.contains("boundary_policy"))
      c.policy = parsed(o["boundary_policy"], "options.boundary_policy", parse_boundary_policy);
    if (o.contains("edge_threshold")) {
      c.edge_threshold = get<double>(o["edge_threshold"], "options.edge_threshold");
      if (!(c.edge_threshold >= 0.0 && c.edge_threshold <= 1.0)) config_error("options.edge_threshold outside [0, 1]");
    }
    if (o.contains("splits")) {
      if (!o["splits"].is_array()) config_error("options.splits must be an array");
      c.splits.clear();
      for (const auto& s : o["splits"]) c.splits.push_back(parsed(s, "options.splits", parse_split_scheme));
    }
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, "model", {"family", "bread", "cluster", "dummies", "with_des"});
    if (m.contains("family")) c.family = parsed(m["family"], "model.family", parse_family);
    if (m.contains("bread")) {
      const auto b = get<std::string>(m["bread"], "model.bread");
      if (b == "observed") c.bread = BreadKind::Observed;
      else if (b == "expected") c.bread = BreadKind::Expected;
      else config_error("bad value for 'model.bread': " + b);
    }
    if (m.contains("cluster")) c.cluster = get<std::string>(m["cluster"], "model.cluster");
    if (m.contains("dummies")) c.dummies = get<std::vector<std::string>>(m["dummies"], "model.dummies");
    if (m.contains("with_des")) c.with_des = get<bool>(m["with_des"], "model.with_des");
  }
  if (j.contains("output")) c.output = get<std::string>(j["output"], "output");
  if (j.contains("threads")) {
    const auto t = get<long long>(j["threads"], "threads");
    if (t < 1 || t > 1024) config_error("threads must be in [1, 1024]");
    c.threads = static_cast<unsigned>(t);
  }
  if (j.contains("synth")) {
    if (!j["synth"].is_object()) config_error("synth must be an object");
    c.synth = synth_config_from_json(j["synth"].dump());
  }
  return c;
}

ordered_json to_json_value(const RunConfig& c, bool for_digest) {
  ordered_json j;
  auto& in = j["inputs"];
  in["products"] = c.inputs.products;
  in["regions"] = c.inputs.regions;
  in["ports"] = c.inputs.ports;
  in["port_regions"] = c.inputs.port_regions;
  in["region_exports"] = c.inputs.region_exports;
  in["port_exports"] = c.inputs.port_exports;
  in["pci"] = c.inputs.pci;
  in["concordance"] = c.inputs.concordance;
  in["continents"] = c.inputs.continents;
  j["schema"]["region_exports"] = write_schema(c.region_schema);
  j["schema"]["port_exports"] = write_schema(c.port_schema);
  auto& o = j["options"];
  if (c.proximity_window) o["proximity_window"] = {c.proximity_window->first, c.proximity_window->last};
  else o["proximity_window"] = nullptr;
  o["boundary_policy"] = std::string(to_string(c.policy));
  o["edge_threshold"] = c.edge_threshold;
  o["splits"] = ordered_json::array();
  for (auto s : c.splits) o["splits"].push_back(std::string(to_string(s)));
  auto& m = j["model"];
  m["family"] = std::string(to_string(c.family));
  m["bread"] = c.bread == BreadKind::Observed ? "observed" : "expected";
  m["cluster"] = c.cluster;
  m["dummies"] = c.dummies;
  m["with_des"] = c.with_des;
  if (!for_digest) {
    j["output"] = c.output;
    j["threads"] = c.threads;
  }
  j["synth"] = ordered_json::parse(synth_config_to_json(c.synth));
  return j;
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

RunConfig run_config_from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json_value(j, base_dir);
}

std::string run_config_to_json(const RunConfig& config, bool for_digest) {
  return to_json_value(config, for_digest).dump(2) + "\n";
}

void apply_env_overrides(RunConfig& config, const char* const* env) {
  if (!env) env = environ;
  constexpr std::string_view prefix = "PORTSPILL__";
  json j = json::parse(run_config_to_json(config));
  bool any = false;
  for (; *env; ++env) {
    const std::string_view entry(*env);
    if (!entry.starts_with(prefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string name = lower(std::string(entry.substr(prefix.size(), eq - prefix.size())));
    const std::string value(entry.substr(eq + 1));
    std::vector<std::string> path;
    for (std::size_t start = 0;;) {
      const auto sep = name.find("__", start);
      path.push_back(name.substr(start, sep == std::string::npos ? std::string::npos : sep - start));
      if (sep == std::string::npos) break;
      start = sep + 2;
    }
    json* node = &j;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      if (!node->is_object()) config_error("environment override " + std::string(entry.substr(0, eq)) + " has no target");
      node = &(*node)[path[k]];
      if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) config_error("environment override " + std::string(entry.substr(0, eq)) + " has no target");
    json v;
    try {
      v = json::parse(value);
    } catch (const json::exception&) {
      v = value;
    }
    (*node)[path.back()] = v;
    any = true;
  }
  if (any) {
    const std::string base = config.base_dir;
    config = from_json_value(j, base);
  }
}

void apply_paper_defaults(RunConfig& c) {
  c.proximity_window.reset();
  c.policy = BoundaryPolicy::Truncate;
  c.splits = {SplitScheme::PciMean, SplitScheme::LeamerGroups, SplitScheme::Periods};
  c.family = Family::Probit;
  c.bread = BreadKind::Observed;
  c.cluster = "product";
  c.dummies = {"year", "region"};
}

std::string resolve_path(const RunConfig& config, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (fs::path(config.base_dir) / p).lexically_normal().string();
}

// ---- artifacts --------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(ErrorKind::Io, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(csv::read_file(path)); }

namespace {

std::string na_or(double v) { return std::isnan(v) ? "NA" : csv::format_double(v); }

double number(const csv::Reader& r, const std::string& text) {
  if (text == "NA") return std::numeric_limits<double>::quiet_NaN();
  const auto v = csv::parse_double(text);
  if (!v) throw Error(ErrorKind::MalformedRow, r.path() + ":" + std::to_string(r.line_number()) + ": bad number '" + text + "'");
  return *v;
}

int integer(const csv::Reader& r, const std::string& text) {
  const auto v = csv::parse_int(text);
  if (!v) throw Error(ErrorKind::MalformedRow, r.path() + ":" + std::to_string(r.line_number()) + ": bad integer '" + text + "'");
  return static_cast<int>(*v);
}

AdvantageSlice slice_from(int year, Eigen::MatrixXd rca) {
  AdvantageSlice s;
  s.year = year;
  const auto n_loc = static_cast<std::size_t>(rca.rows());
  const auto n_prod = static_cast<std::size_t>(rca.cols());
  s.m.assign(n_loc * n_prod, 0);
  s.present.assign(n_loc, 0);
  s.ubiquity.assign(n_prod, 0);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i) {
      const double v = rca(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i));
      if (v > 0.0) s.present[l] = 1;
      if (v >= 1.0) {
        s.m[l * n_prod + i] = 1;
        ++s.ubiquity[i];
      }
    }
  s.rca = std::move(rca);
  return s;
}

}  // namespace

std::string cube_to_csv(const AdvantageCube& cube) {
  csv::Writer w;
  const bool pooled = cube.pooling == RcaPooling::PooledWindow;
  if (pooled) w.row({"location", "product", "window_first", "window_last", "rca"});
  else w.row({"location", "product", "year", "rca"});
  for (const auto& s : cube.slices)
    for (Eigen::Index l = 0; l < s.rca.rows(); ++l)
      for (Eigen::Index i = 0; i < s.rca.cols(); ++i) {
        const double v = s.rca(l, i);
        if (!(v > 0.0)) continue;
        const auto& loc = cube.locations->code(static_cast<std::size_t>(l));
        const auto& prod = cube.products->at(static_cast<std::size_t>(i)).hs4;
        if (pooled)
          w.row({loc, prod, std::to_string(cube.window.first), std::to_string(cube.window.last), csv::format_double(v)});
        else w.row({loc, prod, std::to_string(s.year), csv::format_double(v)});
      }
  return w.str();
}

AdvantageCube cube_from_csv(const std::string& path, LocationKind kind, RcaPooling pooling,
                            std::shared_ptr<const LocationRegistry> locations,
                            std::shared_ptr<const ProductUniverse> products) {
  csv::Reader r(path);
  const bool pooled = pooling == RcaPooling::PooledWindow;
  const auto c_loc = r.require_column("location");
  const auto c_prod = r.require_column("product");
  const auto c_year = r.require_column(pooled ? "window_first" : "year");
  const auto c_last = pooled ? r.require_column("window_last") : c_year;
  const auto c_rca = r.require_column("rca");
  const auto n_loc = static_cast<Eigen::Index>(locations->size());
  const auto n_prod = static_cast<Eigen::Index>(products->size());
  std::map<int, Eigen::MatrixXd> by_year;
  YearRange window{std::numeric_limits<int>::max(), std::numeric_limits<int>::min()};
  std::vector<std::string> f;
  while (r.next(f)) {
    const int year = integer(r, f[c_year]);
    const int last = pooled ? integer(r, f[c_last]) : year;
    window.first = std::min(window.first, year);
    window.last = std::max(window.last, last);
    auto it = by_year.find(year);
    if (it == by_year.end()) it = by_year.emplace(year, Eigen::MatrixXd::Zero(n_loc, n_prod)).first;
    it->second(static_cast<Eigen::Index>(locations->index_of(f[c_loc])),
               static_cast<Eigen::Index>(products->index_of(f[c_prod]))) = number(r, f[c_rca]);
  }
  if (by_year.empty()) throw Error(ErrorKind::EmptyYear, path + " holds no RCA rows");
  if (pooled && by_year.size() != 1) throw Error(ErrorKind::MalformedRow, path + " mixes pooling windows");
  AdvantageCube cube;
  cube.kind = kind;
  cube.pooling = pooling;
  cube.window = window;
  cube.locations = std::move(locations);
  cube.products = std::move(products);
  for (auto& [year, rca] : by_year) cube.slices.push_back(slice_from(year, std::move(rca)));
  return cube;
}

std::string proximity_to_csv(const ProximityMatrix& prox) {
  csv::Writer w;
  w.row({"product_i", "product_j", "window_first", "window_last", "proximity"});
  const auto n = prox.values.rows();
  const std::string first = std::to_string(prox.window.first), last = std::to_string(prox.window.last);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = prox.values(i, j);
      if (v > 0.0)
        w.row({prox.products->at(static_cast<std::size_t>(i)).hs4, prox.products->at(static_cast<std::size_t>(j)).hs4,
               first, last, csv::format_double(v)});
    }
  return w.str();
}

ProximityMatrix proximity_from_csv(const std::string& path, ProximityKind kind,
                                   std::shared_ptr<const ProductUniverse> products) {
  csv::Reader r(path);
  const auto c_i = r.require_column("product_i");
  const auto c_j = r.require_column("product_j");
  const auto c_first = r.require_column("window_first");
  const auto c_last = r.require_column("window_last");
  const auto c_v = r.require_column("proximity");
  const auto n = static_cast<Eigen::Index>(products->size());
  ProximityMatrix prox;
  prox.kind = kind;
  prox.values = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::string> f;
  bool any = false;
  while (r.next(f)) {
    const auto i = static_cast<Eigen::Index>(products->index_of(f[c_i]));
    const auto j = static_cast<Eigen::Index>(products->index_of(f[c_j]));
    prox.values(i, j) = prox.values(j, i) = number(r, f[c_v]);
    prox.window = YearRange{integer(r, f[c_first]), integer(r, f[c_last])};
    any = true;
  }
  if (!any) prox.window = YearRange{};
  prox.products = std::move(products);
  return prox;
}

std::string proximity_matrix_csv(const ProximityMatrix& prox) {
  csv::Writer w;
  std::vector<std::string> row{"product"};
  for (const auto& p : prox.products->products()) row.push_back(p.hs4);
  w.row(row);
  for (Eigen::Index i = 0; i < prox.values.rows(); ++i) {
    row.assign(1, prox.products->at(static_cast<std::size_t>(i)).hs4);
    for (Eigen::Index j = 0; j < prox.values.cols(); ++j) row.push_back(csv::format_double(prox.values(i, j)));
    w.row(row);
  }
  return w.str();
}

std::string density_to_csv(const RelatednessPanel& panel) {
  csv::Writer w;
  w.row({"location", "product", "year", "density"});
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(panel.locations->size()); ++l)
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(panel.products->size()); ++i)
      for (std::size_t t = 0; t < panel.years.size(); ++t)
        w.row({panel.locations->code(static_cast<std::size_t>(l)), panel.products->at(static_cast<std::size_t>(i)).hs4,
               std::to_string(panel.years[t]), na_or(panel.density[t](l, i))});
  return w.str();
}

RelatednessPanel density_from_csv(const std::string& path, LocationKind kind,
                                  std::shared_ptr<const LocationRegistry> locations,
                                  std::shared_ptr<const ProductUniverse> products) {
  csv::Reader r(path);
  const auto c_loc = r.require_column("location");
  const auto c_prod = r.require_column("product");
  const auto c_year = r.require_column("year");
  const auto c_v = r.require_column("density");
  const auto n_loc = static_cast<Eigen::Index>(locations->size());
  const auto n_prod = static_cast<Eigen::Index>(products->size());
  std::map<int, Eigen::MatrixXd> by_year;
  std::vector<std::string> f;
  while (r.next(f)) {
    const int year = integer(r, f[c_year]);
    auto it = by_year.find(year);
    if (it == by_year.end())
      it = by_year.emplace(year, Eigen::MatrixXd::Constant(n_loc, n_prod, std::numeric_limits<double>::quiet_NaN())).first;
    it->second(static_cast<Eigen::Index>(locations->index_of(f[c_loc])),
               static_cast<Eigen::Index>(products->index_of(f[c_prod]))) = number(r, f[c_v]);
  }
  RelatednessPanel p;
  p.kind = kind;
  p.locations = std::move(locations);
  p.products = std::move(products);
  for (auto& [year, d] : by_year) {
    p.years.push_back(year);
    p.density.push_back(std::move(d));
  }
  return p;
}

std::string jumps_to_csv(const JumpPanel& jumps) {
  csv::Writer w;
  w.row({"region", "product", "year", "S"});
  const std::size_t n_loc = jumps.regions->size(), n_prod = jumps.products->size();
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i)
      for (std::size_t t = 0; t < jumps.base_years.size(); ++t) {
        const std::size_t idx = (t * n_loc + l) * n_prod + i;
        if (!jumps.candidate[idx]) continue;
        w.row({jumps.regions->code(l), jumps.products->at(i).hs4, std::to_string(jumps.base_years[t]),
               std::to_string(jumps.s[idx])});
      }
  return w.str();
}

JumpPanel jumps_from_csv(const std::string& path, const AdvantageCube& cube, BoundaryPolicy policy) {
  csv::Reader r(path);
  const auto c_reg = r.require_column("region");
  const auto c_prod = r.require_column("product");
  const auto c_year = r.require_column("year");
  const auto c_s = r.require_column("S");
  JumpPanel p;
  p.regions = cube.locations;
  p.products = cube.products;
  p.policy = policy;
  const auto years = cube.years();
  for (std::size_t t = 0; t + 2 < years.size(); ++t) p.base_years.push_back(years[t]);
  const std::size_t n_loc = p.regions->size(), n_prod = p.products->size();
  p.candidate.assign(p.base_years.size() * n_loc * n_prod, 0);
  p.s.assign(p.candidate.size(), 0);
  std::vector<std::string> f;
  while (r.next(f)) {
    const int year = integer(r, f[c_year]);
    const auto it = std::lower_bound(p.base_years.begin(), p.base_years.end(), year);
    if (it == p.base_years.end() || *it != year)
      throw Error(ErrorKind::MalformedRow, path + ":" + std::to_string(r.line_number()) + ": year outside the cube");
    const auto t = static_cast<std::size_t>(it - p.base_years.begin());
    const std::size_t idx = (t * n_loc + p.regions->index_of(f[c_reg])) * n_prod + p.products->index_of(f[c_prod]);
    const int s = integer(r, f[c_s]);
    if (s != 0 && s != 1) throw Error(ErrorKind::MalformedRow, path + ":" + std::to_string(r.line_number()) + ": S not 0/1");
    p.candidate[idx] = 1;
    p.s[idx] = static_cast<std::uint8_t>(s);
  }
  return p;
}

std::string pci_to_csv(const PciTable& pci) {
  csv::Writer w;
  w.row({"hs4", "year", "pci"});
  for (const auto& [key, v] : pci.values()) w.row({key.first, std::to_string(key.second), csv::format_double(v)});
  return w.str();
}

PciTable pci_from_csv(const std::string& path) {
  csv::Reader r(path);
  const auto c_code = r.require_column("hs4");
  const auto c_year = r.require_column("year");
  const auto c_pci = r.require_column("pci");
  PciTable t;
  std::vector<std::string> f;
  while (r.next(f)) t.set(f[c_code], integer(r, f[c_year]), number(r, f[c_pci]));
  return t;
}

// ---- commands -----------------------------------------------------------------

OutputLock::OutputLock(const std::string& output_dir) {
  fs::create_directories(output_dir);
  path_ = (fs::path(output_dir) / ".portspill.lock").string();
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    const std::string p = path_;
    path_.clear();
    throw Error(ErrorKind::Io, "output directory is locked by another run (remove " + p + " if stale)");
  }
  std::fprintf(f, "portspill %s\n", std::string(tool_version).c_str());
  std::fclose(f);
}

OutputLock::~OutputLock() {
  if (!path_.empty()) {
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// One stage invocation: declared inputs, recorded outputs, manifest I/O.
class Stage {
 public:
  Stage(const RunConfig& config, std::string name, std::ostream& log)
      : config_(config), name_(std::move(name)), log_(log), out_(resolve_path(config, config.output)),
        digest_(sha256_hex(run_config_to_json(config, true))) {}

  const fs::path& out() const { return out_; }
  std::string path(const std::string& rel) const { return (out_ / rel).string(); }

  void require(const std::string& upstream) {
    const auto manifest = out_ / upstream / "manifest.json";
    if (!fs::exists(manifest))
      throw Error(ErrorKind::MissingUpstreamArtifact,
                  "'" + name_ + "' needs the '" + upstream + "' stage first (" + manifest.string() + " not found)");
    upstream_.push_back(upstream + "/manifest.json");
  }

  // Output-relative input, recorded relative so manifests do not depend on
  // where the output directory lives.
  void input(const std::string& rel) { add_input(rel, path(rel), rel); }
  // External input, recorded by absolute path.
  void input_as(const std::string& label, const std::string& file) { add_input(label, file, file); }

  bool up_to_date() const {
    const auto manifest = out_ / name_ / "manifest.json";
    if (!fs::exists(manifest)) return false;
    json m;
    try {
      m = json::parse(csv::read_file(manifest.string()));
    } catch (const json::exception&) {
      return false;
    }
    if (m.value("tool_version", "") != tool_version || m.value("config_digest", "") != digest_) return false;
    if (!m.contains("inputs") || m["inputs"].size() != inputs_.size()) return false;
    for (const auto& [label, file, sha] : inputs_) {
      if (!m["inputs"].contains(label)) return false;
      const auto& e = m["inputs"][label];
      if (e.value("path", "") != file || e.value("sha256", "") != sha) return false;
    }
    if (!m.contains("outputs")) return false;
    for (const auto& [rel, sha] : m["outputs"].items()) {
      const auto file = out_ / rel;
      if (!fs::exists(file) || sha256_file(file.string()) != sha.get<std::string>()) return false;
    }
    return true;
  }

  void add_input(const std::string& label, const std::string& file, const std::string& recorded) {
    if (!fs::exists(file)) throw Error(ErrorKind::MissingUpstreamArtifact, "missing input " + file);
    inputs_.emplace_back(label, recorded, sha256_file(file));
  }

  void put(const std::string& rel, const std::string& content) {
    csv::write_if_changed(path(rel), content);
    outputs_.emplace_back(rel, sha256_hex(content));
  }

  // Removes files under the stage directory this run did not write.
  void prune() const {
    const auto dir = out_ / name_;
    if (!fs::exists(dir)) return;
    std::set<std::string> keep{name_ + "/manifest.json"};
    for (const auto& [rel, sha] : outputs_) keep.insert(rel);
    std::vector<fs::path> stale;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && !keep.count(fs::relative(e.path(), out_).generic_string())) stale.push_back(e.path());
    for (const auto& p : stale) fs::remove(p);
  }

  void finish() {
    prune();
    ordered_json m;
    m["stage"] = name_;
    m["tool_version"] = std::string(tool_version);
    m["config_digest"] = digest_;
    m["upstream"] = upstream_;
    m["inputs"] = ordered_json::object();
    for (const auto& [label, file, sha] : inputs_) m["inputs"][label] = {{"path", file}, {"sha256", sha}};
    m["outputs"] = ordered_json::object();
    for (const auto& [rel, sha] : outputs_) m["outputs"][rel] = sha;
    m["created"] = utc_now();
    csv::write_if_changed(path(name_ + "/manifest.json"), m.dump(2) + "\n");
    write_index();
    log_ << name_ << ": wrote " << outputs_.size() << " artifacts to " << (out_ / name_).string() << "\n";
  }

  StageStatus skip() const {
    log_ << name_ << ": up to date\n";
    return StageStatus::UpToDate;
  }

 private:
  // <output>/manifest.json links every stage manifest present.
  void write_index() const {
    ordered_json idx;
    idx["tool_version"] = std::string(tool_version);
    idx["stages"] = ordered_json::object();
    for (auto s : stage_names) {
      const std::string rel = std::string(s) + "/manifest.json";
      if (fs::exists(out_ / rel)) idx["stages"][std::string(s)] = rel;
    }
    csv::write_if_changed(path("manifest.json"), idx.dump(2) + "\n");
  }

  const RunConfig& config_;
  std::string name_;
  std::ostream& log_;
  fs::path out_;
  std::string digest_;
  std::vector<std::string> upstream_;
  std::vector<std::tuple<std::string, std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

// Canonical ingest outputs loaded back.
struct Registries {
  std::shared_ptr<const ProductUniverse> products;
  std::shared_ptr<const LocationRegistry> regions;
  std::shared_ptr<const LocationRegistry> ports;
};

Registries load_registries(const Stage& st) {
  Registries r;
  r.products = std::make_shared<ProductUniverse>(load_product_registry(st.path("ingest/products.csv")));
  r.regions = std::make_shared<LocationRegistry>(load_location_registry(st.path("ingest/regions.csv"), LocationKind::Region));
  r.ports = std::make_shared<LocationRegistry>(load_location_registry(st.path("ingest/ports.csv"), LocationKind::Port));
  return r;
}

void registry_inputs(Stage& st) {
  st.input("ingest/products.csv");
  st.input("ingest/regions.csv");
  st.input("ingest/ports.csv");
}

ExportPanel load_region_panel(const Stage& st, const Registries& r) {
  return load_export_csv(st.path("ingest/region_exports.csv"), LocationKind::Region,
                         ExportSchema::defaults(LocationKind::Region), {r.regions, r.products, r.ports});
}

ExportPanel load_port_panel(const Stage& st, const Registries& r) {
  return load_export_csv(st.path("ingest/port_exports.csv"), LocationKind::Port,
                         ExportSchema::defaults(LocationKind::Port), {r.ports, r.products, nullptr});
}

std::string products_csv(const ProductUniverse& u) {
  csv::Writer w;
  w.row({"hs4", "section", "leamer"});
  for (const auto& p : u.products())
    w.row({p.hs4, std::to_string(p.section), p.leamer ? std::to_string(*p.leamer) : "unknown"});
  return w.str();
}

std::string codes_csv(const LocationRegistry& r) {
  csv::Writer w;
  w.row({"code"});
  for (const auto& c : r.codes()) w.row({c});
  return w.str();
}

std::string validation_text(const char* what, const ValidationReport& rep) {
  std::string s = std::string(what) + ":";
  for (const auto& v : rep.violations) s += " [" + std::to_string(v.year) + "] " + v.detail + ";";
  return s;
}

}  // namespace

StageStatus cmd_ingest(const RunConfig& config, std::ostream& log) {
  Stage st(config, "ingest", log);
  const std::pair<const char*, const std::string*> required[] = {
      {"products", &config.inputs.products},         {"regions", &config.inputs.regions},
      {"ports", &config.inputs.ports},               {"port_regions", &config.inputs.port_regions},
      {"region_exports", &config.inputs.region_exports}, {"port_exports", &config.inputs.port_exports},
      {"pci", &config.inputs.pci},                   {"concordance", &config.inputs.concordance}};
  for (const auto& [key, value] : required) {
    if (value->empty()) config_error(std::string("inputs.") + key + " is not set");
    st.input_as(key, resolve_path(config, *value));
  }
  const bool with_continents = !config.inputs.continents.empty();
  if (with_continents) st.input_as("continents", resolve_path(config, config.inputs.continents));
  if (st.up_to_date()) return st.skip();

  auto products = std::make_shared<ProductUniverse>(load_product_registry(resolve_path(config, config.inputs.products)));
  auto regions = std::make_shared<LocationRegistry>(
      load_location_registry(resolve_path(config, config.inputs.regions), LocationKind::Region));
  auto ports = std::make_shared<LocationRegistry>(
      load_location_registry(resolve_path(config, config.inputs.ports), LocationKind::Port));
  const auto map = load_port_region_map(resolve_path(config, config.inputs.port_regions));
  const auto region_panel = load_export_csv(resolve_path(config, config.inputs.region_exports), LocationKind::Region,
                                            config.region_schema, {regions, products, ports});
  const auto port_panel = load_export_csv(resolve_path(config, config.inputs.port_exports), LocationKind::Port,
                                          config.port_schema, {ports, products, nullptr});
  const auto rv = validate_panel(region_panel);
  if (!rv.ok()) throw Error(ErrorKind::MalformedRow, validation_text("region panel", rv));
  const auto pv = validate_panel(port_panel);
  if (!pv.ok()) throw Error(ErrorKind::MalformedRow, validation_text("port panel", pv));
  for (const auto& port : ports->codes())
    if (!map.region_of(port)) throw Error(ErrorKind::UnmappedPort, port);
  const auto pci = convert_pci(load_pci_csv(resolve_path(config, config.inputs.pci)),
                               load_concordance(resolve_path(config, config.inputs.concordance)));

  st.put("ingest/products.csv", products_csv(*products));
  st.put("ingest/regions.csv", codes_csv(*regions));
  st.put("ingest/ports.csv", codes_csv(*ports));
  {
    csv::Writer w;
    w.row({"port", "region"});
    for (const auto& [port, region] : map.pairs()) w.row({port, region});
    st.put("ingest/port_regions.csv", w.str());
  }
  st.put("ingest/region_exports.csv", export_panel_csv(region_panel));
  st.put("ingest/port_exports.csv", export_panel_csv(port_panel));
  st.put("ingest/pci.csv", pci_to_csv(pci));
  if (with_continents) {
    const auto continents = load_continent_map(resolve_path(config, config.inputs.continents));
    csv::Writer w;
    w.row({"country", "continent"});
    for (const auto& [country, c] : continents.entries()) w.row({country, std::string(to_string(c))});
    st.put("ingest/continents.csv", w.str());
  }
  ordered_json summary;
  summary["products"] = products->size();
  summary["regions"] = regions->size();
  summary["ports"] = ports->size();
  summary["region_years"] = {region_panel.first_year, region_panel.last_year};
  summary["port_years"] = {port_panel.first_year, port_panel.last_year};
  summary["region_cells"] = region_panel.cells.size();
  summary["port_cells"] = port_panel.cells.size();
  summary["pci_values"] = pci.size();
  st.put("ingest/summary.json", summary.dump(2) + "\n");
  st.finish();
  return StageStatus::Ran;
}

StageStatus cmd_rca(const RunConfig& config, std::ostream& log) {
  Stage st(config, "rca", log);
  st.require("ingest");
  registry_inputs(st);
  st.input("ingest/region_exports.csv");
  st.input("ingest/port_exports.csv");
  if (st.up_to_date()) return st.skip();
  const auto reg = load_registries(st);
  const auto regions = load_region_panel(st, reg);
  const auto ports = load_port_panel(st, reg);
  const YearRange rw = config.proximity_window.value_or(YearRange{regions.first_year, regions.last_year});
  const YearRange pw = config.proximity_window.value_or(YearRange{ports.first_year, ports.last_year});
  st.put("rca/region_rca.csv", cube_to_csv(compute_rca(regions, RcaPooling::PerYear)));
  st.put("rca/port_rca.csv", cube_to_csv(compute_rca(ports, RcaPooling::PerYear)));
  st.put("rca/region_pooled.csv", cube_to_csv(compute_rca(regions, RcaPooling::PooledWindow, rw)));
  st.put("rca/port_pooled.csv", cube_to_csv(compute_rca(ports, RcaPooling::PooledWindow, pw)));
  st.finish();
  return StageStatus::Ran;
}

StageStatus cmd_proximity(const RunConfig& config, std::ostream& log) {
  Stage st(config, "proximity", log);
  st.require("rca");
  registry_inputs(st);
  st.input("rca/region_pooled.csv");
  st.input("rca/port_pooled.csv");
  if (st.up_to_date()) return st.skip();
  const auto reg = load_registries(st);
  const auto rp = cube_from_csv(st.path("rca/region_pooled.csv"), LocationKind::Region, RcaPooling::PooledWindow,
                                reg.regions, reg.products);
  const auto pp = cube_from_csv(st.path("rca/port_pooled.csv"), LocationKind::Port, RcaPooling::PooledWindow,
                                reg.ports, reg.products);
  const auto phi = compute_proximity(rp, rp.window);
  const auto big_phi = compute_proximity(pp, pp.window);
  st.put("proximity/production.csv", proximity_to_csv(phi));
  st.put("proximity/transport.csv", proximity_to_csv(big_phi));
  st.put("proximity/production_matrix.csv", proximity_matrix_csv(phi));
  st.put("proximity/transport_matrix.csv", proximity_matrix_csv(big_phi));
  st.finish();
  return StageStatus::Ran;
}

StageStatus cmd_density(const RunConfig& config, std::ostream& log) {
  Stage st(config, "density", log);
  st.require("rca");
  st.require("proximity");
  registry_inputs(st);
  st.input("rca/region_rca.csv");
  st.input("rca/port_rca.csv");
  st.input("proximity/production.csv");
  st.input("proximity/transport.csv");
  if (st.up_to_date()) return st.skip();
  const auto reg = load_registries(st);
  const auto rc = cube_from_csv(st.path("rca/region_rca.csv"), LocationKind::Region, RcaPooling::PerYear, reg.regions,
                                reg.products);
  const auto pc =
      cube_from_csv(st.path("rca/port_rca.csv"), LocationKind::Port, RcaPooling::PerYear, reg.ports, reg.products);
  const auto phi = proximity_from_csv(st.path("proximity/production.csv"), ProximityKind::Production, reg.products);
  const auto big_phi = proximity_from_csv(st.path("proximity/transport.csv"), ProximityKind::Transport, reg.products);
  st.put("density/omega.csv", density_to_csv(compute_density(rc, phi)));
  st.put("density/port_omega.csv", density_to_csv(compute_density(pc, big_phi)));
  st.finish();
  return StageStatus::Ran;
}

StageStatus cmd_jumps(const RunConfig& config, std::ostream& log) {
  Stage st(config, "jumps", log);
  st.require("rca");
  registry_inputs(st);
  st.input("rca/region_rca.csv");
  if (st.up_to_date()) return st.skip();
  const auto reg = load_registries(st);
  const auto rc = cube_from_csv(st.path("rca/region_rca.csv"), LocationKind::Region, RcaPooling::PerYear, reg.regions,
                                reg.products);
  const auto jumps = detect_jumps(rc, config.policy);
  std::size_t n_jumps = 0;
  for (std::size_t k = 0; k < jumps.s.size(); ++k) n_jumps += jumps.candidate[k] && jumps.s[k];
  st.put("jumps/jumps.csv", jumps_to_csv(jumps));
  ordered_json summary;
  summary["policy"] = std::string(to_string(config.policy));
  summary["base_years"] = jumps.base_years;
  summary["candidates"] = jumps.candidate_count();
  summary["jumps"] = n_jumps;
  st.put("jumps/summary.json", summary.dump(2) + "\n");
  st.finish();
  return StageStatus::Ran;
}

StageStatus cmd_match(const RunConfig& config, std::ostream& log) {
  Stage st(config, "match", log);
  st.require("ingest");
  st.require("rca");
  st.require("density");
  st.require("jumps");
  registry_inputs(st);
  for (const char* f : {"ingest/port_regions.csv", "ingest/region_exports.csv", "ingest/port_exports.csv",
                        "ingest/pci.csv", "rca/region_rca.csv", "rca/port_rca.csv", "density/omega.csv",
                        "density/port_omega.csv", "jumps/jumps.csv"})
    st.input(f);
  const bool with_continents = fs::exists(st.path("ingest/continents.csv"));
  if (with_continents) st.input("ingest/continents.csv");
  if (st.up_to_date()) return st.skip();
  const auto reg = load_registries(st);
  const auto regions = load_region_panel(st, reg);
  const auto map = load_port_region_map(st.path("ingest/port_regions.csv"));
  const auto pci = pci_from_csv(st.path("ingest/pci.csv"));
  const auto rc = cube_from_csv(st.path("rca/region_rca.csv"), LocationKind::Region, RcaPooling::PerYear, reg.regions,
                                reg.products);
  const auto pc =
      cube_from_csv(st.path("rca/port_rca.csv"), LocationKind::Port, RcaPooling::PerYear, reg.ports, reg.products);
  const auto omega = density_from_csv(st.path("density/omega.csv"), LocationKind::Region, reg.regions, reg.products);
  const auto port_omega =
      density_from_csv(st.path("density/port_omega.csv"), LocationKind::Port, reg.ports, reg.products);
  const auto jumps = jumps_from_csv(st.path("jumps/jumps.csv"), rc, config.policy);
  const auto trm = compute_trm(regions);
  std::optional<CountMap> des;
  if (with_continents) des = compute_des(load_port_panel(st, reg), load_continent_map(st.path("ingest/continents.csv")));
  const auto region = build_region_table(jumps, omega, rc, pci, trm);
  const auto matched = build_matched_table(region.table, port_omega, pc, map, des ? &*des : nullptr);
  st.put("match/region_table.csv", table_to_csv(region.table));
  st.put("match/region_drops.json", region.report.to_json());
  st.put("match/matched_table.csv", table_to_csv(matched.table));
  st.put("match/matched_drops.json", matched.report.to_json());
  st.finish();
  return StageStatus::Ran;
}

namespace {

struct FitJob {
  std::string table;   // region | matched
  std::string scheme;  // all | split scheme name
  std::string group;   // all | split group
  Family family;
  const EstimationTable* data;
  std::string file;
  std::optional<ModelFit> fit;
  std::string error;
};

ModelSpec job_spec(const RunConfig& c, const FitJob& job) {
  ModelSpec s = job.table == "region" ? region_model(job.family) : matched_model(job.family, c.with_des);
  s.bread = c.bread;
  s.cluster = c.cluster;
  s.dummies = c.dummies;
  return s;
}

}  // namespace

StageStatus cmd_regress(const RunConfig& config, std::ostream& log) {
  Stage st(config, "regress", log);
  st.require("match");
  st.input("match/region_table.csv");
  st.input("match/matched_table.csv");
  if (st.up_to_date()) return st.skip();
  const std::map<std::string, EstimationTable> tables = {
      {"region", table_from_csv(st.path("match/region_table.csv"))},
      {"matched", table_from_csv(st.path("match/matched_table.csv"))}};
  std::vector<std::pair<std::string, EstimationTable>> subsets;  // owned split tables
  subsets.reserve(16);
  std::vector<FitJob> jobs;
  const Family others[][2] = {{Family::Logit, Family::Lpm}, {Family::Probit, Family::Lpm}, {Family::Probit, Family::Logit}};
  for (const auto& name : {std::string("region"), std::string("matched")}) {
    const auto& t = tables.at(name);
    jobs.push_back({name, "all", "all", config.family, &t, "", std::nullopt, ""});
    for (Family f : others[static_cast<int>(config.family)]) jobs.push_back({name, "all", "all", f, &t, "", std::nullopt, ""});
    for (auto scheme : config.splits)
      for (auto& [group, sub] : split_sample(t, scheme)) {
        subsets.emplace_back(group, std::move(sub));
        jobs.push_back({name, std::string(to_string(scheme)), group, config.family, nullptr, "", std::nullopt, ""});
      }
  }
  // Attach split tables after `subsets` stops growing.
  for (std::size_t k = 0, s = 0; k < jobs.size(); ++k)
    if (!jobs[k].data) jobs[k].data = &subsets[s++].second;
  for (auto& j : jobs) j.file = "regress/" + j.table + "." + j.scheme + "." + j.group + "." + std::string(to_string(j.family)) + ".json";

  parallel_for(jobs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      try {
        jobs[k].fit = fit(*jobs[k].data, job_spec(config, jobs[k]));
      } catch (const Error& e) {
        jobs[k].error = e.what();
      }
    }
  });

  ordered_json index = ordered_json::array();
  for (const auto& j : jobs) {
    ordered_json e;
    e["table"] = j.table;
    e["scheme"] = j.scheme;
    e["group"] = j.group;
    e["family"] = std::string(to_string(j.family));
    e["rows"] = j.data->rows.size();
    if (j.fit) {
      e["file"] = j.file;
      st.put(j.file, fit_to_json(*j.fit));
    } else {
      e["error"] = j.error;
      log << "regress: " << j.table << " " << j.scheme << " " << j.group << " " << to_string(j.family)
          << " failed: " << j.error << "\n";
    }
    index.push_back(std::move(e));
  }
  st.put("regress/index.json", index.dump(2) + "\n");
  st.finish();
  return StageStatus::Ran;
}

namespace {

std::string group_label(const std::string& scheme, const std::string& group) {
  static const std::map<std::pair<std::string, std::string>, std::string> labels = {
      {{"all", "all"}, "All"},
      {{"pci-mean", "low"}, "Low PCI"},
      {{"pci-mean", "high"}, "High PCI"},
      {{"leamer-groups", "low"}, "Leamer 1-6"},
      {{"leamer-groups", "medium"}, "Leamer 7,8"},
      {{"leamer-groups", "high"}, "Leamer 9,10"},
      {{"periods", "crisis"}, "Crisis (2007-2009)"},
      {{"periods", "recovery"}, "Recovery (2010-2013)"},
      {{"periods", "post_crisis"}, "Post-crisis (2014-2018)"}};
  const auto it = labels.find({scheme, group});
  return it == labels.end() ? scheme + ":" + group : it->second;
}

std::string family_label(const std::string& f) { return f == "lpm" ? "LPM" : f == "logit" ? "Logit" : "Probit"; }

}  // namespace

StageStatus cmd_report(const RunConfig& config, std::ostream& log) {
  Stage st(config, "report", log);
  st.require("regress");
  st.require("proximity");
  registry_inputs(st);
  st.input("ingest/region_exports.csv");
  st.input("ingest/port_exports.csv");
  st.input("proximity/production.csv");
  st.input("proximity/transport.csv");
  st.input("regress/index.json");
  const auto index = json::parse(csv::read_file(st.path("regress/index.json")));
  for (const auto& e : index)
    if (e.contains("file")) st.input(e["file"].get<std::string>());
  if (st.up_to_date()) return st.skip();

  struct Entry {
    std::string table, scheme, group, family;
    std::optional<ModelFit> fit;
  };
  std::vector<Entry> entries;
  for (const auto& e : index) {
    Entry en{e["table"], e["scheme"], e["group"], e["family"], std::nullopt};
    if (e.contains("file")) en.fit = fit_from_json(csv::read_file(st.path(e["file"].get<std::string>())));
    entries.push_back(std::move(en));
  }
  const std::string main_family(to_string(config.family));
  auto column = [&](const std::string& table, const std::string& scheme, const std::string& group,
                    const std::string& family, std::string label) {
    for (const auto& e : entries)
      if (e.table == table && e.scheme == scheme && e.group == group && e.family == family)
        return ReportColumn{std::move(label), e.fit};
    return ReportColumn{std::move(label), std::nullopt};
  };

  std::vector<GroupTest> tests;
  std::string combined;
  auto emit = [&](const std::string& name, const ReportTable& t, const std::vector<std::string>& test_terms,
                  const std::vector<std::pair<std::size_t, std::size_t>>& groups) {
    st.put("report/" + name + ".txt", render_text_table(t));
    st.put("report/" + name + ".csv", render_csv_table(t));
    combined += render_text_table(t) + "\n";
    for (const auto& [first, last] : groups) {
      ReportTable sub;
      sub.columns.assign(t.columns.begin() + static_cast<std::ptrdiff_t>(first),
                         t.columns.begin() + static_cast<std::ptrdiff_t>(last));
      for (const auto& term : test_terms) {
        auto g = group_tests(sub, name, term);
        tests.insert(tests.end(), g.begin(), g.end());
      }
    }
  };

  const bool pci = std::count(config.splits.begin(), config.splits.end(), SplitScheme::PciMean) > 0;
  const bool leamer = std::count(config.splits.begin(), config.splits.end(), SplitScheme::LeamerGroups) > 0;
  const bool periods = std::count(config.splits.begin(), config.splits.end(), SplitScheme::Periods) > 0;
  for (const auto& table : {std::string("region"), std::string("matched")}) {
    ReportTable t;
    t.title = table == "region" ? "New potential industries by region (" + family_label(main_family) + ")"
                                : "Cross-space spillover from neighbouring ports (" + family_label(main_family) + ")";
    t.response = table == "region" ? "S_r,i(t+2)" : "S_r,p,i(t+2)";
    t.columns.push_back(column(table, "all", "all", main_family, "All"));
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    if (pci) {
      groups.push_back({t.columns.size(), t.columns.size() + 2});
      for (const char* g : {"low", "high"}) t.columns.push_back(column(table, "pci-mean", g, main_family, group_label("pci-mean", g)));
    }
    if (leamer) {
      groups.push_back({t.columns.size(), t.columns.size() + 3});
      for (const char* g : {"low", "medium", "high"})
        t.columns.push_back(column(table, "leamer-groups", g, main_family, group_label("leamer-groups", g)));
    }
    std::vector<std::string> terms{"omega"};
    if (table == "matched") terms.push_back("Omega");
    emit(table, t, terms, groups);

    if (periods) {
      ReportTable p;
      p.title = t.title + " by period";
      p.response = t.response;
      for (const char* g : {"crisis", "recovery", "post_crisis"})
        p.columns.push_back(column(table, "periods", g, main_family, group_label("periods", g)));
      emit(table + "_periods", p, terms, {{0, 3}});
    }
  }
  {
    ReportTable r;
    r.title = "Robustness across link functions";
    for (const auto& table : {std::string("region"), std::string("matched")})
      for (const char* f : {"probit", "logit", "lpm"})
        r.columns.push_back(column(table, "all", "all", f, std::string(table == "region" ? "Region " : "Matched ") + family_label(f)));
    emit("robustness", r, {}, {});
  }
  st.put("report/group_tests.csv", group_tests_csv(tests));
  st.put("report/tables.txt", combined);

  // Product-space graphs.
  const auto reg = load_registries(st);
  const auto regions = load_region_panel(st, reg);
  const auto ports = load_port_panel(st, reg);
  const auto phi = proximity_from_csv(st.path("proximity/production.csv"), ProximityKind::Production, reg.products);
  const auto big_phi = proximity_from_csv(st.path("proximity/transport.csv"), ProximityKind::Transport, reg.products);
  const auto g1 = build_product_space(phi, regions, config.edge_threshold);
  const auto g2 = build_product_space(big_phi, ports, config.edge_threshold);
  st.put("report/production_space.json", graph_to_json(g1));
  st.put("report/production_space.graphml", graph_to_graphml(g1));
  st.put("report/transport_space.json", graph_to_json(g2));
  st.put("report/transport_space.graphml", graph_to_graphml(g2));
  st.finish();
  return StageStatus::Ran;
}

StageStatus cmd_generate(const RunConfig& config, std::ostream& log) {
  Stage st(config, "generate", log);
  if (st.up_to_date()) return st.skip();
  config.synth.validate();
  const auto data = generate(config.synth);
  const auto tmp = st.out() / "generate" / ".staging";
  fs::remove_all(tmp);
  const auto files = write_synth_inputs(data, tmp.string());
  for (const auto& f : files) st.put("synth/" + f, csv::read_file((tmp / f).string()));
  fs::remove_all(tmp);

  RunConfig run = config;
  run.inputs = {"products.csv",     "regions.csv",      "ports.csv",       "port_regions.csv", "region_exports.csv",
                "port_exports.csv", "pci_hs2002.csv",   "concordance.csv", "continents.csv"};
  run.output = "..";
  st.put("synth/run.json", run_config_to_json(run));
  ordered_json summary;
  summary["seed"] = config.synth.seed;
  summary["candidates"] = data.truth.size();
  std::size_t jumps = 0;
  for (const auto& t : data.truth) jumps += t.s;
  summary["jumps"] = jumps;
  st.put("generate/summary.json", summary.dump(2) + "\n");
  st.finish();
  return StageStatus::Ran;
}

}  // namespace portspill
