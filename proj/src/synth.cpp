#include "portspill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <json.hpp>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"
#include "portspill/ingest.hpp"

namespace portspill {

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InfeasibleConfig, what); };
  if (n_regions < 2 || n_ports < 2) fail("need at least two regions and two ports (RCA is identically 1 otherwise)");
  if (n_ports > n_regions) fail("each port needs its own region");
  if (n_products < 1 || n_years < 1 || n_countries < 1) fail("counts must be positive");
  if (n_communities < 1 || n_communities > n_products) fail("communities must be between 1 and the product count");
  if (communities_per_location < 1) fail("communities_per_location must be positive");
  if (n_products > 9000) fail("at most 9000 products");
  for (double p : {affinity_in, affinity_out, fill_rate, churn})
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
}

namespace {

using nlohmann::ordered_json;

void read_beta(const nlohmann::json& j, SynthBeta& b) {
  for (const auto& [key, v] : j.items()) {
    if (key == "constant") b.constant = v.get<double>();
    else if (key == "omega") b.omega = v.get<double>();
    else if (key == "port_omega") b.port_omega = v.get<double>();
    else if (key == "k") b.k = v.get<double>();
    else if (key == "port_k") b.port_k = v.get<double>();
    else if (key == "pci") b.pci = v.get<double>();
    else if (key == "trm") b.trm = v.get<double>();
    else throw Error(ErrorKind::ConfigError, "unknown beta key '" + key + "'");
  }
}

ordered_json write_beta(const SynthBeta& b) {
  ordered_json j;
  j["constant"] = b.constant;
  j["omega"] = b.omega;
  j["port_omega"] = b.port_omega;
  j["k"] = b.k;
  j["port_k"] = b.port_k;
  j["pci"] = b.pci;
  j["trm"] = b.trm;
  return j;
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& text) {
  SynthConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, v] : j.items()) {
      if (key == "n_regions") c.n_regions = v.get<std::size_t>();
      else if (key == "n_ports") c.n_ports = v.get<std::size_t>();
      else if (key == "n_products") c.n_products = v.get<std::size_t>();
      else if (key == "n_years") c.n_years = v.get<std::size_t>();
      else if (key == "n_communities") c.n_communities = v.get<std::size_t>();
      else if (key == "n_countries") c.n_countries = v.get<std::size_t>();
      else if (key == "communities_per_location") c.communities_per_location = v.get<std::size_t>();
      else if (key == "first_year") c.first_year = v.get<int>();
      else if (key == "beta") read_beta(v, c.beta);
      else if (key == "port_beta") read_beta(v, c.port_beta);
      else if (key == "affinity_in") c.affinity_in = v.get<double>();
      else if (key == "affinity_out") c.affinity_out = v.get<double>();
      else if (key == "fill_rate") c.fill_rate = v.get<double>();
      else if (key == "churn") c.churn = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(ErrorKind::ConfigError, "unknown synth key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("synth config: ") + e.what());
  }
  return c;
}

std::string synth_config_to_json(const SynthConfig& c) {
  ordered_json j;
  j["n_regions"] = c.n_regions;
  j["n_ports"] = c.n_ports;
  j["n_products"] = c.n_products;
  j["n_years"] = c.n_years;
  j["n_communities"] = c.n_communities;
  j["n_countries"] = c.n_countries;
  j["communities_per_location"] = c.communities_per_location;
  j["first_year"] = c.first_year;
  j["beta"] = write_beta(c.beta);
  j["port_beta"] = write_beta(c.port_beta);
  j["affinity_in"] = c.affinity_in;
  j["affinity_out"] = c.affinity_out;
  j["fill_rate"] = c.fill_rate;
  j["churn"] = c.churn;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

namespace {

// Every draw goes through this one stream. Only the raw 64-bit engine output
// is used, so sequences do not depend on the standard library's
// distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = eng_();
    while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  long between(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::size_t>(hi - lo + 1))); }
  bool chance(double p) { return uniform() < p; }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> pick(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + below(n - i)]);
    idx.resize(k);
    return idx;
  }

 private:
  std::mt19937_64 eng_;
};

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Dense location x product values with per-cell routing (via index, amount).
struct Block {
  std::vector<double> x;
  std::vector<std::vector<std::pair<std::size_t, double>>> routes;
};

// Balassa advantage with the totals accumulated location-major.
std::vector<double> rca_of(const std::vector<double>& x, std::size_t n_loc, std::size_t n_prod) {
  std::vector<double> row(n_loc, 0.0), col(n_prod, 0.0);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i) row[l] += x[l * n_prod + i];
  for (std::size_t i = 0; i < n_prod; ++i)
    for (std::size_t l = 0; l < n_loc; ++l) col[i] += x[l * n_prod + i];
  double total = 0.0;
  for (double v : row) total += v;
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i)
      if (row[l] > 0.0 && col[i] > 0.0) out[l * n_prod + i] = (x[l * n_prod + i] / row[l]) / (col[i] / total);
  return out;
}

std::vector<std::uint8_t> advantage_of(const std::vector<double>& rca) {
  std::vector<std::uint8_t> m(rca.size());
  for (std::size_t k = 0; k < rca.size(); ++k) m[k] = rca[k] >= 1.0;
  return m;
}

std::vector<double> proximity_of(const std::vector<std::uint8_t>& m, std::size_t n_loc, std::size_t n_prod) {
  std::vector<int> ubiquity(n_prod, 0);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i) ubiquity[i] += m[l * n_prod + i];
  std::vector<double> phi(n_prod * n_prod, 0.0);
  for (std::size_t i = 0; i < n_prod; ++i)
    for (std::size_t j = 0; j < n_prod; ++j) {
      if (i == j) continue;
      int both = 0;
      for (std::size_t l = 0; l < n_loc; ++l) both += m[l * n_prod + i] & m[l * n_prod + j];
      const int d = std::max(ubiquity[i], ubiquity[j]);
      phi[i * n_prod + j] = d > 0 ? static_cast<double>(both) / d : 0.0;
    }
  return phi;
}

std::vector<double> density_of(const std::vector<std::uint8_t>& m, const std::vector<double>& phi, std::size_t n_loc,
                               std::size_t n_prod) {
  std::vector<double> row_sum(n_prod, 0.0);
  for (std::size_t i = 0; i < n_prod; ++i)
    for (std::size_t j = 0; j < n_prod; ++j) row_sum[i] += phi[i * n_prod + j];
  std::vector<double> out(n_loc * n_prod);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i) {
      double num = 0.0;
      for (std::size_t j = 0; j < n_prod; ++j)
        if (m[l * n_prod + j]) num += phi[i * n_prod + j];
      out[l * n_prod + i] = row_sum[i] > 0.0 ? num / row_sum[i] : std::numeric_limits<double>::quiet_NaN();
    }
  return out;
}

// m positive integer parts summing to v (v >= m).
std::vector<double> split(Stream& rng, long v, std::size_t m) {
  std::set<long> cuts;
  while (cuts.size() + 1 < m) cuts.insert(rng.between(1, v - 1));
  std::vector<double> parts;
  long prev = 0;
  for (long c : cuts) {
    parts.push_back(static_cast<double>(c - prev));
    prev = c;
  }
  parts.push_back(static_cast<double>(v - prev));
  return parts;
}

struct Side {
  std::size_t n_loc;
  std::size_t n_via;
  std::size_t max_routes;
  double fill_rate;  // 1 for ports: every product handled every year
};

// Values for one block given the advantage state of the real products. The
// balancing product (last column) brings every row to the same total R.
Block draw_block(Stream& rng, const Side& side, const std::vector<std::uint8_t>& state, std::size_t n_real, long d) {
  const std::size_t n = n_real + 1;
  const long r_total = d * static_cast<long>(n_real) + 10 * static_cast<long>(n_real) + d;
  Block b;
  b.x.assign(side.n_loc * n, 0.0);
  b.routes.assign(side.n_loc * n, {});
  for (std::size_t l = 0; l < side.n_loc; ++l) {
    long row = 0;
    for (std::size_t i = 0; i < n_real; ++i) {
      long v = 0;
      if (state[l * n_real + i]) v = d;
      else if (rng.chance(side.fill_rate)) v = rng.between(1, 10);
      if (v == 0) continue;
      const auto m = static_cast<std::size_t>(
          rng.between(1, static_cast<long>(std::min<std::size_t>({side.max_routes, side.n_via, static_cast<std::size_t>(v)}))));
      const auto vias = rng.pick(side.n_via, m);
      const auto parts = split(rng, v, m);
      for (std::size_t k = 0; k < m; ++k) b.routes[l * n + i].emplace_back(vias[k], parts[k]);
      b.x[l * n + i] = static_cast<double>(v);
      row += v;
    }
    const long filler = r_total - row;
    b.x[l * n + n_real] = static_cast<double>(filler);
    b.routes[l * n + n_real].emplace_back(rng.below(side.n_via), static_cast<double>(filler));
  }
  return b;
}

std::string hs4_of(std::size_t i) {
  // Chapters 01..97 without the reserved 77, cycled so codes spread over sections.
  static const std::vector<int> chapters = [] {
    std::vector<int> c;
    for (int ch = 1; ch <= 97; ++ch)
      if (ch != 77) c.push_back(ch);
    return c;
  }();
  const int chapter = chapters[i % chapters.size()];
  const int heading = 1 + static_cast<int>(i / chapters.size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d%02d", chapter, heading);
  return buf;
}

std::string numbered(char prefix, std::size_t i, std::size_t n) {
  const int width = n < 100 ? 2 : (n < 1000 ? 3 : 4);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i + 1);
  return buf;
}

// Anchor advantage pattern: community affinities with every real product
// held by at least one and at most n_loc - 1 locations.
std::vector<std::uint8_t> draw_anchor(Stream& rng, const SynthConfig& c, std::size_t n_loc,
                                      const std::vector<int>& community) {
  const std::size_t n_real = c.n_products;
  std::vector<std::uint8_t> m(n_loc * n_real, 0);
  const std::size_t per = std::min(c.communities_per_location, c.n_communities);
  for (std::size_t l = 0; l < n_loc; ++l) {
    const auto own = rng.pick(c.n_communities, per);
    const std::set<std::size_t> mine(own.begin(), own.end());
    for (std::size_t i = 0; i < n_real; ++i) {
      const bool in = mine.count(static_cast<std::size_t>(community[i])) > 0;
      m[l * n_real + i] = rng.chance(in ? c.affinity_in : c.affinity_out);
    }
  }
  for (std::size_t i = 0; i < n_real; ++i) {
    std::size_t k = 0;
    for (std::size_t l = 0; l < n_loc; ++l) k += m[l * n_real + i];
    if (k == 0) m[rng.below(n_loc) * n_real + i] = 1;
    if (k == n_loc) m[rng.below(n_loc) * n_real + i] = 0;
  }
  return m;
}

constexpr double kAnchorScale = 1048576.0;  // 2^20: exact scaling, RCA unchanged

}  // namespace

SynthData generate(const SynthConfig& c) {
  c.validate();
  Stream rng(c.seed);
  SynthData out;
  out.config = c;

  const std::size_t n_real = c.n_products;
  const std::size_t n_all = n_real + 1;
  std::vector<std::string> codes;
  for (std::size_t i = 0; i < n_real; ++i) codes.push_back(hs4_of(i));
  std::sort(codes.begin(), codes.end());
  out.filler = "9999";
  std::vector<ProductCode> pc;
  for (const auto& code : codes) pc.push_back({code, hs_section(code), bundled_leamer(code)});
  pc.push_back({out.filler, 21, std::nullopt});
  out.products = std::make_shared<ProductUniverse>(pc);
  out.community.resize(n_all, -1);
  for (std::size_t i = 0; i < n_real; ++i) out.community[i] = static_cast<int>(i % c.n_communities);

  std::vector<std::string> region_codes, port_codes, country_codes;
  for (std::size_t r = 0; r < c.n_regions; ++r) region_codes.push_back(numbered('R', r, c.n_regions));
  for (std::size_t p = 0; p < c.n_ports; ++p) port_codes.push_back(numbered('P', p, c.n_ports));
  for (std::size_t k = 0; k < c.n_countries; ++k) country_codes.push_back(numbered('C', k, c.n_countries));
  out.regions = std::make_shared<LocationRegistry>(LocationKind::Region, region_codes);
  out.ports = std::make_shared<LocationRegistry>(LocationKind::Port, port_codes);
  out.countries = std::make_shared<LocationRegistry>(LocationKind::Port, country_codes);
  static constexpr Continent kContinents[] = {Continent::Asia, Continent::Europe, Continent::NorthAmerica,
                                              Continent::SouthAmerica, Continent::Africa, Continent::Oceania};
  for (std::size_t k = 0; k < c.n_countries; ++k) out.continents.add(country_codes[k], kContinents[k % 6]);

  // Port p sits in region floor(p * R / P); regions with a port get its index.
  std::vector<std::optional<std::size_t>> port_of(c.n_regions);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t p = 0; p < c.n_ports; ++p) {
    const std::size_t r = p * c.n_regions / c.n_ports;
    port_of[r] = p;
    pairs.emplace_back(port_codes[p], region_codes[r]);
  }
  out.map = PortRegionMap(pairs);

  std::vector<double> pci(n_real);
  for (std::size_t i = 0; i < n_real; ++i) pci[i] = std::round(rng.normal() * 1e6) / 1e6;
  for (std::size_t y = 0; y < c.n_years; ++y)
    for (std::size_t i = 0; i < n_real; ++i) out.pci.set(codes[i], c.first_year + static_cast<int>(y), pci[i]);

  const long d = 1000 * std::max<long>(1, static_cast<long>((20 * std::max(c.n_regions, c.n_ports) + 999) / 1000));
  const Side region_side{c.n_regions, c.n_ports, 3, c.fill_rate};
  const Side port_side{c.n_ports, c.n_countries, 4, 1.0};

  const auto region_anchor = draw_anchor(rng, c, c.n_regions, out.community);
  const auto port_anchor = draw_anchor(rng, c, c.n_ports, out.community);
  auto region_state = region_anchor;
  auto port_state = port_anchor;

  const std::size_t n_blocks = (c.n_years + 1) / 2;
  std::vector<Block> region_blocks, port_blocks;
  std::vector<std::vector<std::uint8_t>> region_history;  // real-product state per block
  std::vector<std::vector<double>> omega_hist, port_omega_hist;
  std::vector<double> phi_region, phi_port;
  std::vector<std::uint8_t> pooled_region_m, pooled_port_m;

  auto draw_checked = [&](const Side& side, const std::vector<std::uint8_t>& state, bool anchor) {
    for (int attempt = 0; attempt < 256; ++attempt) {
      Block b = draw_block(rng, side, state, n_real, d);
      const auto rca = rca_of(b.x, side.n_loc, n_all);
      bool ok = true;
      for (std::size_t l = 0; l < side.n_loc && ok; ++l) {
        const double f = rca[l * n_all + n_real];
        // Later years shift the pooled anchor RCA by about 1e-5 at most.
        if (std::abs(f - 1.0) < (anchor ? 1e-4 : 1e-9)) ok = false;
        for (std::size_t i = 0; i < n_real && ok; ++i)
          if ((rca[l * n_all + i] >= 1.0) != (state[l * n_real + i] != 0)) ok = false;
      }
      if (ok) return b;
    }
    throw Error(ErrorKind::InfeasibleConfig, "cannot realise the advantage state with clear RCA margins");
  };

  auto full_m = [&](const Block& b, std::size_t n_loc) { return advantage_of(rca_of(b.x, n_loc, n_all)); };

  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    region_blocks.push_back(draw_checked(region_side, region_state, blk == 0));
    port_blocks.push_back(draw_checked(port_side, port_state, blk == 0));
    const auto m_region = full_m(region_blocks.back(), c.n_regions);
    const auto m_port = full_m(port_blocks.back(), c.n_ports);
    if (blk == 0) {
      // The scaled anchor year dominates every pooled sum, so pooled
      // advantage (and proximity) equals the anchor pattern.
      pooled_region_m = m_region;
      pooled_port_m = m_port;
      phi_region = proximity_of(m_region, c.n_regions, n_all);
      phi_port = proximity_of(m_port, c.n_ports, n_all);
    }
    region_history.push_back(region_state);
    omega_hist.push_back(density_of(m_region, phi_region, c.n_regions, n_all));
    port_omega_hist.push_back(density_of(m_port, phi_port, c.n_ports, n_all));
    if (blk + 1 == n_blocks) break;

    const auto& omega = omega_hist.back();
    const auto& port_omega = port_omega_hist.back();
    std::vector<int> k(n_real, 0), big_k(n_real, 0);
    for (std::size_t i = 0; i < n_real; ++i) {
      for (std::size_t r = 0; r < c.n_regions; ++r) k[i] += m_region[r * n_all + i];
      for (std::size_t p = 0; p < c.n_ports; ++p) big_k[i] += m_port[p * n_all + i];
    }
    auto finite = [](double v) { return std::isnan(v) ? 0.0 : v; };

    auto next_region = region_state;
    for (std::size_t r = 0; r < c.n_regions; ++r)
      for (std::size_t i = 0; i < n_real; ++i) {
        if (region_state[r * n_real + i]) continue;
        const auto& routes = region_blocks.back().routes[r * n_all + i];
        const SynthBeta& b = c.beta;
        double eta = b.constant + b.omega * finite(omega[r * n_all + i]) + b.k * k[i] + b.pci * pci[i] +
                     b.trm * static_cast<double>(routes.size());
        if (port_of[r]) {
          const std::size_t p = *port_of[r];
          eta += b.port_omega * finite(port_omega[p * n_all + i]) + b.port_k * big_k[i];
        }
        if (rng.uniform() < phi_cdf(eta)) next_region[r * n_real + i] = 1;
      }
    auto next_port = port_state;
    for (std::size_t p = 0; p < c.n_ports; ++p)
      for (std::size_t i = 0; i < n_real; ++i) {
        if (port_state[p * n_real + i]) continue;
        const SynthBeta& b = c.port_beta;
        const double eta = b.constant + b.omega * finite(port_omega[p * n_all + i]) + b.k * big_k[i] + b.pci * pci[i];
        if (rng.uniform() < phi_cdf(eta)) next_port[p * n_real + i] = 1;
      }
    if (c.churn > 0.0) {
      for (std::size_t q = 0; q < next_region.size(); ++q)
        if (region_state[q] && !region_anchor[q] && rng.chance(c.churn)) next_region[q] = 0;
      for (std::size_t q = 0; q < next_port.size(); ++q)
        if (port_state[q] && !port_anchor[q] && rng.chance(c.churn)) next_port[q] = 0;
    }
    // Keep every product held somewhere so inactive small values stay below 1.
    for (auto* st : {&next_region, &next_port}) {
      const std::size_t n_loc = st == &next_region ? c.n_regions : c.n_ports;
      const auto& anchor = st == &next_region ? region_anchor : port_anchor;
      for (std::size_t i = 0; i < n_real; ++i) {
        std::size_t held = 0;
        for (std::size_t l = 0; l < n_loc; ++l) held += (*st)[l * n_real + i];
        if (held == 0)
          for (std::size_t l = 0; l < n_loc; ++l) (*st)[l * n_real + i] = anchor[l * n_real + i];
      }
    }
    region_state = std::move(next_region);
    port_state = std::move(next_port);
  }

  // Panels.
  auto build_panel = [&](LocationKind kind, std::shared_ptr<const LocationRegistry> locs,
                         std::shared_ptr<const LocationRegistry> via, const std::vector<Block>& blocks) {
    ExportPanel panel;
    panel.kind = kind;
    panel.locations = locs;
    panel.products = out.products;
    panel.via_registry = via;
    panel.first_year = c.first_year;
    panel.last_year = c.first_year + static_cast<int>(c.n_years) - 1;
    for (std::size_t y = 0; y < c.n_years; ++y) {
      const Block& b = blocks[y / 2];
      const double scale = y == 0 ? kAnchorScale : 1.0;
      const int year = c.first_year + static_cast<int>(y);
      for (std::size_t l = 0; l < locs->size(); ++l)
        for (std::size_t i = 0; i < n_all; ++i) {
          const std::size_t q = l * n_all + i;
          if (b.x[q] <= 0.0) continue;
          const auto li = static_cast<std::int32_t>(l);
          const auto ii = static_cast<std::int32_t>(i);
          panel.cells[CellKey{li, ii, year}] = b.x[q] * scale;
          for (const auto& [v, amount] : b.routes[q]) panel.routing[RouteKey{li, ii, year, via->code(v)}] += amount * scale;
        }
    }
    return panel;
  };
  out.region_panel = build_panel(LocationKind::Region, out.regions, out.ports, region_blocks);
  out.port_panel = build_panel(LocationKind::Port, out.ports, out.countries, port_blocks);

  // Pooled advantage over the whole window must equal the anchor pattern.
  auto pooled_check = [&](const ExportPanel& panel, std::size_t n_loc, const std::vector<std::uint8_t>& expect) {
    std::vector<double> x(n_loc * n_all, 0.0);
    for (const auto& [key, value] : panel.cells) x[static_cast<std::size_t>(key.location) * n_all + key.product] += value;
    if (advantage_of(rca_of(x, n_loc, n_all)) != expect)
      throw Error(ErrorKind::InfeasibleConfig, "pooled advantage drifted from the anchor pattern");
  };
  pooled_check(out.region_panel, c.n_regions, pooled_region_m);
  pooled_check(out.port_panel, c.n_ports, pooled_port_m);

  // Truth rows: candidates under the truncate rule.
  const std::size_t n_years = c.n_years;
  for (std::size_t r = 0; r < c.n_regions; ++r)
    for (std::size_t i = 0; i < n_real; ++i) {
      auto m_at = [&](long y) { return region_history[static_cast<std::size_t>(y) / 2][r * n_real + i]; };
      for (std::size_t y = 0; y + 2 < n_years; ++y) {
        const long t = static_cast<long>(y);
        if (m_at(t)) continue;
        bool s = true;
        for (long u = t + 2; u <= std::min<long>(t + 4, static_cast<long>(n_years) - 1); ++u) s = s && m_at(u);
        for (long u = std::max<long>(0, t - 2); u < t; ++u) s = s && !m_at(u);
        SynthTruthRow row;
        row.region = region_codes[r];
        row.product = codes[i];
        row.year = c.first_year + static_cast<int>(y);
        row.omega = omega_hist[y / 2][r * n_all + i];
        if (port_of[r]) {
          row.port = port_codes[*port_of[r]];
          const double v = port_omega_hist[y / 2][*port_of[r] * n_all + i];
          if (!std::isnan(v)) row.port_omega = v;
        }
        row.s = s;
        out.truth.push_back(std::move(row));
      }
    }
  return out;
}

std::string truth_to_csv(const std::vector<SynthTruthRow>& truth) {
  csv::Writer w;
  w.row({"region", "port", "product", "year", "omega", "Omega", "S"});
  for (const auto& t : truth)
    w.row({t.region, t.port, t.product, std::to_string(t.year), csv::format_double(t.omega),
           t.port_omega ? csv::format_double(*t.port_omega) : "NA", std::to_string(t.s)});
  return w.str();
}

std::vector<std::string> write_synth_inputs(const SynthData& data, const std::string& dir) {
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    csv::write_if_changed(dir + "/" + name, content);
    files.push_back(name);
  };
  {
    csv::Writer w;
    w.row({"hs4", "section", "leamer"});
    for (const auto& p : data.products->products())
      w.row({p.hs4, std::to_string(p.section), p.leamer ? std::to_string(*p.leamer) : "unknown"});
    put("products.csv", w.str());
  }
  for (const auto& [name, reg] : {std::pair{"regions.csv", data.regions}, {"ports.csv", data.ports}}) {
    csv::Writer w;
    w.row({"code"});
    for (const auto& code : reg->codes()) w.row({code});
    put(name, w.str());
  }
  {
    csv::Writer w;
    w.row({"port", "region"});
    for (const auto& [port, region] : data.map.pairs()) w.row({port, region});
    put("port_regions.csv", w.str());
  }
  put("region_exports.csv", export_panel_csv(data.region_panel));
  put("port_exports.csv", export_panel_csv(data.port_panel));
  {
    csv::Writer pci, conc;
    pci.row({"hs2002", "year", "pci"});
    conc.row({"hs2002", "hs2017"});
    for (const auto& [key, v] : data.pci.values()) pci.row({key.first, std::to_string(key.second), csv::format_double(v)});
    for (const auto& p : data.products->products())
      if (p.hs4 != data.filler) conc.row({p.hs4, p.hs4});
    put("pci_hs2002.csv", pci.str());
    put("concordance.csv", conc.str());
  }
  {
    csv::Writer w;
    w.row({"country", "continent"});
    for (const auto& [country, continent] : data.continents.entries()) w.row({country, std::string(to_string(continent))});
    put("continents.csv", w.str());
  }
  put("truth.csv", truth_to_csv(data.truth));
  put("synth_config.json", synth_config_to_json(data.config));
  return files;
}

}  // namespace portspill
