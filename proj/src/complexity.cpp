#include "portspill/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "portspill/error.hpp"
#include "portspill/kernels.hpp"
#include "portspill/parallel.hpp"

namespace portspill {

const AdvantageSlice* AdvantageCube::slice(int year) const {
  auto it = std::lower_bound(slices.begin(), slices.end(), year,
                             [](const AdvantageSlice& s, int y) { return s.year < y; });
  if (it == slices.end() || it->year != year) return nullptr;
  return &*it;
}

bool AdvantageCube::advantage(std::size_t location, std::size_t product, int year) const {
  const auto* s = slice(year);
  return s && s->advantage(location, product);
}

int AdvantageCube::ubiquity(std::size_t product, int year) const {
  const auto* s = slice(year);
  return s ? s->ubiquity.at(product) : 0;
}

std::vector<int> AdvantageCube::years() const {
  std::vector<int> out;
  for (const auto& s : slices) out.push_back(s.year);
  return out;
}

namespace {

AdvantageSlice make_slice(int year, const Eigen::MatrixXd& x) {
  const auto n_loc = static_cast<std::size_t>(x.rows());
  const auto n_prod = static_cast<std::size_t>(x.cols());
  std::vector<double> row_total(n_loc, 0.0);
  std::vector<double> col_total(n_prod, 0.0);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i) row_total[l] += x(l, i);
  for (std::size_t i = 0; i < n_prod; ++i)
    for (std::size_t l = 0; l < n_loc; ++l) col_total[i] += x(l, i);
  double total = 0.0;
  for (double v : row_total) total += v;

  AdvantageSlice s;
  s.year = year;
  s.rca = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  s.m.assign(n_loc * n_prod, 0);
  s.present.assign(n_loc, 0);
  s.ubiquity.assign(n_prod, 0);
  for (std::size_t l = 0; l < n_loc; ++l) {
    if (row_total[l] <= 0.0) continue;
    s.present[l] = 1;
    for (std::size_t i = 0; i < n_prod; ++i) {
      if (col_total[i] <= 0.0) continue;
      const double rca = (x(l, i) / row_total[l]) / (col_total[i] / total);
      s.rca(l, i) = rca;
      if (rca >= 1.0) {
        s.m[l * n_prod + i] = 1;
        ++s.ubiquity[i];
      }
    }
  }
  return s;
}

}  // namespace

AdvantageCube compute_rca(const ExportPanel& panel, RcaPooling pooling, std::optional<YearRange> window) {
  AdvantageCube cube;
  cube.kind = panel.kind;
  cube.pooling = pooling;
  cube.locations = panel.locations;
  cube.products = panel.products;
  cube.window = window.value_or(YearRange{panel.first_year, panel.last_year});
  const auto n_loc = static_cast<Eigen::Index>(panel.locations ? panel.locations->size() : 0);
  const auto n_prod = static_cast<Eigen::Index>(panel.products ? panel.products->size() : 0);
  if (cube.window.empty()) throw Error(ErrorKind::EmptyYear, "empty year window");

  if (pooling == RcaPooling::PooledWindow) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_loc, n_prod);
    // Cells iterate in (location, product, year) order, so each pooled sum
    // accumulates in ascending year order.
    for (const auto& [key, value] : panel.cells)
      if (cube.window.contains(key.year)) x(key.location, key.product) += value;
    if (!(x.sum() > 0.0))
      throw Error(ErrorKind::EmptyYear, std::to_string(cube.window.first) + "-" + std::to_string(cube.window.last));
    cube.slices.push_back(make_slice(cube.window.first, x));
    return cube;
  }

  const int n_years = cube.window.last - cube.window.first + 1;
  std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(n_years), Eigen::MatrixXd::Zero(n_loc, n_prod));
  for (const auto& [key, value] : panel.cells)
    if (cube.window.contains(key.year)) xs[static_cast<std::size_t>(key.year - cube.window.first)](key.location, key.product) = value;
  for (int t = 0; t < n_years; ++t) {
    const auto& x = xs[static_cast<std::size_t>(t)];
    if (!(x.sum() > 0.0)) throw Error(ErrorKind::EmptyYear, std::to_string(cube.window.first + t));
    cube.slices.push_back(make_slice(cube.window.first + t, x));
  }
  return cube;
}

std::string_view to_string(ProximityKind kind) {
  return kind == ProximityKind::Production ? "production" : "transport";
}

ProximityMatrix compute_proximity(const AdvantageCube& cube, YearRange window) {
  if (cube.pooling != RcaPooling::PooledWindow || cube.slices.size() != 1 || cube.window != window)
    throw Error(ErrorKind::InvalidSpec, "proximity needs a cube pooled over the requested window");
  const auto& s = cube.slices.front();
  const auto n_loc = static_cast<std::size_t>(s.rca.rows());
  const auto n_prod = static_cast<std::size_t>(s.rca.cols());
  const std::size_t words = std::max<std::size_t>(1, (n_loc + 63) / 64);

  // Product-major bitsets over locations.
  std::vector<std::uint64_t> bits(n_prod * words, 0);
  for (std::size_t l = 0; l < n_loc; ++l)
    for (std::size_t i = 0; i < n_prod; ++i)
      if (s.advantage(l, i)) bits[i * words + l / 64] |= std::uint64_t{1} << (l % 64);

  ProximityMatrix prox;
  prox.kind = cube.kind == LocationKind::Region ? ProximityKind::Production : ProximityKind::Transport;
  prox.window = window;
  prox.products = cube.products;
  prox.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_prod), static_cast<Eigen::Index>(n_prod));

  parallel_for(n_prod, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> counts(n_prod);
    for (std::size_t i = begin; i < end; ++i) {
      kernels::and_popcount_many(std::span(bits).subspan(i * words, words), bits, words, counts);
      for (std::size_t j = 0; j < n_prod; ++j) {
        if (j == i) continue;
        const int denom = std::max(s.ubiquity[i], s.ubiquity[j]);
        // column i is written only by the worker owning i
        prox.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            denom > 0 ? static_cast<double>(counts[j]) / static_cast<double>(denom) : 0.0;
      }
    }
  });
  return prox;
}

std::optional<double> RelatednessPanel::at(std::size_t location, std::size_t product, int year) const {
  auto it = std::lower_bound(years.begin(), years.end(), year);
  if (it == years.end() || *it != year) return std::nullopt;
  const double v = density[static_cast<std::size_t>(it - years.begin())](static_cast<Eigen::Index>(location),
                                                                         static_cast<Eigen::Index>(product));
  if (std::isnan(v)) return std::nullopt;
  return v;
}

RelatednessPanel compute_density(const AdvantageCube& cube, const ProximityMatrix& prox) {
  const auto n_prod = static_cast<std::size_t>(prox.values.rows());
  const auto n_loc = static_cast<std::size_t>(cube.locations ? cube.locations->size() : 0);
  if (cube.products && cube.products->size() != n_prod)
    throw Error(ErrorKind::InvalidSpec, "cube and proximity disagree on the product universe");

  std::vector<double> row_sum(n_prod, 0.0);
  for (std::size_t i = 0; i < n_prod; ++i)
    for (std::size_t j = 0; j < n_prod; ++j)
      row_sum[i] += prox.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  RelatednessPanel out;
  out.kind = cube.kind;
  out.locations = cube.locations;
  out.products = cube.products;
  out.years = cube.years();
  out.density.resize(cube.slices.size());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < cube.slices.size(); ++t) {
    const auto& s = cube.slices[t];
    auto& d = out.density[t];
    d.resize(static_cast<Eigen::Index>(n_loc), static_cast<Eigen::Index>(n_prod));
    parallel_for(n_loc, [&](std::size_t begin, std::size_t end) {
      std::vector<double> num(n_prod);
      for (std::size_t l = begin; l < end; ++l) {
        std::fill(num.begin(), num.end(), 0.0);
        // Symmetric proximity: column j doubles as row j, contiguous in
        // column-major storage. Adds run in ascending j for every i.
        for (std::size_t j = 0; j < n_prod; ++j) {
          if (!s.advantage(l, j)) continue;
          kernels::axpy(1.0, std::span<const double>(prox.values.col(static_cast<Eigen::Index>(j)).data(), n_prod),
                        num);
        }
        for (std::size_t i = 0; i < n_prod; ++i)
          d(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = row_sum[i] > 0.0 ? num[i] / row_sum[i] : nan;
      }
    });
  }
  return out;
}

std::vector<std::pair<std::string, double>> nearest_products(const ProximityMatrix& prox, std::string_view hs4,
                                                             std::size_t n) {
  if (!prox.products) throw Error(ErrorKind::UnknownProduct, std::string(hs4));
  const auto idx = prox.products->find(hs4);
  if (!idx) throw Error(ErrorKind::UnknownProduct, std::string(hs4));
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < prox.products->size(); ++j)
    if (j != *idx) order.push_back(j);
  const auto row = static_cast<Eigen::Index>(*idx);
  // Universe indices follow HS order, so index order is the tie-break.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return prox.values(row, static_cast<Eigen::Index>(a)) > prox.values(row, static_cast<Eigen::Index>(b));
  });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t k = 0; k < std::min(n, order.size()); ++k)
    out.emplace_back(prox.products->at(order[k]).hs4, prox.values(row, static_cast<Eigen::Index>(order[k])));
  return out;
}

CountMap compute_trm(const ExportPanel& regional) {
  if (!regional.has_routing()) throw Error(ErrorKind::MissingRouting, "regional panel has no port routing");
  CountMap out;
  for (const auto& [key, value] : regional.routing)
    if (value > 0.0) ++out[CellKey{key.location, key.product, key.year}];
  return out;
}

CountMap compute_des(const ExportPanel& port_panel, const ContinentMap& continents) {
  if (!port_panel.has_routing()) throw Error(ErrorKind::MissingRouting, "port panel has no destination routing");
  std::map<CellKey, std::set<Continent>> seen;
  for (const auto& [key, value] : port_panel.routing) {
    const Continent c = continents.at(key.via);
    if (value > 0.0) seen[CellKey{key.location, key.product, key.year}].insert(c);
  }
  CountMap out;
  for (const auto& [key, set] : seen) out.emplace(key, static_cast<int>(set.size()));
  return out;
}

}  // namespace portspill
