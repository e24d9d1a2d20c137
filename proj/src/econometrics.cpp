#include "portspill/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <json.hpp>

#include "portspill/error.hpp"
#include "portspill/kernels.hpp"

namespace portspill {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Probit: return "probit";
    case Family::Logit: return "logit";
    case Family::Lpm: return "lpm";
  }
  return "?";
}

Family parse_family(std::string_view text) {
  if (text == "probit") return Family::Probit;
  if (text == "logit") return Family::Logit;
  if (text == "lpm") return Family::Lpm;
  throw Error(ErrorKind::ConfigError, "unknown model family '" + std::string(text) + "'");
}

void Frame::add_numeric(std::string name, std::vector<double> values) {
  if (numeric.empty() && factors.empty()) rows = values.size();
  if (values.size() != rows) throw Error(ErrorKind::InvalidSpec, "column '" + name + "' has the wrong length");
  numeric[std::move(name)] = std::move(values);
}

void Frame::add_factor(std::string name, std::vector<std::string> values) {
  if (numeric.empty() && factors.empty()) rows = values.size();
  if (values.size() != rows) throw Error(ErrorKind::InvalidSpec, "column '" + name + "' has the wrong length");
  factors[std::move(name)] = std::move(values);
}

Frame Frame::from_table(const EstimationTable& table) {
  const double na = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = table.rows.size();
  std::vector<double> s(n), omega(n), big_omega(n), k(n), big_k(n), pci(n), trm(n), des(n), leamer(n);
  std::vector<std::string> year(n), region(n), port(n), product(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& o = table.rows[r];
    s[r] = o.s;
    omega[r] = o.omega;
    big_omega[r] = o.port_omega.value_or(na);
    k[r] = o.k;
    big_k[r] = o.port_k ? *o.port_k : na;
    pci[r] = o.pci;
    trm[r] = o.trm;
    des[r] = o.des ? *o.des : na;
    leamer[r] = o.leamer ? *o.leamer : na;
    year[r] = std::to_string(o.year);
    region[r] = o.region;
    port[r] = o.port;
    product[r] = o.product;
  }
  Frame f;
  f.rows = n;
  f.numeric = {{"S", std::move(s)},   {"omega", std::move(omega)}, {"Omega", std::move(big_omega)},
               {"k", std::move(k)},   {"K", std::move(big_k)},     {"PCI", std::move(pci)},
               {"TRM", std::move(trm)}, {"DES", std::move(des)},   {"leamer", std::move(leamer)}};
  f.factors = {{"year", std::move(year)}, {"region", std::move(region)}, {"port", std::move(port)},
               {"product", std::move(product)}};
  return f;
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// log Phi(x), with the Mills-ratio tail once erfc underflows.
double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / (x * x));
}

// phi(x) / Phi(x)
double mills(double x) {
  if (x > -30.0) return norm_pdf(x) / norm_cdf(x);
  return -x / (1.0 - 1.0 / (x * x));
}

double normal_p(double z) { return std::erfc(std::abs(z) * kInvSqrt2); }

// Per-observation pieces of a binary log-likelihood at index eta.
struct Pieces {
  double ll;
  double resid;     // d ll / d eta
  double w_exp;     // expected information weight
  double w_obs;     // observed information weight
};

Pieces pieces(Family family, double y, double eta) {
  if (family == Family::Probit) {
    const double r = y > 0.5 ? mills(eta) : -mills(-eta);
    const double ll = y > 0.5 ? log_norm_cdf(eta) : log_norm_cdf(-eta);
    const double p = norm_cdf(eta);
    const double f = norm_pdf(eta);
    const double denom = p * (1.0 - p);
    const double w_exp = denom > 0.0 ? f * f / denom : r * (r + eta);
    return {ll, r, w_exp, r * (r + eta)};
  }
  const double p = 1.0 / (1.0 + std::exp(-eta));
  const double log1pexp = std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
  const double ll = y * eta - log1pexp;
  const double w = p * (1.0 - p);
  return {ll, y - p, w, w};
}

// Sum over observations of ll(eta0 + move) - ll(eta0). Tiny index moves use a
// third-order expansion so the gain stays accurate below the rounding noise
// of the full log-likelihood sum.
double increment(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta0, const Eigen::VectorXd& move) {
  double gain = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double delta = move(i);
    if (delta == 0.0) continue;
    const auto a = pieces(family, y(i), eta0(i));
    if (std::abs(delta) > 1e-5) {
      gain += pieces(family, y(i), eta0(i) + delta).ll - a.ll;
      continue;
    }
    double d2, d3;
    if (family == Family::Probit) {
      const double r = a.resid;
      d2 = -r * (r + eta0(i));
      d3 = -d2 * (2.0 * r + eta0(i)) - r;
    } else {
      const double p = 1.0 / (1.0 + std::exp(-eta0(i)));
      d2 = -p * (1.0 - p);
      d3 = d2 * (1.0 - 2.0 * p);
    }
    gain += delta * (a.resid + delta * (0.5 * d2 + delta * d3 / 6.0));
  }
  return gain;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd gram(const RowMatrix& xr, const std::vector<double>& w) {
  const auto rows = static_cast<std::size_t>(xr.rows());
  const auto cols = static_cast<std::size_t>(xr.cols());
  std::vector<double> g(cols * cols, 0.0);
  kernels::weighted_gram(std::span<const double>(xr.data(), rows * cols), rows, cols, w, g);
  Eigen::MatrixXd out(xr.cols(), xr.cols());
  for (std::size_t a = 0; a < cols; ++a)
    for (std::size_t b = 0; b < cols; ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = g[a * cols + b];
  return out;
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& a) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error(ErrorKind::SingularDesign, "information matrix is not positive definite");
  return ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

// G/(G-1) * B (sum_c g_c g_c^T) B with g_c the per-cluster score sums.
Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& bread, const Design& d, const Eigen::VectorXd& resid) {
  const Eigen::Index p = d.x.cols();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.n_clusters), p);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) sums.row(d.cluster[static_cast<std::size_t>(i)]) += resid(i) * d.x.row(i);
  const Eigen::MatrixXd meat = sums.transpose() * sums;
  const double g = static_cast<double>(d.n_clusters);
  return g / (g - 1.0) * bread * meat * bread;
}

std::size_t gram_rank(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  // Scale columns to unit norm so the rank threshold is relative.
  for (Eigen::Index k = 0; k < sub.cols(); ++k) {
    const double nrm = sub.col(k).norm();
    if (nrm > 0.0) sub.col(k) /= nrm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(1e-10);
  return static_cast<std::size_t>(qr.rank());
}

}  // namespace

Design build_design(const Frame& frame, const ModelSpec& spec) {
  if (spec.regressors.empty()) throw Error(ErrorKind::InvalidSpec, "no regressors");
  auto numeric = [&](const std::string& name) -> const std::vector<double>& {
    auto it = frame.numeric.find(name);
    if (it == frame.numeric.end()) throw Error(ErrorKind::MissingCovariate, name);
    return it->second;
  };
  auto factor = [&](const std::string& name) -> std::vector<std::string> {
    if (auto it = frame.factors.find(name); it != frame.factors.end()) return it->second;
    if (auto it = frame.numeric.find(name); it != frame.numeric.end()) {
      std::vector<std::string> out;
      for (double v : it->second) out.push_back(std::to_string(v));
      return out;
    }
    throw Error(ErrorKind::MissingCovariate, name);
  };

  const auto& y = numeric(spec.response);
  std::vector<const std::vector<double>*> regs;
  for (const auto& r : spec.regressors) regs.push_back(&numeric(r));
  std::vector<std::vector<std::string>> dums;
  for (const auto& d : spec.dummies) dums.push_back(factor(d));
  const auto clusters = factor(spec.cluster);

  for (std::size_t i = 0; i < frame.rows; ++i) {
    if (!(y[i] == 0.0 || y[i] == 1.0)) throw Error(ErrorKind::InvalidSpec, "response must be 0/1");
    for (std::size_t r = 0; r < regs.size(); ++r)
      if (!std::isfinite((*regs[r])[i]))
        throw Error(ErrorKind::MissingCovariate, spec.regressors[r] + " is missing in row " + std::to_string(i));
  }

  Design d;
  std::vector<std::uint8_t> keep(frame.rows, 1);
  if (spec.family != Family::Lpm) {
    // Drop factor levels whose rows share one outcome until none remain.
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t f = 0; f < dums.size(); ++f) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // level -> (rows, ones)
        for (std::size_t i = 0; i < frame.rows; ++i) {
          if (!keep[i]) continue;
          auto& t = tally[dums[f][i]];
          ++t.first;
          t.second += y[i] > 0.5;
        }
        for (const auto& [level, t] : tally) {
          if (t.second != 0 && t.second != t.first) continue;
          for (std::size_t i = 0; i < frame.rows; ++i)
            if (keep[i] && dums[f][i] == level) keep[i] = 0;
          d.dropped.push_back(spec.dummies[f] + "=" + level);
          changed = true;
        }
      }
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < frame.rows; ++i)
    if (keep[i]) rows.push_back(i);
  if (rows.empty()) throw Error(ErrorKind::InvalidSpec, "no observations left");

  std::vector<std::string> names = {"constant"};
  for (const auto& r : spec.regressors) names.push_back(r);
  const std::size_t n_fixed = names.size();
  std::vector<std::pair<std::size_t, std::string>> dummy_cols;  // factor index, level
  for (std::size_t f = 0; f < dums.size(); ++f) {
    std::set<std::string> levels;
    for (std::size_t i : rows) levels.insert(dums[f][i]);
    d.reference_levels[spec.dummies[f]] = *levels.begin();
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
      dummy_cols.emplace_back(f, *it);
      names.push_back(spec.dummies[f] + "=" + *it);
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(names.size()));
  d.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = rows[static_cast<std::size_t>(r)];
    d.y(r) = y[i];
    x(r, 0) = 1.0;
    for (std::size_t k = 0; k < regs.size(); ++k) x(r, static_cast<Eigen::Index>(k + 1)) = (*regs[k])[i];
    for (std::size_t k = 0; k < dummy_cols.size(); ++k)
      x(r, static_cast<Eigen::Index>(n_fixed + k)) = dums[dummy_cols[k].first][i] == dummy_cols[k].second ? 1.0 : 0.0;
  }

  std::vector<Eigen::Index> cols(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) cols[k] = static_cast<Eigen::Index>(k);
  if (gram_rank(x, cols) < names.size()) {
    std::vector<Eigen::Index> kept;
    for (std::size_t k = 0; k < names.size(); ++k) {
      kept.push_back(static_cast<Eigen::Index>(k));
      if (gram_rank(x, kept) == kept.size()) continue;
      if (k < n_fixed) throw Error(ErrorKind::SingularDesign, "column '" + names[k] + "' is collinear");
      kept.pop_back();
      d.dropped.push_back(names[k]);
    }
    Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(kept.size()));
    std::vector<std::string> sub_names;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      sub.col(static_cast<Eigen::Index>(k)) = x.col(kept[k]);
      sub_names.push_back(names[static_cast<std::size_t>(kept[k])]);
    }
    x = std::move(sub);
    names = std::move(sub_names);
  }
  d.x = std::move(x);
  d.names = std::move(names);
  for (std::size_t f = 0; f < dums.size(); ++f) {
    auto& lv = d.kept_levels[spec.dummies[f]];
    lv.push_back(d.reference_levels[spec.dummies[f]]);
    for (const auto& name : d.names)
      if (name.starts_with(spec.dummies[f] + "=")) lv.push_back(name.substr(spec.dummies[f].size() + 1));
  }

  std::map<std::string, int> cluster_ids;
  for (std::size_t i : rows) cluster_ids.emplace(clusters[i], 0);
  int next = 0;
  for (auto& [_, id] : cluster_ids) id = next++;
  d.n_clusters = cluster_ids.size();
  if (d.n_clusters < 2) throw Error(ErrorKind::InvalidSpec, "need at least two clusters");
  for (std::size_t i : rows) d.cluster.push_back(cluster_ids.at(clusters[i]));
  return d;
}

double log_likelihood(Family family, const Design& design, const Eigen::VectorXd& beta) {
  if (family == Family::Lpm) throw Error(ErrorKind::InvalidSpec, "lpm has no binary likelihood");
  const Eigen::VectorXd eta = design.x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += pieces(family, design.y(i), eta(i)).ll;
  return ll;
}

Eigen::VectorXd score(Family family, const Design& design, const Eigen::VectorXd& beta) {
  if (family == Family::Lpm) throw Error(ErrorKind::InvalidSpec, "lpm has no binary likelihood");
  const Eigen::VectorXd eta = design.x * beta;
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r(i) = pieces(family, design.y(i), eta(i)).resid;
  return design.x.transpose() * r;
}

double mean_uncentered_vif(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::MatrixXd inv = inverse_spd(xtx);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) sum += inv(j, j) * xtx(j, j);
  return sum / static_cast<double>(x.cols());
}

const Coefficient& ModelFit::at(std::string_view name) const {
  if (auto k = find(name)) return coefficients[*k];
  throw Error(ErrorKind::UnknownCoefficient, std::string(name));
}

std::optional<std::size_t> ModelFit::find(std::string_view name) const {
  for (std::size_t k = 0; k < coefficients.size(); ++k)
    if (coefficients[k].name == name) return k;
  return std::nullopt;
}

namespace {

ModelFit finish(const ModelSpec& spec, const Design& d, const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov) {
  ModelFit out;
  out.spec = spec;
  out.covariance = cov;
  out.n_obs = static_cast<std::size_t>(d.x.rows());
  out.n_clusters = d.n_clusters;
  out.dropped_dummies = d.dropped;
  out.reference_levels = d.reference_levels;
  out.mean_vif = mean_uncentered_vif(d.x);
  const boost::math::students_t t_dist(static_cast<double>(d.n_clusters) - 1.0);
  for (std::size_t k = 0; k < d.names.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    Coefficient c;
    c.name = d.names[k];
    c.estimate = beta(j);
    // Exact-zero variances (e.g. duplicated dummy blocks within clusters)
    // come out as rounding-level negatives.
    const double var = cov(j, j);
    const double scale = std::sqrt(cov.diagonal().cwiseAbs().maxCoeff());
    c.std_error = var < 0.0 && std::sqrt(-var) <= 1e-6 * scale ? 0.0 : std::sqrt(var);
    c.statistic = c.estimate / c.std_error;
    if (!std::isfinite(c.statistic)) c.p_value = std::numeric_limits<double>::quiet_NaN();
    else if (spec.family == Family::Lpm) c.p_value = 2.0 * boost::math::cdf(boost::math::complement(t_dist, std::abs(c.statistic)));
    else c.p_value = normal_p(c.statistic);
    out.coefficients.push_back(std::move(c));
  }
  return out;
}

ModelFit fit_lpm(const ModelSpec& spec, const Design& d) {
  const Eigen::VectorXd beta = d.x.colPivHouseholderQr().solve(d.y);
  const Eigen::VectorXd e = d.y - d.x * beta;
  const Eigen::MatrixXd bread = inverse_spd(d.x.transpose() * d.x);
  ModelFit out = finish(spec, d, beta, cluster_sandwich(bread, d, e));
  const double n = static_cast<double>(d.y.size());
  const double rss = e.squaredNorm();
  const double tss = (d.y.array() - d.y.mean()).square().sum();
  const double two_pi = 2.0 * std::numbers::pi;
  out.loglik = -0.5 * n * (std::log(two_pi * rss / n) + 1.0);
  out.loglik_null = -0.5 * n * (std::log(two_pi * tss / n) + 1.0);
  out.pseudo_r2 = 1.0 - rss / tss;
  out.r2_is_linear = true;
  out.converged = true;
  return out;
}

ModelFit fit_binary(const ModelSpec& spec, const Design& d) {
  const Eigen::Index n = d.x.rows();
  const Eigen::Index p = d.x.cols();
  const double ybar = d.y.mean();
  if (ybar <= 0.0 || ybar >= 1.0) throw Error(ErrorKind::InvalidSpec, "response has no variation");
  const RowMatrix xr = d.x;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta(0) = spec.family == Family::Probit ? -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * ybar)
                                          : std::log(ybar / (1.0 - ybar));

  std::vector<double> w(static_cast<std::size_t>(n));
  Eigen::VectorXd resid(n);
  Eigen::VectorXd eta = d.x * beta;
  auto evaluate = [&](bool observed) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto pc = pieces(spec.family, d.y(i), eta(i));
      ll += pc.ll;
      resid(i) = pc.resid;
      w[static_cast<std::size_t>(i)] = observed ? pc.w_obs : pc.w_exp;
    }
    return ll;
  };

  double ll = evaluate(false);
  std::vector<double> path = {ll};
  bool converged = false;
  int it = 0;
  while (it < spec.max_iterations) {
    const Eigen::VectorXd g = d.x.transpose() * resid;
    const Eigen::VectorXd step = gram(xr, w).ldlt().solve(g);
    ++it;
    // Index moves come from X * step directly rather than from differencing
    // two rounded products, so tiny gains are resolved exactly.
    const Eigen::VectorXd step_eta = d.x * step;
    double t = 1.0;
    double gain = increment(spec.family, d.y, eta, step_eta);
    for (int h = 0; h < 60 && !(gain >= 0.0); ++h) {
      t *= 0.5;
      gain = increment(spec.family, d.y, eta, t * step_eta);
    }
    if (!(gain >= 0.0)) break;  // no ascent left at machine precision
    beta += t * step;
    if (std::abs(gain) > 1e-6) eta = d.x * beta;
    else eta += t * step_eta;
    evaluate(false);
    path.push_back(path.back() + gain);
    const Eigen::VectorXd g_new = d.x.transpose() * resid;
    if (std::abs(gain) < 1e-8 && g_new.cwiseAbs().maxCoeff() < 1e-6) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorKind::NotConverged, std::string(to_string(spec.family)) + " after " + std::to_string(it) +
                                             " iterations");

  eta = d.x * beta;
  ll = evaluate(spec.bread == BreadKind::Observed);
  const Eigen::MatrixXd bread = inverse_spd(gram(xr, w));
  ModelFit out = finish(spec, d, beta, cluster_sandwich(bread, d, resid));
  out.loglik = ll;
  out.loglik_null = static_cast<double>(n) * (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));
  out.pseudo_r2 = 1.0 - ll / out.loglik_null;
  out.converged = true;
  out.iterations = it;
  out.loglik_path = std::move(path);
  return out;
}

}  // namespace

ModelFit fit(const Frame& frame, const ModelSpec& spec) {
  const Design d = build_design(frame, spec);
  return spec.family == Family::Lpm ? fit_lpm(spec, d) : fit_binary(spec, d);
}

ModelFit fit(const EstimationTable& table, const ModelSpec& spec) { return fit(Frame::from_table(table), spec); }

Prediction predict_jump_probability(const ModelFit& fit, const CovariateRow& row) {
  double eta = 0.0;
  for (const auto& c : fit.coefficients) {
    if (c.name == "constant") {
      eta += c.estimate;
      continue;
    }
    const auto eq = c.name.find('=');
    if (eq != std::string::npos) continue;
    auto it = row.values.find(c.name);
    if (it == row.values.end()) throw Error(ErrorKind::MissingCovariate, c.name);
    eta += c.estimate * it->second;
  }
  for (const auto& factor : fit.spec.dummies) {
    auto it = row.levels.find(factor);
    if (it == row.levels.end()) throw Error(ErrorKind::MissingCovariate, factor);
    auto ref = fit.reference_levels.find(factor);
    if (ref != fit.reference_levels.end() && ref->second == it->second) continue;
    const auto k = fit.find(factor + "=" + it->second);
    if (!k) throw Error(ErrorKind::MissingCovariate, factor + "=" + it->second);
    eta += fit.coefficients[*k].estimate;
  }
  switch (fit.spec.family) {
    case Family::Probit: return {norm_cdf(eta), false};
    case Family::Logit: return {1.0 / (1.0 + std::exp(-eta)), false};
    case Family::Lpm: return {std::clamp(eta, 0.0, 1.0), eta < 0.0 || eta > 1.0};
  }
  return {};
}

double chi2_sf_1df(double chi2) { return std::erfc(std::sqrt(chi2 / 2.0)); }

WaldComparison compare_coefficients(const ModelFit& a, const ModelFit& b, std::string_view name) {
  const auto& ca = a.at(name);
  const auto& cb = b.at(name);
  const double diff = ca.estimate - cb.estimate;
  const double var = ca.std_error * ca.std_error + cb.std_error * cb.std_error;
  WaldComparison w;
  w.chi2 = diff == 0.0 ? 0.0 : diff * diff / var;
  w.p_value = chi2_sf_1df(w.chi2);
  return w;
}

std::string fit_to_json(const ModelFit& fit) {
  nlohmann::ordered_json j;
  j["family"] = std::string(to_string(fit.spec.family));
  j["response"] = fit.spec.response;
  j["regressors"] = fit.spec.regressors;
  j["dummies"] = fit.spec.dummies;
  j["cluster"] = fit.spec.cluster;
  j["n_obs"] = fit.n_obs;
  j["n_clusters"] = fit.n_clusters;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["loglik"] = fit.loglik;
  j["loglik_null"] = fit.loglik_null;
  j[fit.r2_is_linear ? "r2" : "pseudo_r2"] = fit.pseudo_r2;
  j["mean_vif"] = fit.mean_vif;
  j["dropped_dummies"] = fit.dropped_dummies;
  j["reference_levels"] = fit.reference_levels;
  auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
  for (const auto& c : fit.coefficients) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["estimate"] = c.estimate;
    e["std_error"] = c.std_error;
    e["statistic"] = c.statistic;
    e["p_value"] = c.p_value;
    coefs.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

ModelFit fit_from_json(const std::string& text) {
  ModelFit f;
  try {
    const auto j = nlohmann::json::parse(text);
    f.spec.family = parse_family(j.at("family").get<std::string>());
    f.spec.response = j.at("response").get<std::string>();
    f.spec.regressors = j.at("regressors").get<std::vector<std::string>>();
    f.spec.dummies = j.at("dummies").get<std::vector<std::string>>();
    f.spec.cluster = j.at("cluster").get<std::string>();
    f.n_obs = j.at("n_obs").get<std::size_t>();
    f.n_clusters = j.at("n_clusters").get<std::size_t>();
    f.converged = j.at("converged").get<bool>();
    f.iterations = j.at("iterations").get<int>();
    f.loglik = j.at("loglik").get<double>();
    f.loglik_null = j.at("loglik_null").get<double>();
    f.r2_is_linear = j.contains("r2");
    f.pseudo_r2 = j.at(f.r2_is_linear ? "r2" : "pseudo_r2").get<double>();
    f.mean_vif = j.at("mean_vif").get<double>();
    f.dropped_dummies = j.at("dropped_dummies").get<std::vector<std::string>>();
    f.reference_levels = j.at("reference_levels").get<std::map<std::string, std::string>>();
    for (const auto& e : j.at("coefficients")) {
      Coefficient c;
      c.name = e.at("name").get<std::string>();
      c.estimate = e.at("estimate").get<double>();
      c.std_error = e.at("std_error").is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at("std_error").get<double>();
      c.statistic = e.at("statistic").is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at("statistic").get<double>();
      c.p_value = e.at("p_value").is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at("p_value").get<double>();
      f.coefficients.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRow, std::string("fit json: ") + e.what());
  }
  return f;
}

}  // namespace portspill
