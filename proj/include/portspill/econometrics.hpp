#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "portspill/outcomes.hpp"

namespace portspill {

enum class Family { Probit, Logit, Lpm };

std::string_view to_string(Family family);
Family parse_family(std::string_view text);

// Which information matrix forms the sandwich bread for probit/logit.
enum class BreadKind { Observed, Expected };

struct ModelSpec {
  Family family = Family::Probit;
  std::string response = "S";
  std::vector<std::string> regressors;
  std::vector<std::string> dummies = {"year", "region"};
  std::string cluster = "product";
  BreadKind bread = BreadKind::Observed;
  int max_iterations = 100;
};

// Column store handed to the estimator. Missing values are NaN.
struct Frame {
  std::size_t rows = 0;
  std::map<std::string, std::vector<double>> numeric;
  std::map<std::string, std::vector<std::string>> factors;

  void add_numeric(std::string name, std::vector<double> values);
  void add_factor(std::string name, std::vector<std::string> values);

  // Numeric S, omega, Omega, k, K, PCI, TRM, DES, leamer; factors year,
  // region, port, product.
  static Frame from_table(const EstimationTable& table);
};

// Dense design after dummy encoding and separation screening.
struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> names;  // "constant", regressors, "year=2011", ...
  std::vector<int> cluster;        // dense cluster ids, 0..n_clusters-1
  std::size_t n_clusters = 0;
  std::vector<std::string> dropped;  // dummies removed for separation/collinearity
  std::map<std::string, std::string> reference_levels;
  std::map<std::string, std::vector<std::string>> kept_levels;
};

// Throws MissingCovariate, InvalidSpec (non-binary response, no clusters),
// SingularDesign.
Design build_design(const Frame& frame, const ModelSpec& spec);

// Log-likelihood and analytic score of a binary family at beta.
double log_likelihood(Family family, const Design& design, const Eigen::VectorXd& beta);
Eigen::VectorXd score(Family family, const Design& design, const Eigen::VectorXd& beta);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;  // z (probit/logit) or t with G-1 df (lpm)
  double p_value = 1.0;
};

struct ModelFit {
  ModelSpec spec;
  std::vector<Coefficient> coefficients;
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  double loglik_null = 0.0;
  double pseudo_r2 = 0.0;  // McFadden; centered R^2 when r2_is_linear
  bool r2_is_linear = false;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  double mean_vif = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> loglik_path;  // probit/logit iterates, start first
  std::vector<std::string> dropped_dummies;
  std::map<std::string, std::string> reference_levels;

  const Coefficient& at(std::string_view name) const;  // throws UnknownCoefficient
  std::optional<std::size_t> find(std::string_view name) const;
};

ModelFit fit(const Frame& frame, const ModelSpec& spec);
ModelFit fit(const EstimationTable& table, const ModelSpec& spec);

// Mean over columns of VIF_j = 1 / (1 - uncentered R^2 of x_j on the rest).
double mean_uncentered_vif(const Eigen::MatrixXd& x);

struct CovariateRow {
  std::map<std::string, double> values;
  std::map<std::string, std::string> levels;  // dummy factor -> level
};

struct Prediction {
  double probability = 0.0;
  bool clipped = false;  // lpm index outside [0, 1]
};

// Throws MissingCovariate when a regressor or factor level is not covered.
Prediction predict_jump_probability(const ModelFit& fit, const CovariateRow& row);

struct WaldComparison {
  double chi2 = 0.0;
  double p_value = 1.0;
};

// (b_a - b_b)^2 / (se_a^2 + se_b^2) against chi-square with 1 df.
WaldComparison compare_coefficients(const ModelFit& a, const ModelFit& b, std::string_view name);
double chi2_sf_1df(double chi2);

std::string fit_to_json(const ModelFit& fit);
// Restores what fit_to_json writes; the covariance matrix is not stored.
ModelFit fit_from_json(const std::string& text);

}  // namespace portspill
