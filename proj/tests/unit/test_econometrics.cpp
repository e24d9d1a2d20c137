#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

#include <portspill/econometrics.hpp>
#include <portspill/error.hpp>

#include "fixture.hpp"

using namespace portspill;

namespace {

ModelFit fit_family(Family f) { return fit(fixture::load_frame(), fixture::spec(f)); }

}  // namespace

TEST_CASE("fixture fits match the golden reference") {
  const auto golden = fixture::load_golden();
  for (auto [family, key] : {std::pair{Family::Probit, "probit"}, {Family::Logit, "logit"}, {Family::Lpm, "lpm"}}) {
    CAPTURE(key);
    const auto f = fit_family(family);
    const auto& g = golden.fits.at(key);
    CHECK(f.n_obs == golden.n_obs);
    CHECK(f.n_clusters == golden.n_clusters);
    CHECK(f.coefficients.size() == g.coefficients.size());
    for (const auto& [name, b] : g.coefficients) {
      CAPTURE(name);
      CHECK(std::abs(f.at(name).estimate - b) < 1e-6);
      CHECK(std::abs(f.at(name).std_error - g.std_errors.at(name)) < 1e-6);
    }
    CHECK(std::abs(f.loglik - g.loglik) < 1e-8);
    CHECK(std::abs(f.pseudo_r2 - g.r2) < 1e-6);
    CHECK(f.r2_is_linear == (family == Family::Lpm));
    CHECK(std::abs(f.mean_vif - golden.mean_vif) < 1e-8);
  }
}

TEST_CASE("intercept-only probit recovers the inverse normal cdf of the mean") {
  Frame fr;
  std::vector<double> y, zero;
  std::vector<std::string> c;
  for (int i = 0; i < 200; ++i) {
    y.push_back(i % 5 == 0 ? 1.0 : 0.0);
    zero.push_back(i % 2);
    c.push_back("c" + std::to_string(i % 20));
  }
  fr.add_numeric("y", y);
  fr.add_numeric("z", zero);
  fr.add_factor("c", c);
  ModelSpec s;
  s.response = "y";
  s.regressors = {"z"};
  s.dummies = {};
  s.cluster = "c";
  const auto f = fit(fr, s);
  // z is balanced across outcomes, so its coefficient is zero
  CHECK(std::abs(f.at("z").estimate) < 1e-8);
  CHECK(std::abs(f.at("constant").estimate - (-std::sqrt(2.0) * boost::math::erfc_inv(2.0 * 0.2))) < 1e-8);
}

TEST_CASE("singleton clusters give the robust sandwich times n/(n-1)") {
  auto frame = fixture::load_frame();
  std::vector<std::string> own;
  for (std::size_t i = 0; i < frame.rows; ++i) own.push_back("r" + std::to_string(i));
  frame.add_factor("own", own);
  auto spec = fixture::spec(Family::Lpm);
  spec.cluster = "own";
  const auto f = fit(frame, spec);
  const Design d = build_design(frame, spec);
  const Eigen::VectorXd beta = d.x.colPivHouseholderQr().solve(d.y);
  const Eigen::VectorXd e = d.y - d.x * beta;
  const Eigen::MatrixXd bread = (d.x.transpose() * d.x).inverse();
  const Eigen::MatrixXd meat = d.x.transpose() * e.array().square().matrix().asDiagonal() * d.x;
  const double n = static_cast<double>(d.x.rows());
  const Eigen::MatrixXd hc0 = bread * meat * bread * n / (n - 1.0);
  for (Eigen::Index j = 0; j < hc0.rows(); ++j) CHECK(std::abs(f.coefficients[j].std_error - std::sqrt(hc0(j, j))) < 1e-12);
}

TEST_CASE("score matches finite differences and the path ascends") {
  for (Family fam : {Family::Probit, Family::Logit}) {
    const auto frame = fixture::load_frame();
    const auto spec = fixture::spec(fam);
    const Design d = build_design(frame, spec);
    const auto f = fit(frame, spec);
    Eigen::VectorXd beta(d.names.size());
    for (std::size_t k = 0; k < d.names.size(); ++k) beta(k) = f.at(d.names[k]).estimate;
    CHECK(score(fam, d, beta).cwiseAbs().maxCoeff() < 1e-6);
    // Away from the optimum the gradient is not near zero, so relative error is meaningful.
    Eigen::VectorXd b = beta;
    b.array() += 0.1;
    const Eigen::VectorXd g = score(fam, d, b);
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double h = 1e-5;
      Eigen::VectorXd up = b, dn = b;
      up(j) += h;
      dn(j) -= h;
      const double fd = (log_likelihood(fam, d, up) - log_likelihood(fam, d, dn)) / (2 * h);
      CHECK(std::abs(fd - g(j)) <= 1e-4 * std::max(1.0, std::abs(g(j))));
    }
    for (std::size_t k = 1; k < f.loglik_path.size(); ++k) CHECK(f.loglik_path[k] >= f.loglik_path[k - 1]);
  }
}

TEST_CASE("logit coefficients are a probit multiple near 1.6 to 1.8") {
  const auto p = fit_family(Family::Probit);
  const auto l = fit_family(Family::Logit);
  for (const char* name : {"x1", "x2"}) {
    const double ratio = l.at(name).estimate / p.at(name).estimate;
    CHECK(ratio > 1.5);
    CHECK(ratio < 1.9);
  }
}

TEST_CASE("shifting a regressor moves only the constant") {
  auto frame = fixture::load_frame();
  const auto base = fit(frame, fixture::spec(Family::Probit));
  for (auto& v : frame.numeric["x1"]) v += 3.5;
  const auto shifted = fit(frame, fixture::spec(Family::Probit));
  for (const auto& c : base.coefficients) {
    if (c.name == "constant") continue;
    CHECK(std::abs(shifted.at(c.name).estimate - c.estimate) < 1e-8);
    CHECK(std::abs(shifted.at(c.name).std_error - c.std_error) < 1e-8);
  }
  CHECK(std::abs(shifted.loglik - base.loglik) < 1e-8);
  CHECK(std::abs(shifted.pseudo_r2 - base.pseudo_r2) < 1e-8);
  CHECK(std::abs(shifted.at("constant").estimate - (base.at("constant").estimate - 3.5 * base.at("x1").estimate)) < 1e-6);
}

TEST_CASE("separated dummy level is dropped with its rows") {
  auto frame = fixture::load_frame();
  auto y = frame.numeric["y"];
  auto region = frame.factors["region"];
  for (std::size_t i = 0; i < 30; ++i) {
    region[i] = "RC";
    y[i] = 0.0;
  }
  frame.add_numeric("y", y);
  frame.add_factor("region", region);
  const auto f = fit(frame, fixture::spec(Family::Probit));
  REQUIRE(f.dropped_dummies.size() == 1);
  CHECK(f.dropped_dummies[0] == "region=RC");
  CHECK(f.n_obs == 470);
  CHECK_FALSE(f.find("region=RC"));
}

TEST_CASE("prediction links") {
  ModelFit f;
  f.spec.dummies = {};
  f.coefficients = {{"constant", 0.0}, {"x", 1.0}};
  CovariateRow row;
  row.values["x"] = 0.0;
  f.spec.family = Family::Probit;
  CHECK(predict_jump_probability(f, row).probability == doctest::Approx(0.5));
  f.spec.family = Family::Logit;
  CHECK(predict_jump_probability(f, row).probability == doctest::Approx(0.5));
  f.spec.family = Family::Lpm;
  row.values["x"] = 1.2;
  const auto p = predict_jump_probability(f, row);
  CHECK(p.probability == 1.0);
  CHECK(p.clipped);
  CHECK_THROWS_AS(predict_jump_probability(f, CovariateRow{}), Error);
}

TEST_CASE("chi-square comparison") {
  ModelFit a, b;
  a.coefficients = {{"omega", 5.0, std::sqrt(2.0)}};
  b.coefficients = {{"omega", 2.0, std::sqrt(2.5)}};
  const auto w = compare_coefficients(a, b, "omega");
  CHECK(w.chi2 == doctest::Approx(2.0).epsilon(1e-12));
  const auto same = compare_coefficients(a, a, "omega");
  CHECK(same.chi2 == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK(std::abs(chi2_sf_1df(14.16) - 0.00017) < 5e-5);
  try {
    compare_coefficients(a, b, "Omega");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownCoefficient);
  }
}

TEST_CASE("fit json round trip") {
  const auto f = fit_family(Family::Logit);
  const auto g = fit_from_json(fit_to_json(f));
  CHECK(fit_to_json(g) == fit_to_json(f));
}
