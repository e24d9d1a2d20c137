#include "fixture.hpp"

#include <json.hpp>

#include <portspill/csv.hpp>

namespace fixture {

portspill::Frame load_frame() {
  portspill::csv::Reader r(std::string(PORTSPILL_TEST_DATA_DIR) + "/fixture_500.csv");
  std::vector<double> y, x1, x2;
  std::vector<std::string> year, region, cluster;
  std::vector<std::string> f;
  while (r.next(f)) {
    y.push_back(*portspill::csv::parse_double(f[0]));
    x1.push_back(*portspill::csv::parse_double(f[1]));
    x2.push_back(*portspill::csv::parse_double(f[2]));
    year.push_back(f[3]);
    region.push_back(f[4]);
    cluster.push_back(f[5]);
  }
  portspill::Frame frame;
  frame.add_numeric("y", y);
  frame.add_numeric("x1", x1);
  frame.add_numeric("x2", x2);
  frame.add_factor("year", year);
  frame.add_factor("region", region);
  frame.add_factor("cluster", cluster);
  return frame;
}

Golden load_golden() {
  const auto j = nlohmann::json::parse(portspill::csv::read_file(std::string(PORTSPILL_TEST_DATA_DIR) + "/fixture_500_golden.json"));
  Golden g;
  g.n_obs = j.at("n_obs");
  g.n_clusters = j.at("n_clusters");
  g.mean_vif = j.at("mean_vif");
  for (const auto& [family, fit] : j.at("fits").items()) {
    GoldenFit gf;
    gf.coefficients = fit.at("coefficients").get<std::map<std::string, double>>();
    gf.std_errors = fit.at("std_errors").get<std::map<std::string, double>>();
    gf.loglik = fit.at("loglik");
    gf.r2 = fit.at("r2");
    g.fits[family] = gf;
  }
  return g;
}

portspill::ModelSpec spec(portspill::Family family) {
  portspill::ModelSpec s;
  s.family = family;
  s.response = "y";
  s.regressors = {"x1", "x2"};
  s.dummies = {"year", "region"};
  s.cluster = "cluster";
  return s;
}

}  // namespace fixture
