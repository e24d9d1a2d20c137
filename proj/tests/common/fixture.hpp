#pragma once

#include <map>
#include <string>

#include <portspill/econometrics.hpp>

namespace fixture {

portspill::Frame load_frame();

struct GoldenFit {
  std::map<std::string, double> coefficients;
  std::map<std::string, double> std_errors;
  double loglik = 0.0;
  double r2 = 0.0;
};

struct Golden {
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  double mean_vif = 0.0;
  std::map<std::string, GoldenFit> fits;  // probit, logit, lpm
};

Golden load_golden();

portspill::ModelSpec spec(portspill::Family family);

}  // namespace fixture
