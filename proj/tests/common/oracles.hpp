#pragma once
// Naive references used by the property and acceptance suites. They work on
// plain nested vectors and share no code with the library kernels.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <portspill/types.hpp>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// x[t][l][i]
struct DensePanel {
  int first_year = 2000;
  std::vector<Matrix> x;

  std::size_t years() const { return x.size(); }
  std::size_t locations() const { return x.empty() ? 0 : x[0].size(); }
  std::size_t products() const { return x.empty() || x[0].empty() ? 0 : x[0][0].size(); }
};

DensePanel random_panel(std::mt19937_64& rng, std::size_t max_loc, std::size_t max_prod, std::size_t max_years);

// Builds the library panel (codes L00.., hs4 0100.., years from first_year).
portspill::ExportPanel to_export_panel(const DensePanel& p, portspill::LocationKind kind = portspill::LocationKind::Region);

Matrix rca(const Matrix& x);
Matrix pooled(const DensePanel& p);
Matrix proximity(const Matrix& pooled_x);
// NaN where the product row of proximity sums to zero.
Matrix density(const Matrix& x_year, const Matrix& prox);

// Jump outcome by enumerated cases for base index t of series m.
// policy: 0 truncate, 1 strict-skip, 2 footnote-literal.
std::optional<int> jump(const std::vector<std::uint8_t>& m, std::size_t t, int policy);

}  // namespace oracle
