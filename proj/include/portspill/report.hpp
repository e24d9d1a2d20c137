#pragma once

#include <optional>
#include <string>
#include <vector>

#include "portspill/econometrics.hpp"

namespace portspill {

// "***" below 0.01, "**" below 0.05, "*" below 0.1.
std::string significance_stars(double p_value);

// One printed column. A column without a fit (failed or skipped subsample)
// prints as blank cells.
struct ReportColumn {
  std::string label;
  std::optional<ModelFit> fit;
};

struct ReportTable {
  std::string title;
  std::string response = "S";
  std::vector<ReportColumn> columns;
};

// Fixed-width text: coefficient rows with stars, standard errors in
// parentheses underneath, constant last, then dummy indicators and a footer
// with observations, pseudo R2 (R2 for lpm), log likelihood and mean VIF.
std::string render_text_table(const ReportTable& table);

// Long form: column,term,estimate,std_error,statistic,p_value,stars followed
// by one diagnostics row per column (term "_n_obs", "_pseudo_r2", ...).
std::string render_csv_table(const ReportTable& table);

// Wald chi-square of equal coefficients between two columns.
struct GroupTest {
  std::string table;
  std::string term;
  std::string group_a;
  std::string group_b;
  WaldComparison result;
};

// All column pairs of `table` that carry `term`, tagged with `table_name`.
std::vector<GroupTest> group_tests(const ReportTable& table, const std::string& table_name, const std::string& term);
std::string group_tests_csv(const std::vector<GroupTest>& tests);

}  // namespace portspill
