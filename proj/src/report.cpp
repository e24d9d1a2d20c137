#include "portspill/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "portspill/csv.hpp"

namespace portspill {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // "-0.000"
  return s;
}

std::string thousands(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

// Rows in first-seen regressor order across columns, constant last.
std::vector<std::string> term_order(const ReportTable& table) {
  std::vector<std::string> terms;
  for (const auto& col : table.columns) {
    if (!col.fit) continue;
    for (const auto& r : col.fit->spec.regressors)
      if (std::find(terms.begin(), terms.end(), r) == terms.end()) terms.push_back(r);
  }
  terms.push_back("constant");
  return terms;
}

std::string label_of(const std::string& term) { return term == "constant" ? "Constant" : term; }

}  // namespace

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

std::string render_text_table(const ReportTable& table) {
  const auto terms = term_order(table);
  std::vector<std::vector<std::string>> body;  // first cell is the row label
  auto add = [&](std::vector<std::string> row) { body.push_back(std::move(row)); };

  std::vector<std::string> numbers{""}, head{table.response};
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    numbers.push_back("(" + std::to_string(c + 1) + ")");
    head.push_back(table.columns[c].label);
  }
  for (const auto& term : terms) {
    std::vector<std::string> est{label_of(term)}, se{""};
    for (const auto& col : table.columns) {
      const auto idx = col.fit ? col.fit->find(term) : std::nullopt;
      if (!idx) {
        est.emplace_back();
        se.emplace_back();
        continue;
      }
      const auto& k = col.fit->coefficients[*idx];
      est.push_back(fixed(k.estimate, 3) + significance_stars(k.p_value));
      se.push_back("(" + fixed(k.std_error, 3) + ")");
    }
    add(std::move(est));
    add(std::move(se));
  }
  std::set<std::string> dummies;
  for (const auto& col : table.columns)
    if (col.fit) dummies.insert(col.fit->spec.dummies.begin(), col.fit->spec.dummies.end());
  for (const auto& name : {std::string("year"), std::string("region")}) {
    std::vector<std::string> row{std::string(1, static_cast<char>(std::toupper(name[0]))) + name.substr(1) + " dummies"};
    for (const auto& col : table.columns) {
      if (!col.fit) row.emplace_back();
      else {
        const auto& d = col.fit->spec.dummies;
        row.push_back(std::find(d.begin(), d.end(), name) != d.end() ? "yes" : "no");
      }
    }
    if (dummies.count(name)) add(std::move(row));
  }
  bool any_linear = false, any_binary = false;
  for (const auto& col : table.columns)
    if (col.fit) (col.fit->r2_is_linear ? any_linear : any_binary) = true;
  std::vector<std::string> obs{"Observations"}, r2{any_linear && !any_binary ? "R2" : any_linear ? "(Pseudo) R2" : "Pseudo R2"},
      ll{"Log likelihood"}, vif{"Mean VIF"};
  for (const auto& col : table.columns) {
    if (!col.fit) {
      for (auto* v : {&obs, &r2, &ll, &vif}) v->emplace_back();
      continue;
    }
    obs.push_back(thousands(col.fit->n_obs));
    r2.push_back(fixed(col.fit->pseudo_r2, 3));
    ll.push_back(fixed(col.fit->loglik, 0));
    vif.push_back(fixed(col.fit->mean_vif, 2));
  }

  std::vector<std::size_t> width(table.columns.size() + 1, 0);
  auto measure = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  };
  measure(numbers);
  measure(head);
  for (const auto& r : body) measure(r);
  for (const auto* r : {&obs, &r2, &ll, &vif}) measure(*r);
  for (std::size_t c = 1; c < width.size(); ++c) width[c] = std::max<std::size_t>(width[c], 8);

  std::size_t total = width[0];
  for (std::size_t c = 1; c < width.size(); ++c) total += 2 + width[c];
  const std::string rule(total, '-');
  std::string out;
  auto line = [&](const std::vector<std::string>& row) {
    std::string s = row[0] + std::string(width[0] - row[0].size(), ' ');
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::size_t pad = width[c] - row[c].size();
      s += "  " + std::string(pad - pad / 2, ' ') + row[c] + std::string(pad / 2, ' ');
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out += s + "\n";
  };
  if (!table.title.empty()) out += table.title + "\n";
  out += rule + "\n";
  line(numbers);
  line(head);
  out += rule + "\n";
  for (const auto& r : body) line(r);
  out += rule + "\n";
  for (const auto* r : {&obs, &r2, &ll, &vif}) line(*r);
  out += rule + "\n";
  out += "Cluster-robust standard errors in parentheses. *** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

std::string render_csv_table(const ReportTable& table) {
  csv::Writer w;
  w.row({"column", "term", "estimate", "std_error", "statistic", "p_value", "stars"});
  for (const auto& col : table.columns) {
    if (!col.fit) continue;
    for (const auto& k : col.fit->coefficients) {
      if (k.name.find('=') != std::string::npos) continue;  // dummy levels
      w.row({col.label, k.name, csv::format_double(k.estimate), csv::format_double(k.std_error),
             csv::format_double(k.statistic), csv::format_double(k.p_value), significance_stars(k.p_value)});
    }
  }
  for (const auto& col : table.columns) {
    if (!col.fit) continue;
    const auto& f = *col.fit;
    auto diag = [&](const std::string& term, const std::string& value) {
      w.row({col.label, term, value, "", "", "", ""});
    };
    diag("_n_obs", std::to_string(f.n_obs));
    diag("_n_clusters", std::to_string(f.n_clusters));
    diag(f.r2_is_linear ? "_r2" : "_pseudo_r2", csv::format_double(f.pseudo_r2));
    diag("_loglik", csv::format_double(f.loglik));
    diag("_mean_vif", csv::format_double(f.mean_vif));
  }
  return w.str();
}

std::vector<GroupTest> group_tests(const ReportTable& table, const std::string& table_name, const std::string& term) {
  std::vector<GroupTest> out;
  const auto& cols = table.columns;
  for (std::size_t a = 0; a < cols.size(); ++a) {
    for (std::size_t b = a + 1; b < cols.size(); ++b) {
      if (!cols[a].fit || !cols[b].fit) continue;
      if (!cols[a].fit->find(term) || !cols[b].fit->find(term)) continue;
      out.push_back({table_name, term, cols[a].label, cols[b].label, compare_coefficients(*cols[a].fit, *cols[b].fit, term)});
    }
  }
  return out;
}

std::string group_tests_csv(const std::vector<GroupTest>& tests) {
  csv::Writer w;
  w.row({"table", "term", "group_a", "group_b", "chi2", "p_value"});
  for (const auto& t : tests)
    w.row({t.table, t.term, t.group_a, t.group_b, csv::format_double(t.result.chi2),
           csv::format_double(t.result.p_value)});
  return w.str();
}

}  // namespace portspill
