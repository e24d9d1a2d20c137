// portspill: port-region knowledge spillover pipeline.
//
// Exit status: 0 success (including up-to-date no-op), 1 domain error,
// 2 usage or configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"
#include "portspill/parallel.hpp"
#include "portspill/pipeline.hpp"
#include "portspill/report.hpp"

namespace fs = std::filesystem;
using namespace portspill;

namespace {

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  if (!fs::exists(path)) throw Error(ErrorKind::ConfigError, "config file not found: " + path);
  const auto dir = fs::absolute(path).parent_path().string();
  return run_config_from_json(csv::read_file(path), dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional diversification and port spillover pipeline"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tool_version));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool paper_defaults = false;
  std::string output;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "seed for the synthetic generator");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_flag("--paper-defaults", paper_defaults, "pin every option to the published configuration");
  app.add_option("--output", output, "output directory (overrides the config)");

  std::string style = "paper";
  std::string fit_file;
  std::map<std::string, std::function<StageStatus(const RunConfig&, std::ostream&)>> commands = {
      {"ingest", cmd_ingest},   {"rca", cmd_rca},         {"proximity", cmd_proximity},
      {"density", cmd_density}, {"jumps", cmd_jumps},     {"match", cmd_match},
      {"regress", cmd_regress}, {"report", cmd_report},   {"generate", cmd_generate}};
  const std::map<std::string, std::string> help = {
      {"ingest", "load and validate raw inputs into canonical files"},
      {"rca", "yearly and pooled RCA cubes"},
      {"proximity", "production and transport proximity matrices"},
      {"density", "relatedness densities omega and Omega"},
      {"jumps", "new-industry outcomes S"},
      {"match", "region and port-matched estimation tables"},
      {"regress", "fit the models, including split samples"},
      {"report", "text and CSV tables, group tests, product-space graphs"},
      {"generate", "synthetic inputs with a planted entry law"}};
  std::map<std::string, CLI::App*> subs;
  for (auto name : stage_names) {
    const std::string n(name);
    subs[n] = app.add_subcommand(n, help.at(n));
  }
  subs["report"]->add_option("--style", style, "stdout rendering")->check(CLI::IsMember({"paper", "csv", "none"}));
  subs["report"]->add_option("--fit", fit_file, "render one fit JSON to stdout instead of running the stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "report" && !fit_file.empty()) {
      ReportTable t;
      t.columns.push_back({"(1)", fit_from_json(csv::read_file(fit_file))});
      std::cout << (style == "csv" ? render_csv_table(t) : render_text_table(t));
      return 0;
    }

    RunConfig config = load_config(config_path);
    apply_env_overrides(config);
    if (!output.empty()) {
      config.output = fs::absolute(output).string();
    }
    if (seed) config.synth.seed = *seed;
    if (threads) config.threads = *threads;
    if (paper_defaults) apply_paper_defaults(config);
    set_thread_count(config.threads);

    OutputLock lock(resolve_path(config, config.output));
    commands.at(name)(config, std::cerr);
    if (name == "report" && style != "none") {
      const auto dir = fs::path(resolve_path(config, config.output)) / "report";
      if (style == "paper") std::cout << csv::read_file((dir / "tables.txt").string());
      else
        for (const char* f : {"region.csv", "matched.csv"}) std::cout << csv::read_file((dir / f).string());
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "portspill: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "portspill: " << e.what() << "\n";
    return 1;
  }
}
