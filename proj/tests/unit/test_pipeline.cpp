#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <portspill/csv.hpp>
#include <portspill/error.hpp>
#include <portspill/pipeline.hpp>

#include "scratch.hpp"

using namespace portspill;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

const char* small_synth =
    R"({"n_regions": 8, "n_ports": 3, "n_products": 60, "n_years": 8, "n_communities": 5, "seed": 4})";

Analysis small_analysis() {
  auto c = synth_config_from_json(small_synth);
  const auto d = generate(c);
  return analyze(d.region_panel, d.port_panel, d.map, d.pci, &d.continents);
}

struct CliResult {
  int status = -1;
  std::string out;
  std::string err;
};

CliResult cli(const scratch::Dir& dir, const std::string& args) {
  const auto out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  const std::string cmd = std::string("\"") + PORTSPILL_CLI + "\" " + args + " >\"" + out + "\" 2>\"" + err + "\"";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = csv::read_file(out);
  r.err = csv::read_file(err);
  return r;
}

}  // namespace

TEST_CASE("run config json is strict") {
  CHECK(kind_of([] { run_config_from_json(R"({"colour": 1})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"options": {"policy": "truncate"}})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"options": {"boundary_policy": "loose"}})"); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"model": {"family": "tobit"}})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"threads": "four"})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"threads": 0})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"options": {"proximity_window": [2012, 2010]}})"); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json("{not json"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { run_config_from_json(R"({"synth": {"seeds": 1}})"); }) == ErrorKind::ConfigError);
}

TEST_CASE("run config round trip and digest form") {
  const auto c = run_config_from_json(R"({
    "inputs": {"products": "p.csv", "pci": "/abs/pci.csv"},
    "options": {"proximity_window": [2008, 2012], "boundary_policy": "footnote-literal", "splits": ["periods"]},
    "model": {"family": "logit", "bread": "expected", "dummies": ["year"], "with_des": true},
    "output": "results", "threads": 3, "synth": {"seed": 17}})",
                                      "/base");
  CHECK(c.inputs.products == "p.csv");
  CHECK(c.proximity_window == YearRange{2008, 2012});
  CHECK(c.policy == BoundaryPolicy::FootnoteLiteral);
  CHECK(c.splits == std::vector<SplitScheme>{SplitScheme::Periods});
  CHECK(c.family == Family::Logit);
  CHECK(c.bread == BreadKind::Expected);
  CHECK(c.dummies == std::vector<std::string>{"year"});
  CHECK(c.with_des);
  CHECK(c.threads == 3);
  CHECK(c.synth.seed == 17);
  CHECK(resolve_path(c, c.inputs.products) == "/base/p.csv");
  CHECK(resolve_path(c, c.inputs.pci) == "/abs/pci.csv");

  const auto text = run_config_to_json(c);
  CHECK(run_config_to_json(run_config_from_json(text, "/base")) == text);
  auto other = c;
  other.output = "elsewhere";
  other.threads = 9;
  CHECK(run_config_to_json(other, true) == run_config_to_json(c, true));
  CHECK(run_config_to_json(other) != run_config_to_json(c));
  other.edge_threshold = 0.6;
  CHECK(run_config_to_json(other, true) != run_config_to_json(c, true));
}

TEST_CASE("environment overrides") {
  RunConfig c;
  const char* env[] = {"HOME=/root",
                       "PORTSPILL__OPTIONS__BOUNDARY_POLICY=strict-skip",
                       "PORTSPILL__THREADS=4",
                       "PORTSPILL__MODEL__DUMMIES=[\"year\"]",
                       "PORTSPILL__OUTPUT=elsewhere",
                       "PORTSPILL__SYNTH__BETA__OMEGA=2.5",
                       nullptr};
  apply_env_overrides(c, env);
  CHECK(c.policy == BoundaryPolicy::StrictSkip);
  CHECK(c.threads == 4);
  CHECK(c.dummies == std::vector<std::string>{"year"});
  CHECK(c.output == "elsewhere");
  CHECK(c.synth.beta.omega == 2.5);

  RunConfig d;
  const char* bad[] = {"PORTSPILL__OPTIONS__COLOUR=red", nullptr};
  CHECK(kind_of([&] { apply_env_overrides(d, bad); }) == ErrorKind::ConfigError);
  const char* none[] = {"PATH=/bin", nullptr};
  RunConfig e;
  apply_env_overrides(e, none);
  CHECK(run_config_to_json(e) == run_config_to_json(RunConfig{}));
}

TEST_CASE("published defaults pin the analysis options") {
  RunConfig c;
  c.proximity_window = YearRange{2010, 2012};
  c.policy = BoundaryPolicy::StrictSkip;
  c.splits = {};
  c.family = Family::Lpm;
  c.bread = BreadKind::Expected;
  c.cluster = "region";
  c.dummies = {};
  apply_paper_defaults(c);
  RunConfig ref;
  CHECK(run_config_to_json(c, true) == run_config_to_json(ref, true));
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  scratch::Dir dir("sha");
  CHECK(sha256_file(dir.write("a.txt", "abc")) == sha256_hex("abc"));
}

TEST_CASE("intermediate artifacts round trip") {
  const auto a = small_analysis();
  scratch::Dir dir("artifacts");

  SUBCASE("cubes") {
    for (const auto* cube : {&a.region_cube, &a.region_pooled, &a.port_cube}) {
      const auto path = dir.write("cube.csv", cube_to_csv(*cube));
      const auto back = cube_from_csv(path, cube->kind, cube->pooling, cube->locations, cube->products);
      REQUIRE(back.slices.size() == cube->slices.size());
      CHECK(back.window == cube->window);
      for (std::size_t t = 0; t < back.slices.size(); ++t) {
        CHECK(back.slices[t].year == cube->slices[t].year);
        CHECK(back.slices[t].rca == cube->slices[t].rca);
        CHECK(back.slices[t].m == cube->slices[t].m);
        CHECK(back.slices[t].ubiquity == cube->slices[t].ubiquity);
      }
    }
  }
  SUBCASE("proximity") {
    const auto path = dir.write("prox.csv", proximity_to_csv(a.production));
    const auto back = proximity_from_csv(path, ProximityKind::Production, a.production.products);
    CHECK(back.values == a.production.values);
    CHECK(back.window == a.production.window);
    const auto matrix = proximity_matrix_csv(a.production);
    std::istringstream in(matrix);
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == a.production.products->size() + 1);
  }
  SUBCASE("density") {
    const auto path = dir.write("omega.csv", density_to_csv(a.omega));
    const auto back = density_from_csv(path, LocationKind::Region, a.omega.locations, a.omega.products);
    CHECK(back.years == a.omega.years);
    REQUIRE(back.density.size() == a.omega.density.size());
    for (std::size_t t = 0; t < back.density.size(); ++t)
      for (Eigen::Index l = 0; l < back.density[t].rows(); ++l)
        for (Eigen::Index i = 0; i < back.density[t].cols(); ++i) {
          const double x = a.omega.density[t](l, i), y = back.density[t](l, i);
          CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
        }
  }
  SUBCASE("jumps") {
    const auto path = dir.write("jumps.csv", jumps_to_csv(a.jumps));
    const auto back = jumps_from_csv(path, a.region_cube, a.jumps.policy);
    CHECK(back.base_years == a.jumps.base_years);
    CHECK(back.candidate == a.jumps.candidate);
    CHECK(back.s == a.jumps.s);
  }
  SUBCASE("pci") {
    PciTable pci;
    pci.set("0101", 2010, 0.1 + 0.2);
    pci.set("8703", 2011, -1.5e-9);
    const auto back = pci_from_csv(dir.write("pci.csv", pci_to_csv(pci)));
    CHECK(back.values() == pci.values());
  }
}

TEST_CASE("output lock is exclusive") {
  scratch::Dir dir("lock");
  {
    OutputLock lock(dir.str());
    CHECK(fs::exists(dir.file(".portspill.lock")));
    CHECK(kind_of([&] { OutputLock again(dir.str()); }) == ErrorKind::Io);
  }
  CHECK_FALSE(fs::exists(dir.file(".portspill.lock")));
  OutputLock after(dir.str());
}

TEST_CASE("stages in process: upstream checks and no-op reruns") {
  scratch::Dir dir("stages");
  RunConfig gen = run_config_from_json(std::string(R"({"output": "out", "synth": )") + small_synth + "}", dir.str());
  std::ostringstream log;
  CHECK(cmd_generate(gen, log) == StageStatus::Ran);
  const auto run_json = dir.file("out/synth/run.json");
  REQUIRE(fs::exists(run_json));
  const auto cfg = run_config_from_json(csv::read_file(run_json), dir.file("out/synth"));

  CHECK(kind_of([&] { cmd_rca(cfg, log); }) == ErrorKind::MissingUpstreamArtifact);
  for (auto* cmd : {cmd_ingest, cmd_rca, cmd_proximity, cmd_density, cmd_jumps, cmd_match})
    CHECK(cmd(cfg, log) == StageStatus::Ran);
  const auto before = csv::read_file(dir.file("out/match/manifest.json"));
  for (auto* cmd : {cmd_ingest, cmd_rca, cmd_proximity, cmd_density, cmd_jumps, cmd_match})
    CHECK(cmd(cfg, log) == StageStatus::UpToDate);
  CHECK(csv::read_file(dir.file("out/match/manifest.json")) == before);

  // A changed option reruns the stage.
  auto strict = cfg;
  strict.policy = BoundaryPolicy::StrictSkip;
  CHECK(cmd_jumps(strict, log) == StageStatus::Ran);
}

TEST_CASE("command line") {
  scratch::Dir dir("cli");
  SUBCASE("usage and configuration errors exit 2") {
    CHECK(cli(dir, "").status == 2);
    CHECK(cli(dir, "frobnicate").status == 2);
    CHECK(cli(dir, "--config " + dir.file("missing.json") + " ingest").status == 2);
    dir.write("bad.json", R"({"outputs": "x"})");
    CHECK(cli(dir, "--config " + dir.file("bad.json") + " ingest").status == 2);
    CHECK(cli(dir, "--threads 0 ingest").status == 2);
    const auto v = cli(dir, "--version");
    CHECK(v.status == 0);
    CHECK(v.out.find(std::string(tool_version)) != std::string::npos);
  }
  SUBCASE("full run, no-op rerun, missing upstream, lock") {
    dir.write("gen.json", std::string(R"({"synth": )") + small_synth + "}");
    const auto gen = cli(dir, "--config " + dir.file("gen.json") + " --output " + dir.file("out") + " generate");
    REQUIRE(gen.status == 0);
    const std::string run = "--config " + dir.file("out/synth/run.json") + " ";

    const auto early = cli(dir, run + "match");
    CHECK(early.status == 1);
    CHECK(early.err.find("MissingUpstreamArtifact") != std::string::npos);

    for (const char* stage : {"ingest", "rca", "proximity", "density", "jumps", "match", "regress"})
      CHECK(cli(dir, run + stage).status == 0);
    const auto report = cli(dir, run + "report");
    CHECK(report.status == 0);
    CHECK(report.out.find("Observations") != std::string::npos);
    CHECK(fs::exists(dir.file("out/report/group_tests.csv")));
    CHECK(fs::exists(dir.file("out/report/production_space.graphml")));

    const auto again = cli(dir, run + "report --style none");
    CHECK(again.status == 0);
    CHECK(again.out.empty());
    CHECK(again.err.find("report: up to date") != std::string::npos);

    const auto csv_out = cli(dir, run + "report --style csv");
    CHECK(csv_out.out.rfind("column,term,estimate", 0) == 0);

    const auto one = cli(dir, "report --fit " + dir.file("out/regress/matched.all.all.probit.json"));
    CHECK(one.status == 0);
    CHECK(one.out.find("Omega") != std::string::npos);

    dir.write("out/.portspill.lock", "");
    CHECK(cli(dir, run + "ingest").status == 1);
    fs::remove(dir.file("out/.portspill.lock"));
    CHECK(cli(dir, run + "ingest").status == 0);
  }
}
