#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "portspill/complexity.hpp"
#include "portspill/econometrics.hpp"
#include "portspill/ingest.hpp"
#include "portspill/outcomes.hpp"
#include "portspill/synth.hpp"
#include "portspill/types.hpp"

namespace portspill {

inline constexpr std::string_view tool_version = "0.3.0";

struct AnalysisOptions {
  std::optional<YearRange> proximity_window;  // whole panel when empty
  BoundaryPolicy policy = BoundaryPolicy::Truncate;
};

// In-memory chain from panels to estimation tables.
struct Analysis {
  AdvantageCube region_cube;
  AdvantageCube region_pooled;
  AdvantageCube port_cube;
  AdvantageCube port_pooled;
  ProximityMatrix production;  // phi, regions
  ProximityMatrix transport;   // Phi, ports
  RelatednessPanel omega;
  RelatednessPanel port_omega;
  JumpPanel jumps;
  CountMap trm;
  std::optional<CountMap> des;
  TableBuild region;
  TableBuild matched;
};

Analysis analyze(const ExportPanel& regions, const ExportPanel& ports, const PortRegionMap& map, const PciTable& pci,
                 const ContinentMap* continents, const AnalysisOptions& options = {});

// Table 2 / Table 3 column (1) shaped specs.
ModelSpec region_model(Family family = Family::Probit);
ModelSpec matched_model(Family family = Family::Probit, bool with_des = false);

// ---- run configuration ----------------------------------------------------

// Raw inputs. Relative paths resolve against the config file's directory.
struct InputPaths {
  std::string products;        // hs4,section,leamer
  std::string regions;         // code
  std::string ports;           // code
  std::string port_regions;    // port,region
  std::string region_exports;  // region,product,year,port,value
  std::string port_exports;    // port,product,year,destination_country,value
  std::string pci;             // hs2002,year,pci
  std::string concordance;     // hs2002,hs2017
  std::string continents;      // country,continent (optional; enables DES)
};

struct RunConfig {
  InputPaths inputs;
  ExportSchema region_schema = ExportSchema::defaults(LocationKind::Region);
  ExportSchema port_schema = ExportSchema::defaults(LocationKind::Port);
  std::optional<YearRange> proximity_window;  // empty: pooled over every panel year
  BoundaryPolicy policy = BoundaryPolicy::Truncate;
  double edge_threshold = 0.55;
  std::vector<SplitScheme> splits = {SplitScheme::PciMean, SplitScheme::LeamerGroups, SplitScheme::Periods};
  Family family = Family::Probit;
  BreadKind bread = BreadKind::Observed;
  std::string cluster = "product";
  std::vector<std::string> dummies = {"year", "region"};
  bool with_des = false;
  std::string output = "out";
  SynthConfig synth;
  unsigned threads = 1;

  std::string base_dir = ".";  // not serialized
};

// Strict JSON reader: unknown keys and wrong types throw Error(ConfigError).
RunConfig run_config_from_json(const std::string& text, const std::string& base_dir = ".");
// Canonical form; also the digest input (threads and output excluded).
std::string run_config_to_json(const RunConfig& config, bool for_digest = false);

// Applies PORTSPILL__SECTION__KEY=value overrides (keys lowercased, "__"
// separates levels; values parsed as JSON, falling back to a string).
// `env` holds "NAME=value" entries; pass nullptr to read the process
// environment.
void apply_env_overrides(RunConfig& config, const char* const* env = nullptr);

// Pins every option to the published configuration: pooled proximity over
// the whole panel, truncate boundary policy, two-way (year, region) FE probit
// clustered by product with observed-information bread, all three splits.
void apply_paper_defaults(RunConfig& config);

// Absolute or base_dir-relative resolution.
std::string resolve_path(const RunConfig& config, const std::string& path);

// ---- artifacts --------------------------------------------------------------

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

// Flat-file forms of the intermediate artifacts. Cube rows keep only
// positive RCA (m and ubiquity are rederived on load); proximity rows keep
// i < j with positive value; density rows cover every cell, NA when
// undefined; jump rows cover every candidate.
std::string cube_to_csv(const AdvantageCube& cube);
AdvantageCube cube_from_csv(const std::string& path, LocationKind kind, RcaPooling pooling,
                            std::shared_ptr<const LocationRegistry> locations,
                            std::shared_ptr<const ProductUniverse> products);
std::string proximity_to_csv(const ProximityMatrix& prox);
ProximityMatrix proximity_from_csv(const std::string& path, ProximityKind kind,
                                   std::shared_ptr<const ProductUniverse> products);
// Full symmetric matrix with product-code headers, for external tools.
std::string proximity_matrix_csv(const ProximityMatrix& prox);
std::string density_to_csv(const RelatednessPanel& panel);
RelatednessPanel density_from_csv(const std::string& path, LocationKind kind,
                                  std::shared_ptr<const LocationRegistry> locations,
                                  std::shared_ptr<const ProductUniverse> products);
std::string jumps_to_csv(const JumpPanel& jumps);
JumpPanel jumps_from_csv(const std::string& path, const AdvantageCube& cube, BoundaryPolicy policy);
std::string pci_to_csv(const PciTable& pci);  // hs4,year,pci
PciTable pci_from_csv(const std::string& path);

// ---- commands -----------------------------------------------------------------

enum class StageStatus { Ran, UpToDate };

// Holds <output>/.portspill.lock for its lifetime; throws Error(Io) when the
// directory is already locked.
class OutputLock {
 public:
  explicit OutputLock(const std::string& output_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

// Every stage writes <output>/<stage>/ plus <stage>/manifest.json and
// returns UpToDate without touching any file when the config digest, tool
// version, input digests and output digests all match the manifest.
// Downstream stages throw Error(MissingUpstreamArtifact) when an upstream
// manifest is absent.
StageStatus cmd_ingest(const RunConfig& config, std::ostream& log);
StageStatus cmd_rca(const RunConfig& config, std::ostream& log);
StageStatus cmd_proximity(const RunConfig& config, std::ostream& log);
StageStatus cmd_density(const RunConfig& config, std::ostream& log);
StageStatus cmd_jumps(const RunConfig& config, std::ostream& log);
StageStatus cmd_match(const RunConfig& config, std::ostream& log);
StageStatus cmd_regress(const RunConfig& config, std::ostream& log);
StageStatus cmd_report(const RunConfig& config, std::ostream& log);
// Writes the synthetic inputs to <output>/synth/ with a run.json whose
// inputs point at them and whose output is <output>.
StageStatus cmd_generate(const RunConfig& config, std::ostream& log);

inline constexpr std::string_view stage_names[] = {"ingest", "rca",     "proximity", "density", "jumps",
                                                   "match",  "regress", "report",    "generate"};

}  // namespace portspill
