#pragma once

#include <map>
#include <set>

#include "fluxlab/modelfile.hpp"
#include "fluxlab/models.hpp"

namespace fluxlab {

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pass/fail thresholds; every value can be overridden per experiment in the
/// config or on the command line.
struct Thresholds {
  double var_u_max = 1e-3;
  double var_qbar_max = 1e-8;
  double residual_split_max = 1e-6;
  double residual_constraint_max = 1e-4;
  double support_residual_max = -1.0;  // < 0: report only
  double clustering_c_min = 0.2;
  double clustering_rms_max = 1.0;
  double gap_min = 1e-8;
  double index_tol = 0.05;
  double chi_tol = 1e-2;
  double evolve_error = 1e-9;

  void apply(const Json& overrides);
  Json to_json() const;
};

struct RecipeInfo {
  std::string name;
  std::string family;  // lsm | bridge | pump | hall | bloch | pqp
  std::string description;
  Json defaults;                // builder parameters
  std::vector<int> admissible_l;
  std::optional<int> expected_index;
  std::string provenance;  // where the expected value comes from
  bool positive = true;
  std::vector<std::string> declared_failures;  // for negative controls
  std::vector<std::string> group_checks;  // family-level trend checks
};

const std::vector<RecipeInfo>& recipe_registry();
const RecipeInfo& find_recipe(const std::string& name);

struct ExperimentSpec {
  std::string recipe;
  int length = 8;
  Json params;  // merged over recipe defaults
  int chi_grid = 0;
  Thresholds thresholds;
  unsigned seed = 0;
};

struct ExperimentResult {
  std::string key;
  std::string status;  // pass | assumption-fail | error
  std::vector<std::string> failures;
  Json report;
  // plot-ready payloads
  std::vector<std::array<double, 5>> chi_rows;  // phi, re/im chi, re/im z
  std::vector<std::pair<int, double>> clustering_rows;
  std::vector<std::array<double, 3>> locality_rows;  // d, minus, plus
  double seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------

struct RunConfig {
  struct Entry {
    std::string recipe;
    std::vector<int> lengths;  // empty: recipe's admissible list
    Json params;
    int chi_grid = -1;  // -1: recipe default
  };
  std::vector<Entry> experiments;
  Json threshold_overrides;
  std::string out_dir = "out";
  unsigned seed = 0;
  int jobs = 1;

  static RunConfig from_json(const Json& j);
  Json to_json() const;
};

struct RunManifest {
  std::string config_hash;
  std::string artifact_version;
  Json experiments;  // array of {key, recipe, L, status, report_path, ...}
  Json families;     // group trend checks
  int exit_code = 0;

  Json to_json() const;
};

RunManifest run_config(const RunConfig& config);

// ---------------------------------------------------------------------------

struct SweepConfig {
  std::string recipe;
  int length = 8;
  std::string param;
  std::vector<double> values;
  Json params;
  Json threshold_overrides;
  std::string out_dir = "out";
  unsigned seed = 0;

  static SweepConfig from_json(const Json& j);
};

struct SweepResult {
  Json manifest;
  // rows: value, index, nearest, deviation, gap, residuals, nu, nu_unwrapped
  std::vector<Json> points;
  int exit_code = 0;
};

SweepResult run_sweep(const SweepConfig& config);

std::string config_hash(const Json& j);

}  // namespace fluxlab
