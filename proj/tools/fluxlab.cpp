#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "fluxlab/experiment.hpp"

namespace {

fluxlab::Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw fluxlab::NotFoundError("cannot open config file " + path);
  fluxlab::Json j;
  f >> j;
  return j;
}

fluxlab::Json parse_threshold_flags(const std::vector<std::string>& kvs) {
  fluxlab::Json out = fluxlab::Json::object();
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw fluxlab::ParameterError("--threshold expects KEY=VAL, got " + kv);
    }
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fluxlab: charge-transport index experiments on finite lattice tori"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> threshold_flags;
  int jobs = 0;
  unsigned seed = 0;
  bool have_seed = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--jobs", jobs, "parallel experiment workers");
    cmd->add_option("--threshold", threshold_flags,
                    "threshold override KEY=VAL (repeatable)");
    cmd->add_option_function<unsigned>(
        "--seed", [&](unsigned s) { seed = s; have_seed = true; },
        "seed for randomized probes");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run a batch of experiments");
  add_common(run_cmd);
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "sweep a recipe parameter");
  add_common(sweep_cmd);
  CLI::App* list_cmd =
      app.add_subcommand("list-recipes", "list bundled recipes");
  std::string describe_name;
  CLI::App* describe_cmd =
      app.add_subcommand("describe", "describe one recipe");
  describe_cmd->add_option("recipe", describe_name, "recipe name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& r : fluxlab::recipe_registry()) {
        std::cout << r.name << "  [" << r.family << "]"
                  << (r.positive ? "" : "  (negative control)");
        if (r.expected_index) {
          std::cout << "  expected index " << *r.expected_index;
        }
        std::cout << "\n    " << r.description << "\n";
      }
      return 0;
    }
    if (describe_cmd->parsed()) {
      const auto& r = fluxlab::find_recipe(describe_name);
      fluxlab::Json j{{"name", r.name},
                      {"family", r.family},
                      {"description", r.description},
                      {"defaults", r.defaults},
                      {"admissible_L", r.admissible_l},
                      {"expected_index",
                       r.expected_index ? fluxlab::Json(*r.expected_index)
                                        : fluxlab::Json(nullptr)},
                      {"provenance", r.provenance},
                      {"positive", r.positive},
                      {"declared_failures", r.declared_failures}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      fluxlab::RunConfig cfg =
          fluxlab::RunConfig::from_json(load_json(config_path));
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (jobs > 0) cfg.jobs = jobs;
      if (have_seed) cfg.seed = seed;
      const fluxlab::Json tf = parse_threshold_flags(threshold_flags);
      for (auto it = tf.begin(); it != tf.end(); ++it) {
        cfg.threshold_overrides[it.key()] = it.value();
      }
      fluxlab::RunManifest manifest = fluxlab::run_config(cfg);
      for (const auto& e : manifest.experiments) {
        std::cout << e.at("key").get<std::string>() << ": "
                  << e.at("status").get<std::string>() << "\n";
      }
      std::cout << "manifest: " << cfg.out_dir << "/manifest.json\n";
      return manifest.exit_code;
    }
    if (sweep_cmd->parsed()) {
      fluxlab::SweepConfig cfg =
          fluxlab::SweepConfig::from_json(load_json(config_path));
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (have_seed) cfg.seed = seed;
      const fluxlab::Json tf = parse_threshold_flags(threshold_flags);
      for (auto it = tf.begin(); it != tf.end(); ++it) {
        cfg.threshold_overrides[it.key()] = it.value();
      }
      fluxlab::SweepResult res = fluxlab::run_sweep(cfg);
      std::cout << res.manifest.at("csv").get<std::string>() << "\n";
      return res.exit_code;
    }
  } catch (const fluxlab::NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fluxlab::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
