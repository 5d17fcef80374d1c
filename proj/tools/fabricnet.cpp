#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fabricnet/config.hpp"
#include "fabricnet/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string resolve_out_dir(const std::string& flag_value) {
  const char* env = std::getenv("FABRICNET_OUT");
  if (env && *env) return env;
  return flag_value;
}

int print_diagnostics(const fabricnet::config::LoadResult& loaded) {
  for (const fabricnet::config::Diagnostic& d : loaded.diagnostics)
    std::cerr << d.to_string() << "\n";
  return kExitValidation;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fabricnet: deterministic factory and network co-simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag = "out";
  std::string domain;
  std::string policies_flag;
  std::uint64_t seed_flag = 0;
  int seeds_flag = 0;
  int episodes_flag = 0;

  CLI::App* validate = app.add_subcommand("validate", "check a scenario config");
  validate->add_option("--config", config_path, "scenario file")->required();

  CLI::App* run = app.add_subcommand("run", "run an experiment pipeline");
  run->add_option("domain", domain, "offload | slicing | locate | monitor")
      ->required()
      ->check(CLI::IsMember({"offload", "slicing", "locate", "monitor"}));
  run->add_option("--config", config_path, "scenario file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed_flag, "master seed override");
  CLI::Option* seeds_opt =
      run->add_option("--seeds", seeds_flag, "number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--out", out_flag, "output directory (FABRICNET_OUT overrides)");
  run->add_option("--policies", policies_flag, "comma-separated offload policies");
  CLI::Option* episodes_opt =
      run->add_option("--episodes", episodes_flag, "training episodes")
          ->check(CLI::PositiveNumber);

  CLI::App* compare = app.add_subcommand("compare", "aggregate metrics CSVs");
  std::vector<std::string> compare_files;
  std::string group_by = "policy";
  compare->add_option("files", compare_files, "metrics CSV files")->required();
  compare->add_option("--group-by", group_by, "grouping column (default policy)");
  compare->add_option("--out", out_flag, "directory for compare.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (validate->parsed()) {
      const fabricnet::config::LoadResult loaded =
          fabricnet::config::load_scenario_file(config_path);
      if (!loaded.ok()) return print_diagnostics(loaded);
      std::cout << "ok\n";
      return kExitOk;
    }

    if (run->parsed()) {
      const fabricnet::config::LoadResult loaded =
          fabricnet::config::load_scenario_file(config_path);
      if (!loaded.ok()) return print_diagnostics(loaded);
      if (loaded.config.experiment.kind != domain) {
        std::cerr << "experiment.kind: config declares '" << loaded.config.experiment.kind
                  << "' but the command is 'run " << domain << "'\n";
        return kExitValidation;
      }
      fabricnet::experiments::RunOverrides ov;
      if (seed_opt->count()) ov.seed = seed_flag;
      if (seeds_opt->count()) ov.seeds = seeds_flag;
      if (episodes_opt->count()) ov.episodes = episodes_flag;
      ov.policies = split_list(policies_flag);
      return fabricnet::experiments::execute(loaded.config, domain, ov,
                                             resolve_out_dir(out_flag));
    }

    if (compare->parsed()) {
      fabricnet::experiments::CompareResult res;
      try {
        res = fabricnet::experiments::compare_metrics(compare_files, group_by);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
      }
      std::cout << fabricnet::experiments::compare_table(res);
      const std::string dir = resolve_out_dir(out_flag);
      std::filesystem::create_directories(dir);
      const std::string path = (std::filesystem::path(dir) / "compare.json").string();
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + path);
      f << fabricnet::experiments::compare_json(res);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
