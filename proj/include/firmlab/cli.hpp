#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "firmlab/experiment.hpp"
#include "firmlab/version.hpp"

namespace firmlab::cli {

// Seed precedence: --seed flag, then FIRMLAB_SEED, then the config value.
inline std::optional<std::uint64_t> seed_from_env(std::ostream& err, bool& ok) {
  ok = true;
  const char* env = std::getenv("FIRMLAB_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    err << "firmlab: FIRMLAB_SEED is not a valid integer: " << env << "\n";
    ok = false;
    return std::nullopt;
  }
  return static_cast<std::uint64_t>(value);
}

inline int run_main(int argc, const char* const* argv) {
  CLI::App app{"firmlab: numerical experiments with firm non-expansive mappings"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  std::string out_dir;
  std::uint64_t seed_flag = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  run->add_option("config", config_path, "path to the experiment config")->required();
  CLI::Option* threads_opt =
      run->add_option("--threads", threads, "cap the worker count (default: available cores)");
  CLI::Option* out_opt = run->add_option("--out", out_dir, "directory for report/CSV outputs");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_flag, "override the sampling seed (flag > env > config)");

  CLI::App* list = app.add_subcommand("list", "list built-in spaces, maps and tasks");
  CLI::App* version = app.add_subcommand("version", "print the artifact version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list->parsed()) {
    std::cout << experiment::list_builtins();
    return 0;
  }
  if (version->parsed()) {
    std::cout << "firmlab " << kVersion << " (report schema " << kReportSchemaVersion << ")\n";
    return 0;
  }

  experiment::RunOverrides overrides;
  if (threads_opt->count() > 0) {
    if (threads < 1) {
      std::cerr << "firmlab: --threads must be >= 1\n";
      return 2;
    }
    overrides.threads = threads;
  }
  if (out_opt->count() > 0) overrides.out_dir = out_dir;
  if (seed_opt->count() > 0) {
    overrides.seed = seed_flag;
  } else {
    bool env_ok = true;
    const auto env_seed = seed_from_env(std::cerr, env_ok);
    if (!env_ok) return 2;
    if (env_seed.has_value()) overrides.seed = env_seed;
  }
  return experiment::run_config_file(config_path, overrides, std::cout, std::cerr);
}

inline int run_with_args(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("firmlab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace firmlab::cli
