#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "vmimo/commands.hpp"
#include "vmimo/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative relay selection simulator for virtual MIMO"};

  std::string config_path;
  std::string out_dir;
  std::string command;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  app.add_option("--config", config_path, "Path to key=value config file")
      ->required();
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--command", command,
                 "One of gen-data|train|evaluate|simulate|compare-timing")
      ->required()
      ->check(CLI::IsMember(
          {"gen-data", "train", "evaluate", "simulate", "compare-timing"}));
  app.add_option("--seed", seed_override, "Override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    vmimo::RunConfig config = vmimo::load_run_config(config_path);
    if (seed_given) config.seed = seed_override;
    const std::filesystem::path out(out_dir);

    if (command == "gen-data") vmimo::cmd_gen_data(config, out);
    else if (command == "train") vmimo::cmd_train(config, out);
    else if (command == "evaluate") vmimo::cmd_evaluate(config, out);
    else if (command == "simulate") vmimo::cmd_simulate(config, out);
    else vmimo::cmd_compare_timing(config, out);

    std::printf("%s: done (seed %llu, out %s)\n", command.c_str(),
                static_cast<unsigned long long>(config.seed), out_dir.c_str());
    return kExitOk;
  } catch (const vmimo::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
}
