#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "semiwkb/config.hpp"
#include "semiwkb/error.hpp"
#include "semiwkb/harness.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kResolution = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical limit experiments for radial Schrodinger-Poisson"};
  std::string scenario_name, config_path;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  app.add_option("scenario", scenario_name,
                 "classify | evolve-ep | wkb-eval | schrodinger-run | converge | decay-study")
      ->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out, "output directory (default: output_dir from the config)");
  app.add_option("--threads", threads, "worker threads, 0 for all cores");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    const auto scenario = semiwkb::parse_scenario(scenario_name);
    const auto config = semiwkb::load_config(config_path);
    const auto paths = semiwkb::run_scenario(config, scenario, out.value_or(config.output_dir),
                                             threads.value_or(config.threads));
    for (const auto& p : paths) std::cout << p.string() << '\n';
    std::cout << "config_hash " << semiwkb::config_hash(config) << '\n';
    return 0;
  } catch (const semiwkb::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return kResolution;
  } catch (const semiwkb::ParameterError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kValidation;
  } catch (const semiwkb::ContractError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kValidation;
  } catch (const semiwkb::UnsupportedConfiguration& e) {
    std::cerr << "unsupported configuration: " << e.what() << '\n';
    return kValidation;
  } catch (const semiwkb::DomainError& e) {
    std::cerr << "invalid data: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
