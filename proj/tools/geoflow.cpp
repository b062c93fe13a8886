#include <iostream>

#include <CLI11.hpp>

#include "geoflow/scenario.hpp"

namespace {

constexpr const char* kVersion = "geoflow 1.0.0";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic flows of time-dependent mechanical systems"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  auto* run = app.add_subcommand("run", "Run every task in a scenario and write CSV files and report.txt");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("-o,--out", out_dir, "Output directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and check a scenario without running it");
  validate->add_option("scenario", validate_path, "Scenario file")->required();

  std::string convert_path;
  auto* convert = app.add_subcommand("convert", "Print derived connection components at the initial point");
  convert->add_option("scenario", convert_path, "Scenario file")->required();

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const auto report = geoflow::run_scenario(scenario_path, out_dir);
      std::cout << report.text();
      return report.exit_status;
    }
    if (*validate) {
      const auto s = geoflow::load_scenario(validate_path);
      std::cout << "valid: " << s.name << " (dimension " << s.n << ", " << s.tasks.size() << " tasks)\n";
      return 0;
    }
    if (*convert) {
      std::cout << geoflow::convert_summary(geoflow::load_scenario(convert_path));
      return 0;
    }
    std::cout << kVersion << "\n";
    return 0;
  } catch (const geoflow::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const geoflow::Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
