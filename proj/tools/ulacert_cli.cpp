// Batch front door: parses an experiment config, runs one operation, writes
// result.json plus the operation's CSV artifacts.
//
// Exit codes: 0 success, 1 config error, 2 infeasibility, 3 validation failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ulacert/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ulacert: non-asymptotic certification tools for unadjusted Langevin sampling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;

  const std::vector<std::string> ops = {"plan",     "certify", "sample", "couple",
                                        "validate", "scaling", "explain"};
  for (const auto& op : ops) {
    CLI::App* sub = app.add_subcommand(op);
    sub->add_option("--config", config_path, "experiment config (json)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--workers", workers, "max worker threads");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string op = app.get_subcommands().front()->get_name();

  try {
    ulacert::ExperimentConfig config = ulacert::load_config(config_path, op);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (workers > 0) config.workers = workers;
    const ulacert::RunArtifacts artifacts = ulacert::run_operation(config);
    std::cout << artifacts.result.dump(2) << "\n";
    return artifacts.exit_code;
  } catch (const ulacert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ulacert::InfeasibilityError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const ulacert::ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
