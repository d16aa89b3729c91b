#include <CLI11.hpp>
#include <iostream>

#include "qsb/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"system-bath thermal and ground state preparation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir = ".";

  CLI::App* run = app.add_subcommand("run", "run the experiment named in a config");
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--output", output_dir, "output directory");

  CLI::App* validate = app.add_subcommand("validate", "parse and range-check a config");
  validate->add_option("config", config_path, "config file (JSON)")->required();

  app.add_subcommand("list-experiments", "print the named experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-experiments")) {
      for (const auto& name : qsb::experiment_names()) std::cout << name << "\n";
      return 0;
    }
    if (app.got_subcommand("validate")) {
      qsb::ExperimentConfig cfg = qsb::parse_config_file(config_path);
      bool known = false;
      for (const auto& name : qsb::experiment_names())
        if (name == cfg.experiment) known = true;
      if (!known) {
        std::cerr << "config.experiment: unknown experiment '" << cfg.experiment
                  << "'\n";
        return 1;
      }
      std::cout << "ok: " << cfg.experiment << "\n";
      return 0;
    }
    qsb::ExperimentConfig cfg = qsb::parse_config_file(config_path);
    qsb::ResultRecord record = qsb::run_experiment(cfg);
    for (const std::string& path : qsb::write_outputs(record, output_dir))
      std::cout << path << "\n";
    if (record.status != "ok") {
      std::cerr << record.status << "\n";
      return 2;
    }
    return 0;
  } catch (const qsb::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
