#include "mdim/experiment.hpp"

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mdimlab: cover, level-function, and fiber experiments"};
  app.require_subcommand(1);

  mdim::RunOptions opt;
  std::string command;
  for (const std::string& name : mdim::kExperimentNames) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON config path");
    sub->add_option("--out", opt.out_dir, "report directory");
    sub->add_option("--format", opt.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", opt.seed, "seed override")
        ->each([&](const std::string&) { opt.seed_overridden = true; });
    sub->callback([&, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return mdim::run_experiment(command, opt);
}
