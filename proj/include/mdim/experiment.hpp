#pragma once

// Experiment drivers behind the CLI: each command reads a JSON config,
// runs the construction with its audits, writes a report, and returns
// 0 (all audits pass), 1 (bad config), or 2 (an audit failed; the report
// is still written).

#include <string>
#include <vector>

namespace mdim {

struct RunOptions {
  std::string config_path;  // empty: built-in defaults
  std::string out_dir = ".";
  std::string format = "json";  // json or csv
  unsigned seed = 1;
  bool seed_overridden = false;
};

extern const std::vector<std::string> kExperimentNames;

int run_experiment(const std::string& command, const RunOptions& options);

}  // namespace mdim
