#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kamdrift::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kMissingInput = 3, kNumericFailure = 4 };

struct Check {
  int criterion = 0;  // 0 for auxiliary checks
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<", "<=", ">=", "=="
  bool pass = false;
};

nlohmann::json to_json(const Check& c);

struct CommandOptions {
  std::optional<std::string> scenario;
  std::optional<std::string> out;
  std::optional<int> channel;
  std::optional<double> epsilon;
};

inline const std::vector<std::string> kCommands = {"construct", "resonances", "simulate", "verify-drift",
                                                   "verify-gevrey", "poincare", "report"};

// Runs one subcommand; errors are mapped to exit codes and reported on err.
int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace kamdrift::cli
