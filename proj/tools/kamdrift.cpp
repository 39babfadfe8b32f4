#include <iostream>

#include <CLI11.hpp>

#include "kamdrift/commands.hpp"

int main(int argc, char** argv) {
  using namespace kamdrift::cli;
  CLI::App app{"Construct, simulate and verify unstable tori and elliptic points"};
  app.require_subcommand(1);
  CommandOptions opts;
  for (const std::string& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", opts.scenario, "scenario file or bundled scenario name");
    sub->add_option("--out", opts.out, "output root directory");
    sub->add_option("--channel", opts.channel, "channel index");
    sub->add_option("--epsilon", opts.epsilon, "override the perturbation size");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidation;
  }
  return run_command(app.get_subcommands().front()->get_name(), opts, std::cout, std::cerr);
}
