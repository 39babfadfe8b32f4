#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kamdrift/flow.hpp"
#include "kamdrift/path.hpp"
#include "kamdrift/perturbation.hpp"

namespace kamdrift {

struct PathSpec {
  std::vector<double> v1;
  std::vector<double> v2;
  Interval J;
};

struct PoincareSpec {
  int seeds = 4;
  int crossings = 1000;
  double t_max = 1e5;
};

struct Scenario {
  std::string name;
  PathSpec path;
  double sigma = 1.0;
  double epsilon = 1.0;
  bool cutoff = false;
  int channels = 4;
  Chart chart = Chart::action_angle;
  double y_max = 0.25;
  double delta_shrink = 1.0;
  IntegratorConfig integrator;
  PoincareSpec poincare;
  std::string output_dir = "kamdrift_out";
  std::uint64_t seed = 1;

  FrequencyPath frequency_path() const;
  PerturbationOptions perturbation_options() const;
  PerturbedSystem assemble(AssemblyReport* report = nullptr) const;
};

// Unknown keys and ill-typed values raise ValidationError.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

// A file path, or the name of a bundled scenario.
Scenario load_scenario(const std::string& name_or_path);
std::filesystem::path bundled_scenario_dir();

// JSON text with every double printed to 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);

const char* to_string(Chart c);
const char* to_string(Scheme s);

}  // namespace kamdrift
