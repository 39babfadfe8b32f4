#include "kamdrift/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kamdrift/errors.hpp"

#ifndef KAMDRIFT_SCENARIO_DIR
#define KAMDRIFT_SCENARIO_DIR "scenarios"
#endif

namespace kamdrift {

using nlohmann::json;

const char* to_string(Chart c) { return c == Chart::cartesian ? "cartesian" : "action_angle"; }

const char* to_string(Scheme s) { return s == Scheme::implicit_midpoint ? "implicit_midpoint" : "adaptive_rk8"; }

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void get_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
  return v;
}

}  // namespace

FrequencyPath Scenario::frequency_path() const {
  return FrequencyPath(Polynomial(path.v1), Polynomial(path.v2), path.J);
}

PerturbationOptions Scenario::perturbation_options() const {
  PerturbationOptions o;
  o.sigma = sigma;
  o.epsilon = epsilon;
  o.use_cutoff = cutoff;
  o.chart = chart;
  return o;
}

PerturbedSystem Scenario::assemble(AssemblyReport* report) const {
  return assemble_system(frequency_path(), channels, y_max, delta_shrink, perturbation_options(), report);
}

Scenario scenario_from_json(const json& j) {
  reject_unknown(j,
                 {"name", "path", "sigma", "epsilon", "cutoff", "channels", "chart", "y_max", "delta_shrink",
                  "integrator", "poincare", "output_dir", "seed"},
                 "scenario");
  Scenario s;
  s.name = get<std::string>(j, "name", "scenario");
  const json& p = j.at("path");
  reject_unknown(p, {"v1", "v2", "J"}, "path");
  s.path.v1 = get<std::vector<double>>(p, "v1", "path");
  s.path.v2 = get<std::vector<double>>(p, "v2", "path");
  if (p.contains("J")) {
    const auto J = get<std::vector<double>>(p, "J", "path");
    if (J.size() != 2 || !(J[0] < J[1])) throw ValidationError("path.J must be an increasing pair");
    s.path.J = {J[0], J[1]};
  }
  get_opt(j, "sigma", s.sigma, "scenario");
  get_opt(j, "epsilon", s.epsilon, "scenario");
  get_opt(j, "cutoff", s.cutoff, "scenario");
  get_opt(j, "channels", s.channels, "scenario");
  get_opt(j, "y_max", s.y_max, "scenario");
  get_opt(j, "delta_shrink", s.delta_shrink, "scenario");
  get_opt(j, "output_dir", s.output_dir, "scenario");
  get_opt(j, "seed", s.seed, "scenario");
  if (j.contains("chart")) {
    const auto c = get<std::string>(j, "chart", "scenario");
    if (c == "action_angle") s.chart = Chart::action_angle;
    else if (c == "cartesian") s.chart = Chart::cartesian;
    else throw ValidationError("chart must be 'action_angle' or 'cartesian'");
  }
  if (j.contains("integrator")) {
    const json& ij = j.at("integrator");
    reject_unknown(ij, {"scheme", "rel_tol", "abs_tol", "max_step", "energy_alarm", "fixed_step"}, "integrator");
    IntegratorConfig& c = s.integrator;
    if (ij.contains("scheme")) {
      const auto sc = get<std::string>(ij, "scheme", "integrator");
      if (sc == "adaptive_rk8") c.scheme = Scheme::adaptive_rk8;
      else if (sc == "implicit_midpoint") c.scheme = Scheme::implicit_midpoint;
      else throw ValidationError("integrator.scheme must be 'adaptive_rk8' or 'implicit_midpoint'");
    }
    get_opt(ij, "rel_tol", c.rel_tol, "integrator");
    get_opt(ij, "abs_tol", c.abs_tol, "integrator");
    get_opt(ij, "energy_alarm", c.energy_alarm, "integrator");
    get_opt(ij, "fixed_step", c.fixed_step, "integrator");
    // null encodes an unbounded step
    if (ij.contains("max_step") && !ij.at("max_step").is_null()) c.max_step = get<double>(ij, "max_step", "integrator");
    if (!(c.rel_tol > 0 && c.abs_tol > 0 && c.energy_alarm > 0 && c.fixed_step > 0 && c.max_step > 0))
      throw ValidationError("integrator tolerances and steps must be positive");
  }
  if (j.contains("poincare")) {
    const json& pj = j.at("poincare");
    reject_unknown(pj, {"seeds", "crossings", "t_max"}, "poincare");
    get_opt(pj, "seeds", s.poincare.seeds, "poincare");
    get_opt(pj, "crossings", s.poincare.crossings, "poincare");
    get_opt(pj, "t_max", s.poincare.t_max, "poincare");
    if (s.poincare.seeds < 0 || s.poincare.crossings < 1 || !(s.poincare.t_max > 0))
      throw ValidationError("poincare settings out of range");
  }
  if (s.name.empty()) throw ValidationError("name must be non-empty");
  if (!(finite(s.sigma, "sigma") > 0)) throw ValidationError("sigma must be positive");
  if (!(finite(s.epsilon, "epsilon") >= 0)) throw ValidationError("epsilon must be non-negative");
  if (s.channels < 0) throw ValidationError("channels must be non-negative");
  if (!(finite(s.y_max, "y_max") > 0)) throw ValidationError("y_max must be positive");
  if (!(s.delta_shrink > 0 && s.delta_shrink <= 1)) throw ValidationError("delta_shrink must lie in (0, 1]");
  if (s.path.v1.empty() || s.path.v2.empty()) throw ValidationError("path.v1 and path.v2 must be non-empty");
  return s;
}

json scenario_to_json(const Scenario& s) {
  json ij = {{"scheme", to_string(s.integrator.scheme)},
             {"rel_tol", s.integrator.rel_tol},
             {"abs_tol", s.integrator.abs_tol},
             {"energy_alarm", s.integrator.energy_alarm},
             {"fixed_step", s.integrator.fixed_step}};
  ij["max_step"] = std::isfinite(s.integrator.max_step) ? json(s.integrator.max_step) : json(nullptr);
  return {{"name", s.name},
          {"path", {{"v1", s.path.v1}, {"v2", s.path.v2}, {"J", {s.path.J.lo, s.path.J.hi}}}},
          {"sigma", s.sigma},
          {"epsilon", s.epsilon},
          {"cutoff", s.cutoff},
          {"channels", s.channels},
          {"chart", to_string(s.chart)},
          {"y_max", s.y_max},
          {"delta_shrink", s.delta_shrink},
          {"integrator", ij},
          {"poincare", {{"seeds", s.poincare.seeds}, {"crossings", s.poincare.crossings}, {"t_max", s.poincare.t_max}}},
          {"output_dir", s.output_dir},
          {"seed", s.seed}};
}

std::filesystem::path bundled_scenario_dir() { return KAMDRIFT_SCENARIO_DIR; }

Scenario load_scenario(const std::string& name_or_path) {
  std::filesystem::path file = name_or_path;
  if (!std::filesystem::exists(file)) file = bundled_scenario_dir() / (name_or_path + ".json");
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open scenario '" + name_or_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed scenario '" + name_or_path + "': " + e.what());
  }
  return scenario_from_json(j);
}

namespace {

void dump_to(std::ostringstream& os, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        os << (first ? "" : ",") << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        dump_to(os, it.value(), indent, depth + 1);
        first = false;
      }
      os << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[';
      bool first = true;
      for (const json& v : j) {
        os << (first ? "" : ",") << pad;
        dump_to(os, v, indent, depth + 1);
        first = false;
      }
      os << close << ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s = buf;
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      os << s;
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::ostringstream os;
  dump_to(os, j, indent, 0);
  return os.str();
}

void write_json(const std::filesystem::path& file, const json& j) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  out << dump_json(j) << '\n';
}

}  // namespace kamdrift
