#include <cmath>
#include <fstream>
#include <set>

#include "qedlat/experiments.hpp"

namespace qedlat {

using nlohmann::json;

namespace {

const std::pair<Scenario, const char*> kNames[] = {
    {Scenario::FreeFermionDispersion, "FreeFermionDispersion"},
    {Scenario::VacuumSpectra, "VacuumSpectra"},
    {Scenario::ConservationLongRun, "ConservationLongRun"},
    {Scenario::SchwingerPairs, "SchwingerPairs"},
    {Scenario::VacuumKerr, "VacuumKerr"},
};

[[noreturn]] void bad(const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); }

void known_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where.empty() ? "config" : where, "must be an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

template <class T>
T read(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where.empty() ? key : where + "." + key, "wrong type");
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) bad(where.empty() ? key : where + "." + key, "required");
  return read<T>(j, key, where, T{});
}

bool is_zline(const LatticeSpec& s) { return s.n[0] == 1 && s.n[1] == 1; }

}  // namespace

std::string to_string(Scenario s) {
  for (auto& [k, n] : kNames)
    if (k == s) return n;
  return "unknown";
}

Scenario scenario_from_string(const std::string& s) {
  for (auto& [k, n] : kNames)
    if (s == n) return k;
  bad("scenario", "unknown scenario '" + s + "'");
}

void ScenarioConfig::validate() const {
  try {
    lattice.validate();
  } catch (const ConfigError& e) {
    bad("lattice", e.what());
  }
  try {
    physics.validate();
  } catch (const ConfigError& e) {
    bad("physics", e.what());
  }
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    bad("solver", e.what());
  }
  try {
    (void)Schedule::of_order(order);
  } catch (const ConfigError& e) {
    bad("integrator.order", e.what());
  }
  if (steps < 1) bad("steps", "must be >= 1");
  if (record_every < 1) bad("record_every", "must be >= 1");
  if (dhw_every < 0) bad("dhw_every", "must be >= 0");
  if (checkpoint_every < 0) bad("checkpoint_every", "must be >= 0");
  if (threads < 1) bad("threads", "must be >= 1");
  if (!(noise_sigma >= 0.0)) bad("noise_sigma", "must be >= 0");
  if (output.empty()) bad("output", "must not be empty");
  for (double f : field_es)
    if (!std::isfinite(f)) bad("initial_field_es", "must be finite");
  const bool ensemble = scenario == Scenario::SchwingerPairs || scenario == Scenario::VacuumKerr;
  if (ensemble) {
    if (members < 1) bad("ensemble.members", "must be >= 1");
    if (!(n_plus >= 0.0 && n_plus <= 1.0)) bad("ensemble.n_plus", "must lie in [0, 1]");
    if (!(n_minus >= 0.0 && n_minus <= 1.0)) bad("ensemble.n_minus", "must lie in [0, 1]");
  }
  // the absorbing update assumes one gauge sub-map per step
  if (lattice.boundary[2] == Boundary::MurSecondOrder && order > 2) bad("integrator.order", "must be 1 or 2 with \"mur\"");
  bool wants_es = false;
  for (double f : field_es) wants_es = wants_es || f != 0.0;
  if ((wants_es || scenario == Scenario::VacuumKerr) && physics.charge == 0.0)
    bad("physics.charge", "must be nonzero when fields are given in units of E_S");
  if ((wants_es || scenario == Scenario::VacuumKerr) && physics.mass <= 0.0)
    bad("physics.mass", "must be positive when fields are given in units of E_S");

  switch (scenario) {
    case Scenario::FreeFermionDispersion:
    case Scenario::VacuumSpectra:
      if (!is_zline(lattice)) bad("lattice.n", "spectra are taken on a 1 x 1 x N line");
      if (!(noise_sigma > 0.0)) bad("noise_sigma", "white-noise amplitude required");
      break;
    case Scenario::ConservationLongRun:
      if (!(noise_sigma > 0.0)) bad("noise_sigma", "white-noise amplitude required");
      break;
    case Scenario::SchwingerPairs:
      if (!is_zline(lattice)) bad("lattice.n", "the pair-creation run uses a 1 x 1 x N line");
      break;
    case Scenario::VacuumKerr: {
      if (!source) bad("source", "required for VacuumKerr");
      if (lattice.boundary[2] != Boundary::MurSecondOrder) bad("lattice.boundary_z", "VacuumKerr needs \"mur\"");
      const int nz = lattice.n[2];
      if (source->plane < 2 || source->plane > nz - 3) bad("source.plane", "must leave two layers to each face");
      if (source->target_plane <= source->plane || source->target_plane > nz - 3)
        bad("source.target_plane", "must lie downstream of the source plane, inside the domain");
      if (!(source->omega > 0.0)) bad("source.omega", "must be > 0");
      if (!(source->amplitude >= 0.0)) bad("source.amplitude", "must be >= 0");
      if (!(source->ramp_periods >= 0.0)) bad("source.ramp_periods", "must be >= 0");
      break;
    }
  }
}

ScenarioConfig scenario_from_json(const json& j) {
  known_keys(j, "", {"scenario", "lattice", "physics", "integrator", "solver", "ensemble", "noise_sigma",
                     "initial_field_es", "source", "steps", "record_every", "dhw_every", "checkpoint_every", "output",
                     "seed", "threads"});
  ScenarioConfig c;
  c.scenario = scenario_from_string(require<std::string>(j, "scenario", ""));

  const json& lat = j.contains("lattice") ? j.at("lattice") : json::object();
  known_keys(lat, "lattice", {"n", "spacing", "dt", "boundary_z"});
  c.lattice.n = require<std::array<int, 3>>(lat, "n", "lattice");
  c.lattice.spacing = require<std::array<double, 3>>(lat, "spacing", "lattice");
  c.lattice.dt = require<double>(lat, "dt", "lattice");
  const std::string bz = read<std::string>(lat, "boundary_z", "lattice", "periodic");
  if (bz == "periodic")
    c.lattice.boundary[2] = Boundary::Periodic;
  else if (bz == "mur")
    c.lattice.boundary[2] = Boundary::MurSecondOrder;
  else
    bad("lattice.boundary_z", "expected \"periodic\" or \"mur\"");

  const json& ph = j.contains("physics") ? j.at("physics") : json::object();
  known_keys(ph, "physics", {"mass", "charge"});
  c.physics.mass = require<double>(ph, "mass", "physics");
  c.physics.charge = require<double>(ph, "charge", "physics");

  if (j.contains("integrator")) {
    known_keys(j.at("integrator"), "integrator", {"order"});
    c.order = read<int>(j.at("integrator"), "order", "integrator", 2);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    known_keys(s, "solver", {"method", "rel_tolerance", "max_iterations", "restart", "fallback"});
    const std::string m = read<std::string>(s, "method", "solver", "bicgstab");
    if (m == "bicgstab")
      c.solver.method = KrylovMethod::BiCGStab;
    else if (m == "gmres")
      c.solver.method = KrylovMethod::GMRES;
    else
      bad("solver.method", "expected \"bicgstab\" or \"gmres\"");
    c.solver.rel_tolerance = read<double>(s, "rel_tolerance", "solver", c.solver.rel_tolerance);
    c.solver.max_iterations = read<int>(s, "max_iterations", "solver", c.solver.max_iterations);
    c.solver.restart = read<int>(s, "restart", "solver", c.solver.restart);
    c.solver.fallback = read<bool>(s, "fallback", "solver", c.solver.fallback);
  }
  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    known_keys(e, "ensemble", {"members", "n_plus", "n_minus"});
    c.members = read<int>(e, "members", "ensemble", c.members);
    c.n_plus = read<double>(e, "n_plus", "ensemble", 0.0);
    c.n_minus = read<double>(e, "n_minus", "ensemble", 0.0);
  }
  c.noise_sigma = read<double>(j, "noise_sigma", "", 0.0);
  c.field_es = read<std::array<double, 3>>(j, "initial_field_es", "", {0.0, 0.0, 0.0});
  if (j.contains("source")) {
    const json& s = j.at("source");
    known_keys(s, "source", {"omega", "polarization", "plane", "target_plane", "amplitude", "ramp_periods"});
    SourceConfig src;
    src.omega = require<double>(s, "omega", "source");
    src.polarization = read<double>(s, "polarization", "source", src.polarization);
    src.plane = read<int>(s, "plane", "source", src.plane);
    src.target_plane = read<int>(s, "target_plane", "source", src.target_plane);
    src.amplitude = read<double>(s, "amplitude", "source", src.amplitude);
    src.ramp_periods = read<double>(s, "ramp_periods", "source", src.ramp_periods);
    c.source = src;
  }
  c.steps = require<long>(j, "steps", "");
  c.record_every = read<int>(j, "record_every", "", 1);
  c.dhw_every = read<int>(j, "dhw_every", "", 0);
  c.checkpoint_every = read<long>(j, "checkpoint_every", "", 0);
  c.output = read<std::string>(j, "output", "", c.output);
  c.seed = read<std::uint64_t>(j, "seed", "", 1);
  c.threads = read<int>(j, "threads", "", 1);
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["lattice"] = {{"n", c.lattice.n},
                  {"spacing", c.lattice.spacing},
                  {"dt", c.lattice.dt},
                  {"boundary_z", c.lattice.boundary[2] == Boundary::MurSecondOrder ? "mur" : "periodic"}};
  j["physics"] = {{"mass", c.physics.mass}, {"charge", c.physics.charge}};
  j["integrator"] = {{"order", c.order}};
  j["solver"] = {{"method", c.solver.method == KrylovMethod::GMRES ? "gmres" : "bicgstab"},
                 {"rel_tolerance", c.solver.rel_tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"restart", c.solver.restart},
                 {"fallback", c.solver.fallback}};
  j["ensemble"] = {{"members", c.members}, {"n_plus", c.n_plus}, {"n_minus", c.n_minus}};
  j["noise_sigma"] = c.noise_sigma;
  j["initial_field_es"] = c.field_es;
  if (c.source)
    j["source"] = {{"omega", c.source->omega},
                   {"polarization", c.source->polarization},
                   {"plane", c.source->plane},
                   {"target_plane", c.source->target_plane},
                   {"amplitude", c.source->amplitude},
                   {"ramp_periods", c.source->ramp_periods}};
  j["steps"] = c.steps;
  j["record_every"] = c.record_every;
  j["dhw_every"] = c.dhw_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return scenario_from_json(j);
}

}  // namespace qedlat
