// Command-line front end: run, resume, dispersion, validate.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qedlat/experiments.hpp"

using namespace qedlat;
using nlohmann::json;

namespace {

struct Overrides {
  int threads = 0;
  std::string output;
  std::int64_t seed = -1;

  void apply(ScenarioConfig& c) const {
    if (threads > 0) c.threads = threads;
    if (!output.empty()) c.output = output;
    if (seed >= 0) c.seed = std::uint64_t(seed);
    c.validate();
  }
};

int cmd_run(const std::string& path, const Overrides& o) {
  ScenarioConfig c = load_scenario(path);
  o.apply(c);
  const RunSummary s = run_scenario(c);
  std::cout << s.values.dump(2) << '\n';
  return kExitOk;
}

int cmd_resume(const std::string& path, const Overrides& o) {
  Checkpoint ck = Checkpoint::load(path);
  if (o.seed >= 0) throw ConfigError("seed: cannot be changed when resuming");
  json j = json::parse(ck.text("config"));
  if (o.threads > 0) j["threads"] = o.threads;
  if (!o.output.empty()) j["output"] = o.output;
  ck.put("config", j.dump());
  auto run = ScenarioRun::resume(ck);
  std::cerr << "resuming at step " << run->step_index() << " of " << run->config().steps << '\n';
  const RunSummary s = continue_run(*run);
  std::cout << s.values.dump(2) << '\n';
  return kExitOk;
}

int cmd_dispersion(const std::string& path, const Overrides& o) {
  ScenarioConfig c = load_scenario(path);
  o.apply(c);
  const LatticeSpec& s = c.lattice;
  const Schedule sch = Schedule::of_order(c.order);
  const double m = c.physics.mass;
  std::vector<double> k, w0, w1, w2, w3, lc, fermion;
  LatticeSpec line = s;
  line.n = {1, 1, s.n[2]};
  for (int i = 0; i < s.n[2]; ++i) {
    const double kz = 2.0 * kPi * (i - s.n[2] / 2) / (s.n[2] * s.spacing[2]);
    const auto w = lattice_dispersion_massive_oracle({0.0, 0.0, kz}, m, s, sch);
    k.push_back(kz);
    w0.push_back(w[0]);
    w1.push_back(w[1]);
    w2.push_back(w[2]);
    w3.push_back(w[3]);
    lc.push_back(lattice_dispersion_massless({0.0, 0.0, kz}, s));
    fermion.push_back(benchmark_dispersions(kz, 0.0, m).fermion);
  }
  std::filesystem::create_directories(c.output);
  const std::string csv = (std::filesystem::path(c.output) / "dispersion.csv").string();
  write_series_csv(csv, {"k", "omega_0", "omega_1", "omega_2", "omega_3", "light_cone_lattice", "fermion_continuum"},
                   {k, w0, w1, w2, w3, lc, fermion});
  const BranchMinima zmin = dispersion_minima(line, m, sch);
  const BranchMinima bz = dispersion_minima(s, m, sch);
  json out{{"file", csv}};
  for (int b = 0; b < 4; ++b) {
    out["minima_z_line"].push_back(zmin.at[b].size());
    out["minima_lattice"].push_back(bz.at[b].size());
    json where = json::array();
    for (const Vec3& q : bz.at[b]) where.push_back(q);
    out["minima_lattice_at"].push_back(where);
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& path, const Overrides& o) {
  ScenarioConfig c = load_scenario(path);
  o.apply(c);
  std::cout << scenario_to_json(c).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice Dirac-Maxwell scenario runner"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--threads", o.threads, "worker threads for the ensemble")->check(CLI::PositiveNumber);
  app.add_option("--output", o.output, "output directory");
  app.add_option("--seed", o.seed, "random seed")->check(CLI::NonNegativeNumber);

  std::string target;
  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", target)->required();
  auto* resume = app.add_subcommand("resume", "continue from a checkpoint");
  resume->add_option("checkpoint", target)->required();
  auto* disp = app.add_subcommand("dispersion", "oracle dispersion sweep for a config's lattice");
  disp->add_option("config", target)->required();
  auto* val = app.add_subcommand("validate", "check a config and print it with defaults filled in");
  val->add_option("config", target)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(target, o);
    if (*resume) return cmd_resume(target, o);
    if (*disp) return cmd_dispersion(target, o);
    if (*val) return cmd_validate(target, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonConvergence& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << e.residual() << ", " << e.iterations()
              << " iterations)\n";
    return kExitSolver;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitIo;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}
