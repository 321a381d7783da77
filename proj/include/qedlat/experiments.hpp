#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qedlat/diagnostics.hpp"
#include "qedlat/ensemble.hpp"
#include "qedlat/integrator.hpp"

namespace qedlat {

enum class Scenario { FreeFermionDispersion, VacuumSpectra, ConservationLongRun, SchwingerPairs, VacuumKerr };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct SourceConfig {
  double omega = 0.0;              // angular frequency of the incident wave
  double polarization = 0.0;       // angle of E in the xy plane, radians
  int plane = 5;                   // first total-field plane
  int target_plane = 15;           // probe plane downstream
  double amplitude = 1e-3;         // peak E in units of E_S
  double ramp_periods = 1.0;       // sin^2 switch-on length
};

// Every key of the JSON form is listed in README.md.
struct ScenarioConfig {
  Scenario scenario = Scenario::FreeFermionDispersion;
  LatticeSpec lattice;
  Physics physics;
  int order = 2;
  SolverConfig solver;
  int members = 128;
  double n_plus = 0.0, n_minus = 0.0;
  double noise_sigma = 0.0;          // white noise on the eight real spinor lattices
  std::array<double, 3> field_es{};  // initial E in units of E_S; Y = -E / 4 pi c
  std::optional<SourceConfig> source;
  long steps = 0;
  int record_every = 1;
  int dhw_every = 0;                 // 0: no pseudo-distribution read-out
  long checkpoint_every = 0;         // 0: no periodic checkpoints
  std::string output = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
  double critical_field() const { return physics.critical_field(); }
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& c);
ScenarioConfig load_scenario(const std::string& path);

// Second-order Mur absorbing condition for the transverse A on the two z faces.
// Keeps the boundary and first interior planes at the two previous levels. The
// face values are prescribed inside the gauge Cayley solve (GaugeClamp), so the
// implicit interior update sees the absorbing value rather than a free end.
class MurBoundaryZ {
 public:
  MurBoundaryZ(const LatticeSpec& spec);
  // call once with the initial fields
  void prime(const GaugeState& g);
  // face values at the new level; trial supplies the new first interior plane
  // (extrapolated from the history when null)
  void clamp(const GaugeState& before, const GaugeState* trial, double dt, GaugeClamp& out) const;
  // after every full step
  void commit(const GaugeState& g);
  // history for checkpoints
  std::vector<double> save() const;
  void restore(const std::vector<double>& v);

 private:
  LatticeSpec spec_;
  std::size_t plane_ = 0;
  // [level][face][component] planes; level 0 = n - 1, level 1 = n
  std::vector<double> hist_;
  int levels_ = 0;
  double& h(int level, int face, int layer, int comp, std::size_t i);
  double h(int level, int face, int layer, int comp, std::size_t i) const;
};

// Total-field / scattered-field injection of a linearly polarised plane wave
// travelling along +z, as extra dY/dt on the two planes next to the source plane.
class TfsfSource {
 public:
  TfsfSource(const LatticeSpec& spec, const SourceConfig& src, double critical_field);
  // incident A at plane z index kz and time t
  Vec3 incident(int kz, double t) const;
  void forcing(double t, EdgeField& out) const;
  double wavenumber() const { return k_; }

 private:
  LatticeSpec spec_;
  SourceConfig src_;
  double a0_ = 0.0, k_ = 0.0, vphase_ = 1.0;
  Vec3 pol_{};
};

// Sectioned little-endian binary with magic, version, and a CRC-32 per section.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  std::map<std::string, std::vector<std::uint8_t>> sections;

  void put(const std::string& name, const std::vector<double>& v);
  void put(const std::string& name, const std::string& s);
  std::vector<double> doubles(const std::string& name) const;
  std::string text(const std::string& name) const;
  bool has(const std::string& name) const { return sections.count(name) != 0; }

  void save(const std::string& path) const;
  // validates every section before returning; nothing is returned on failure
  static Checkpoint load(const std::string& path);
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Observables and artifacts of a finished (or interrupted) run.
struct RunSummary {
  nlohmann::json values;
  std::vector<std::string> files;
};

// One scenario, stepped in place. Single-field scenarios evolve one spinor;
// ensemble scenarios evolve the stochastic pairs.
class ScenarioRun {
 public:
  explicit ScenarioRun(const ScenarioConfig& cfg);
  ~ScenarioRun();

  const ScenarioConfig& config() const { return cfg_; }
  long step_index() const { return step_; }
  double time() const { return time_; }

  // advance until step index `until` (clamped to cfg.steps)
  void advance(long until);
  bool finished() const { return step_ >= cfg_.steps; }

  Checkpoint checkpoint() const;
  static std::unique_ptr<ScenarioRun> resume(const Checkpoint& ck);

  // analysis of what has been recorded so far; writes files when write = true
  RunSummary summarize(bool write) const;

  // recorded series by name
  const std::map<std::string, std::vector<double>>& series() const { return series_; }
  const GaugeState& gauge() const { return gauge_; }
  const SpinorField& spinor() const { return psi_; }
  const Ensemble& ensemble() const { return ens_; }

 private:
  ScenarioRun(const ScenarioConfig& cfg, bool initialise);
  void build(bool initialise);
  void record();
  void record_dhw();
  double energy_total() const;

  ScenarioConfig cfg_;
  long step_ = 0;
  double time_ = 0.0;

  GaugeState gauge_;
  SpinorField psi_;
  Ensemble ens_;
  std::unique_ptr<EigenspinorTable> table_;
  std::unique_ptr<Integrator> integ_;
  std::unique_ptr<FermionSector> sector_;
  std::unique_ptr<MurBoundaryZ> mur_;
  std::unique_ptr<TfsfSource> tfsf_;
  std::unique_ptr<DhwAnalyzer> dhw_;
  std::vector<ZLineRecorder> lines_;
  std::vector<std::string> line_names_;
  std::map<std::string, std::vector<double>> series_;
};

// Whole run from config to files, with periodic checkpoints in the output directory.
RunSummary run_scenario(const ScenarioConfig& cfg);
// Same for a run restored from a checkpoint.
RunSummary continue_run(ScenarioRun& run);

// Axis ratio minor / major of a 2-D trace from its covariance.
double trace_axis_ratio(const std::vector<double>& x, const std::vector<double>& y);

// Process exit codes of the command-line front end.
enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitIo = 4 };

}  // namespace qedlat
