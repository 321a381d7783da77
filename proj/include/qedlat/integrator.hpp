#pragma once

#include <functional>
#include <vector>

#include "qedlat/hamiltonian.hpp"
#include "qedlat/krylov.hpp"
#include "qedlat/lattice.hpp"
#include "qedlat/spinor.hpp"

namespace qedlat {

enum class Substep { Mass, Dirac, Gauge };

struct Stage {
  Substep kind;
  double fraction;
};

// Composition of the three exactly solvable (or Cayley) sub-maps.
// Order 1: mass, kinetic, gauge. Order 2: symmetric Strang. Order 2l+2:
// triple jump a_l, b_l, a_l over order 2l.
class Schedule {
 public:
  static Schedule of_order(int order);

  int order() const { return order_; }
  const std::vector<Stage>& stages() const { return stages_; }
  // weights of the second-order building blocks (3^l of them, summing to 1)
  const std::vector<double>& weights() const { return weights_; }

  static double jump_a(int l);
  static double jump_b(int l);

 private:
  int order_ = 2;
  std::vector<Stage> stages_;
  std::vector<double> weights_;
};

// Cayley step of the kinetic flow for one spinor.
class DiracCayley {
 public:
  DiracCayley(const LatticeSpec& spec, const SolverConfig& cfg);
  // psi <- (I - Xi dt/2)^{-1} (I + Xi dt/2) psi
  SolveStats advance(SpinorField& psi, const WilsonLineCache& lines, double dt);
  const DiracOperator& op() const { return op_; }

 private:
  DiracOperator op_;
  SolverConfig cfg_;
  std::vector<double> rhs_, x_, tmp_;
};

// Edges whose A and Y at the end of a gauge sub-map are prescribed; they enter
// their neighbours' equations but are not evolved. Indices are flat (3N layout).
struct GaugeClamp {
  std::vector<std::size_t> edges;
  std::vector<double> a, y;
};

// Cayley step of the free gauge flow dA/dt = 4 pi c^2 Y, dY/dt = -curlT curl A / 4 pi,
// followed by the exact drift -c grad phi dt on A.
class MaxwellCayley {
 public:
  MaxwellCayley(const LatticeSpec& spec, const SolverConfig& cfg);
  // forcing, when given, is an extra dY/dt held fixed over the step
  SolveStats advance(GaugeState& g, double dt, const EdgeField* forcing = nullptr, const GaugeClamp* clamp = nullptr);
  LinearOperator system(double dt) const;

 private:
  LatticeSpec spec_;
  Neighbours nb_;
  SolverConfig cfg_;
  std::vector<double> rhs_, x_;
  mutable FaceField face_;
  mutable EdgeField ctc_;
  mutable EdgeField a_view_;
  const GaugeClamp* clamp_ = nullptr;
};

// psi rotated by (e phi +- m c^2) dt / hbar; + for psi_1, psi_2, - for psi_3, psi_4
void mass_rotation(SpinorField& psi, const VertexField& phi, const Physics& phys, double dt);

// Fermionic degrees of freedom driven by the composed scheme.
class FermionSector {
 public:
  virtual ~FermionSector() = default;
  virtual void mass_step(const VertexField& phi, double dt) = 0;
  // Cayley step of every spinor; adds dt * current at the midpoint to Y
  virtual SolveStats dirac_step(const WilsonLineCache& lines, EdgeField& Y, double dt) = 0;
};

class SingleFermion : public FermionSector {
 public:
  SingleFermion(SpinorField& psi, const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg);
  void mass_step(const VertexField& phi, double dt) override;
  SolveStats dirac_step(const WilsonLineCache& lines, EdgeField& Y, double dt) override;

 private:
  SpinorField& psi_;
  LatticeSpec spec_;
  Physics phys_;
  DiracCayley cayley_;
  SpinorField mid_;
};

struct StepHooks {
  // extra dY/dt applied inside the gauge sub-map, evaluated at the sub-step midpoint time
  std::function<void(double t_mid, EdgeField& forcing)> gauge_forcing;
  // prescribed edges of each gauge sub-map. First pass: trial = nullptr; later
  // passes see the previous result, so a condition that depends on the new
  // interior values converges by fixed-point iteration.
  std::function<void(const GaugeState& before, const GaugeState* trial, double dt, GaugeClamp& clamp)> gauge_clamp;
  int clamp_passes = 3;
  // called once after every full step
  std::function<void(GaugeState& g, double t_new)> after_step;
};

class Integrator {
 public:
  Integrator(const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg, int order);

  const Schedule& schedule() const { return schedule_; }
  StepHooks& hooks() { return hooks_; }

  // one full step of length dt starting at time t
  void step(FermionSector& fermions, GaugeState& gauge, double t, double dt);

  void step_MM(FermionSector& fermions, const GaugeState& gauge, double dt);
  SolveStats step_MD(FermionSector& fermions, GaugeState& gauge, double dt);
  SolveStats step_MG(GaugeState& gauge, double t, double dt);

  int last_iterations() const { return last_iterations_; }

 private:
  LatticeSpec spec_;
  Physics phys_;
  SolverConfig cfg_;
  Schedule schedule_;
  MaxwellCayley maxwell_;
  WilsonLineCache lines_;
  StepHooks hooks_;
  EdgeField forcing_;
  int last_iterations_ = 0;
};

// Single classical spinor coupled to the gauge field.
class Stepper {
 public:
  Stepper(FieldState& state, const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg, int order);
  void step();
  Integrator& integrator() { return integ_; }
  SingleFermion& fermions() { return sector_; }

 private:
  FieldState& state_;
  LatticeSpec spec_;
  Integrator integ_;
  SingleFermion sector_;
};

}  // namespace qedlat
