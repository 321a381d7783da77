#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qedlat/integrator.hpp"
#include "qedlat/symbol.hpp"

namespace qedlat {

// Occupation of a lattice momentum mode, in [0, 1].
using Occupation = std::function<double(const Vec3& k)>;

struct EnsembleConfig {
  int members = 128;  // number of (M, F) pairs
  Occupation n_plus;  // electrons; empty means 0
  Occupation n_minus; // positrons; empty means 0
  std::uint64_t seed = 1;
  int threads = 1;

  static Occupation constant(double n);
  void validate() const;
};

// Eigenspinors written exactly as the closed-form free-particle spinors with
// Pauli basis U_up = (1, 0), U_down = (0, 1). s = 0 is spin +1/2, s = 1 is -1/2.
Eigen::Vector4cd analytic_u(int s, const Vec3& p, double mass);
Eigen::Vector4cd analytic_v(int s, const Vec3& p, double mass);

// Per lattice mode: positive-energy spinors u_s and negative-energy spinors w_s
// of the lattice Hamiltonian, w_s playing the role of v_s(-p). Built by projecting
// the closed-form spinors at the lattice momentum onto the exact lattice
// eigenspaces and orthonormalising.
struct ModeSpinors {
  Vec3 k{};
  Eigen::Vector4cd u[2], w[2];
  double e_pos[2]{}, e_neg[2]{};  // u^+ h u and w^+ h w
};

class EigenspinorTable {
 public:
  EigenspinorTable() = default;
  EigenspinorTable(double mass, const LatticeSpec& spec);
  const ModeSpinors& operator[](std::size_t mode) const { return modes_[mode]; }
  std::size_t size() const { return modes_.size(); }
  double mass() const { return mass_; }

 private:
  double mass_ = 0.0;
  std::vector<ModeSpinors> modes_;
};

// Spectral projector onto the positive (sign = +1) or negative eigenspace of h.
Eigen::Matrix4cd energy_projector(const Eigen::Matrix4cd& h, int sign);

// Stochastic amplitudes of one member: |xi|^2 = V |1 - 2 n+|, |eta|^2 = V |1 - 2 n-|,
// independent uniform phases. The F copy uses xi_sign * xi and -eta_sign * eta, so
// that the M/F cross moment carries the signed factor (1 - 2 n).
struct ModeAmplitudes {
  std::vector<std::complex<double>> xi[2], eta[2];
  std::vector<signed char> xi_sign, eta_sign;
};

ModeAmplitudes draw_amplitudes(const EnsembleConfig& cfg, const EigenspinorTable& table, const LatticeSpec& spec,
                               int member);

struct StochasticPair {
  SpinorField M, F;
};

// Real fields of the pair: psi(x) = (1/V) sum_k (xi u + eta w) e^{ik(x + offset)} / sqrt(2).
StochasticPair synthesize(const ModeAmplitudes& amp, const EigenspinorTable& table, const LatticeSpec& spec);

// Normal-ordering references, frozen at t = 0.
struct EnsembleReference {
  VertexField rho;     // local raw charge density
  Vec3 current{};      // spatial mean of the raw current
  double energy = 0.0; // closed-form vacuum energy of the sampled mode set
  bool frozen = false;
};

struct Ensemble {
  std::vector<StochasticPair> pairs;
  EnsembleReference ref;
};

Ensemble sample_background(const EnsembleConfig& cfg, const EigenspinorTable& table, const LatticeSpec& spec);

// Vacuum energy -1/2 sum_k sum_s (e_pos + |e_neg|) of the mode set.
double vacuum_energy(const EigenspinorTable& table);

// -(e / 2 hbar) < B(M, F) + B(F, M) >, before reference subtraction. Deterministic
// fixed-block reduction over members, independent of the thread count.
void raw_ensemble_current(const Ensemble& ens, const WilsonLineCache& lines, const LatticeSpec& spec,
                          const Physics& phys, int threads, EdgeField& out);
// raw current minus the frozen reference
void ensemble_current(const Ensemble& ens, const WilsonLineCache& lines, const LatticeSpec& spec,
                      const Physics& phys, int threads, EdgeField& out);

// -(e / 2 hbar) < M_R F_R + M_I F_I summed over components > per site
VertexField raw_ensemble_charge_density(const Ensemble& ens, const Physics& phys, const LatticeSpec& spec);
// raw density minus the frozen local reference
VertexField ensemble_charge_density(const Ensemble& ens, const Physics& phys, const LatticeSpec& spec);
// total raw charge; the vacuum value of a fixed-amplitude sample is exactly zero
double ensemble_net_charge(const Ensemble& ens, const Physics& phys, const LatticeSpec& spec);

void freeze_reference(Ensemble& ens, const GaugeState& gauge, const EigenspinorTable& table,
                      const LatticeSpec& spec, const Physics& phys, int threads = 1);

struct EnsembleEnergy {
  double fermion = 0.0; // normal ordered: -<E(M, F)> - E_vac + dV J_ref . sum A
  double gauge = 0.0;
  double total = 0.0;
};

EnsembleEnergy ensemble_energy(const Ensemble& ens, const GaugeState& gauge, const LatticeSpec& spec,
                               const Physics& phys);

// < sum |M|^2 + |F|^2 > dV / 2 per member, averaged; conserved per member
double ensemble_probability(const Ensemble& ens, const LatticeSpec& spec);

class MemberSolveError : public NonConvergence {
 public:
  MemberSolveError(const NonConvergence& e, int member, bool female)
      : NonConvergence(std::string(e.what()) + " (member " + std::to_string(member) + (female ? " F" : " M") + ")",
                       e.residual(), e.iterations(), e.best_iterate()),
        member_(member) {}
  int member() const { return member_; }

 private:
  int member_;
};

// Every member advances under the same sub-maps; the gauge momentum update
// uses the normal-ordered ensemble current at the kinetic midpoint.
class EnsembleSector : public FermionSector {
 public:
  EnsembleSector(Ensemble& ens, const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg,
                 int threads = 1);
  void mass_step(const VertexField& phi, double dt) override;
  SolveStats dirac_step(const WilsonLineCache& lines, EdgeField& Y, double dt) override;

 private:
  Ensemble& ens_;
  LatticeSpec spec_;
  Physics phys_;
  SolverConfig cfg_;
  int threads_;
  std::vector<DiracCayley> workers_;
  std::vector<SpinorField> mid_m_, mid_f_;
  std::vector<EdgeField> block_sum_;
};

// Runs fn(block) for block = 0..blocks-1 on up to `threads` workers; each worker
// w handles blocks w, w + T, ... so results only depend on the per-block work.
void parallel_blocks(int blocks, int threads, const std::function<void(int block, int worker)>& fn);

inline constexpr int kMembersPerBlock = 4;

}  // namespace qedlat
