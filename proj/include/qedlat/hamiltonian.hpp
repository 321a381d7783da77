#pragma once

#include <span>

#include "qedlat/lattice.hpp"
#include "qedlat/spinor.hpp"
#include "qedlat/units.hpp"

namespace qedlat {

// The linear map Xi of the kinetic subsystem: d/dt (psi_R, psi_I) under H1 at
// fixed A. Acts on the flat 8N layout of SpinorField.
class DiracOperator {
 public:
  explicit DiracOperator(const LatticeSpec& spec);

  void bind(const WilsonLineCache& lines) { lines_ = &lines; }
  std::size_t dim() const { return 8 * spec_.sites(); }
  const LatticeSpec& spec() const { return spec_; }
  const Neighbours& neighbours() const { return nb_; }

  void apply(std::span<const double> in, std::span<double> out) const;

 private:
  LatticeSpec spec_;
  Neighbours nb_;
  const WilsonLineCache* lines_ = nullptr;
};

// Kinetic energy assembled from the covariant differences, summed as
// -i hbar c dV psi^+ (alpha . D) psi.
double eval_H1(const SpinorField& psi, const WilsonLineCache& lines, const LatticeSpec& spec);
// Same energy from the generator: (dV/2) sum (psi_I Xi_R - psi_R Xi_I).
double eval_H1_form(const SpinorField& psi, const DiracOperator& op);
double eval_H2(const SpinorField& psi, const VertexField& phi, const Physics& phys, const LatticeSpec& spec);
double eval_H3(const GaugeState& gauge, const LatticeSpec& spec);

// Symmetric bilinear energy of two spinors for H1 + H2; equals H1 + H2 of psi when a = b = psi.
double fermion_bilinear_energy(const SpinorField& a, const SpinorField& b, const DiracOperator& op,
                               const VertexField& phi, const Physics& phys);

// Edge bilinear of the current with a in the psi_1/psi_2 slots and b in the
// psi_3/psi_4 slots. out += scale * B(a, b).
void current_bilinear(const SpinorField& a, const SpinorField& b, const WilsonLineCache& lines,
                      const LatticeSpec& spec, double scale, EdgeField& out);

// dY/dt from the kinetic subsystem, (e / hbar) B(psi, psi).
EdgeField current_increment(const SpinorField& psi, const WilsonLineCache& lines, const Physics& phys,
                            const LatticeSpec& spec);

// e psi^+ psi per vertex label
VertexField charge_density(const SpinorField& psi, const Physics& phys, const LatticeSpec& spec);
double net_charge(const SpinorField& psi, const Physics& phys, const LatticeSpec& spec);

// c div Y + rho; constant in time for the coupled flow
VertexField gauss_residual(const EdgeField& Y, const VertexField& rho, const LatticeSpec& spec);

}  // namespace qedlat
