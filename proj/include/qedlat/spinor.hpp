#pragma once

#include <span>
#include <vector>

#include "qedlat/lattice.hpp"
#include "qedlat/units.hpp"

namespace qedlat {

// Bispinor as eight real lattices. Component c (0..3) stands for psi_{c+1}:
// psi_1 at the vertex, psi_2 at the cell centre, psi_3 on the z edge,
// psi_4 on the xy face, all addressed by the base vertex J.
class SpinorField {
 public:
  SpinorField() = default;
  explicit SpinorField(std::size_t sites) : sites_(sites), data_(8 * sites, 0.0) {}

  std::size_t sites() const { return sites_; }
  std::span<double> re(int c) { return {data_.data() + (2 * c) * sites_, sites_}; }
  std::span<double> im(int c) { return {data_.data() + (2 * c + 1) * sites_, sites_}; }
  std::span<const double> re(int c) const { return {data_.data() + (2 * c) * sites_, sites_}; }
  std::span<const double> im(int c) const { return {data_.data() + (2 * c + 1) * sites_, sites_}; }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // sum over sites of psi^+ psi dV with psi = (psi_R + i psi_I) / sqrt(2 hbar)
  double probability(const LatticeSpec& spec) const;

 private:
  std::size_t sites_ = 0;
  std::vector<double> data_;
};

struct GaugeState {
  EdgeField A;
  EdgeField Y;
  VertexField phi;

  GaugeState() = default;
  explicit GaugeState(std::size_t sites) : A(sites), Y(sites), phi(sites) {}
};

struct FieldState {
  SpinorField psi;
  GaugeState gauge;
  double time = 0.0;
  long step = 0;

  FieldState() = default;
  explicit FieldState(std::size_t sites) : psi(sites), gauge(sites) {}
};

// cos and sin of the link phase (e / hbar c) A_d Delta_d on every edge.
class WilsonLineCache {
 public:
  WilsonLineCache() = default;
  WilsonLineCache(const EdgeField& A, double coupling, const LatticeSpec& spec) { rebuild(A, coupling, spec); }

  void rebuild(const EdgeField& A, double coupling, const LatticeSpec& spec);
  std::span<const double> cos(int axis) const { return cos_[axis]; }
  std::span<const double> sin(int axis) const { return sin_[axis]; }

 private:
  EdgeField cos_, sin_;
};

enum class Derivative { Pullback, Pushforward };

// Component/axis pairings used by the lattice Dirac operator.
bool derivative_allowed(int component, int axis, Derivative kind);

struct ComplexLattice {
  std::vector<double> re, im;
};

// Gauge-covariant difference of one spinor component, already divided by
// sqrt(2 hbar) Delta. Pull-back: psi_{J+d} e^{-i theta_{d,J}} - psi_J.
// Push-forward: psi_J - psi_{J-d} e^{+i theta_{d,J-d}}.
// Throws std::invalid_argument on a pairing the operator never uses.
ComplexLattice covariant_derivative(const SpinorField& psi, int component, int axis, Derivative kind,
                                    const WilsonLineCache& lines, const LatticeSpec& spec);

// A -> A + grad theta, psi_J -> psi_J exp(i e theta_J / hbar c) for all four
// components stored at J.
void gauge_transform(FieldState& state, const VertexField& theta, double coupling, const LatticeSpec& spec);

}  // namespace qedlat
