#pragma once

#include <array>

#include <Eigen/Dense>

#include "qedlat/lattice.hpp"
#include "qedlat/units.hpp"

namespace qedlat {

using Vec3 = std::array<double, 3>;

// Position of each component inside the unit cell, in units of the spacing:
// vertex, cell centre, z edge midpoint, xy face centre.
inline constexpr std::array<Vec3, 4> kComponentOffset{{{0.0, 0.0, 0.0}, {0.5, 0.5, 0.5}, {0.0, 0.0, 0.5}, {0.5, 0.5, 0.0}}};

// Plane waves psi_c(J) = a_c exp(i k.(x_J + offset_c Delta)) are mapped by the
// kinetic generator to G(k) a. `shift` is the uniform link phase (e/hbar c) A_d
// per axis, which moves the derivative momentum but not the offsets.
Eigen::Matrix4cd kinetic_symbol(const Vec3& k, const LatticeSpec& spec, const Vec3& shift = {0.0, 0.0, 0.0});

// Hermitian one-particle Hamiltonian i hbar G(k) + beta m c^2.
Eigen::Matrix4cd dirac_symbol(const Vec3& k, double mass, const LatticeSpec& spec,
                              const Vec3& shift = {0.0, 0.0, 0.0});

// Centred lattice momentum of FFT index m along each axis.
Vec3 grid_momentum(const LatticeSpec& spec, std::size_t J);

// 2 sin(k Delta / 2) / Delta
double lattice_momentum(double k, double spacing);

}  // namespace qedlat
