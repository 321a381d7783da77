#include "qedlat/symbol.hpp"

#include <cmath>
#include <complex>

#include "qedlat/spinor.hpp"

namespace qedlat {

namespace {

using cd = std::complex<double>;

struct Term {
  int row, comp, axis;
  cd coeff;
};

// rows of the kinetic operator K with dpsi/dt = -c K psi
constexpr cd I1{0.0, 1.0};
const Term kTerms[] = {
    {0, 2, 2, 1.0}, {0, 3, 0, 1.0}, {0, 3, 1, -I1},  //
    {1, 2, 0, 1.0}, {1, 2, 1, I1},  {1, 3, 2, -1.0}, //
    {2, 0, 2, 1.0}, {2, 1, 0, 1.0}, {2, 1, 1, -I1},  //
    {3, 0, 0, 1.0}, {3, 0, 1, I1},  {3, 1, 2, -1.0},
};

}  // namespace

double lattice_momentum(double k, double spacing) { return 2.0 * std::sin(0.5 * k * spacing) / spacing; }

Eigen::Matrix4cd kinetic_symbol(const Vec3& k, const LatticeSpec& spec, const Vec3& shift) {
  Eigen::Matrix4cd G = Eigen::Matrix4cd::Zero();
  for (const Term& t : kTerms) {
    const double d = spec.spacing[t.axis];
    const double th = (k[t.axis] - shift[t.axis]) * d;
    const cd g = derivative_allowed(t.comp, t.axis, Derivative::Pullback) ? (std::exp(I1 * th) - 1.0) / d
                                                                           : (1.0 - std::exp(-I1 * th)) / d;
    double ph = 0.0;
    for (int a = 0; a < 3; ++a)
      ph += k[a] * spec.spacing[a] * (kComponentOffset[t.comp][a] - kComponentOffset[t.row][a]);
    G(t.row, t.comp) += -kC * t.coeff * std::exp(I1 * ph) * g;
  }
  return G;
}

Eigen::Matrix4cd dirac_symbol(const Vec3& k, double mass, const LatticeSpec& spec, const Vec3& shift) {
  Eigen::Matrix4cd h = I1 * kHbar * kinetic_symbol(k, spec, shift);
  const double mc2 = mass * kC * kC;
  h(0, 0) += mc2;
  h(1, 1) += mc2;
  h(2, 2) -= mc2;
  h(3, 3) -= mc2;
  return h;
}

Vec3 grid_momentum(const LatticeSpec& spec, std::size_t J) {
  const auto c = spec.coords(J);
  Vec3 k{};
  for (int a = 0; a < 3; ++a) {
    const int n = spec.n[a];
    const int m = c[a] <= n / 2 ? c[a] : c[a] - n;
    k[a] = 2.0 * kPi * m / (n * spec.spacing[a]);
  }
  return k;
}

}  // namespace qedlat
