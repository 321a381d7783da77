#include "qedlat/spinor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qedlat {

double SpinorField::probability(const LatticeSpec& spec) const {
  return sum_squares(data_) * spec.cell_volume() / (2.0 * kHbar);
}

void WilsonLineCache::rebuild(const EdgeField& A, double coupling, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  if (cos_.sites() != N) {
    cos_ = EdgeField(N);
    sin_ = EdgeField(N);
  }
  for (int a = 0; a < 3; ++a) {
    const double s = coupling * spec.spacing[a];
    auto src = A[a];
    auto c = cos_[a];
    auto sn = sin_[a];
    for (std::size_t J = 0; J < N; ++J) {
      const double th = s * src[J];
      c[J] = std::cos(th);
      sn[J] = std::sin(th);
    }
  }
}

bool derivative_allowed(int component, int axis, Derivative kind) {
  if (component < 0 || component > 3 || axis < 0 || axis > 2) return false;
  const bool transverse = axis < 2;
  if (kind == Derivative::Pullback) {
    switch (component) {
      case 0: return true;
      case 2: return transverse;
      case 3: return !transverse;
      default: return false;
    }
  }
  switch (component) {
    case 1: return true;
    case 3: return transverse;
    case 2: return !transverse;
    default: return false;
  }
}

ComplexLattice covariant_derivative(const SpinorField& psi, int component, int axis, Derivative kind,
                                    const WilsonLineCache& lines, const LatticeSpec& spec) {
  if (!derivative_allowed(component, axis, kind))
    throw std::invalid_argument("covariant derivative not defined for component " + std::to_string(component + 1) +
                                " along axis " + std::to_string(axis));
  const std::size_t N = spec.sites();
  const Neighbours nb(spec);
  const double scale = 1.0 / (std::sqrt(2.0 * kHbar) * spec.spacing[axis]);
  auto r = psi.re(component), i = psi.im(component);
  auto cs = lines.cos(axis), sn = lines.sin(axis);
  ComplexLattice out{std::vector<double>(N), std::vector<double>(N)};
  for (std::size_t J = 0; J < N; ++J) {
    if (kind == Derivative::Pullback) {
      const auto P = nb.up(axis, J);
      const double ur = r[P] * cs[J] + i[P] * sn[J];
      const double ui = i[P] * cs[J] - r[P] * sn[J];
      out.re[J] = (ur - r[J]) * scale;
      out.im[J] = (ui - i[J]) * scale;
    } else {
      const auto M = nb.down(axis, J);
      const double wr = r[M] * cs[M] - i[M] * sn[M];
      const double wi = i[M] * cs[M] + r[M] * sn[M];
      out.re[J] = (r[J] - wr) * scale;
      out.im[J] = (i[J] - wi) * scale;
    }
  }
  return out;
}

void gauge_transform(FieldState& state, const VertexField& theta, double coupling, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  const EdgeField g = grad(theta, spec);
  for (int a = 0; a < 3; ++a)
    for (std::size_t J = 0; J < N; ++J) state.gauge.A[a][J] += g[a][J];
  auto th = theta[0];
  for (std::size_t J = 0; J < N; ++J) {
    const double c = std::cos(coupling * th[J]);
    const double s = std::sin(coupling * th[J]);
    for (int comp = 0; comp < 4; ++comp) {
      double& r = state.psi.re(comp)[J];
      double& i = state.psi.im(comp)[J];
      const double nr = r * c - i * s;
      const double ni = r * s + i * c;
      r = nr;
      i = ni;
    }
  }
}

}  // namespace qedlat
