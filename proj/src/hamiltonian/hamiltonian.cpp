#include "qedlat/hamiltonian.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qedlat {

DiracOperator::DiracOperator(const LatticeSpec& spec) : spec_(spec), nb_(spec) {}

void DiracOperator::apply(std::span<const double> in, std::span<double> out) const {
  if (!lines_) throw std::logic_error("DiracOperator used before binding Wilson lines");
  const std::size_t N = spec_.sites();
  if (in.size() != 8 * N || out.size() != 8 * N) throw std::invalid_argument("DiracOperator: size mismatch");
  const double ix = 1.0 / spec_.spacing[0], iy = 1.0 / spec_.spacing[1], iz = 1.0 / spec_.spacing[2];
  const double* r1 = in.data();
  const double* i1 = r1 + N;
  const double* r2 = i1 + N;
  const double* i2 = r2 + N;
  const double* r3 = i2 + N;
  const double* i3 = r3 + N;
  const double* r4 = i3 + N;
  const double* i4 = r4 + N;
  double* o = out.data();
  const double* cx = lines_->cos(0).data();
  const double* sx = lines_->sin(0).data();
  const double* cy = lines_->cos(1).data();
  const double* sy = lines_->sin(1).data();
  const double* cz = lines_->cos(2).data();
  const double* sz = lines_->sin(2).data();

  for (std::size_t J = 0; J < N; ++J) {
    const auto xp = nb_.up(0, J), yp = nb_.up(1, J), zp = nb_.up(2, J);
    const auto xm = nb_.down(0, J), ym = nb_.down(1, J), zm = nb_.down(2, J);

    // pull-back: (psi_{J+d} e^{-i th_J} - psi_J) / D
    auto pull = [&](const double* r, const double* i, std::uint32_t P, double c, double s, double inv,
                    double& dr, double& di) {
      dr = (r[P] * c + i[P] * s - r[J]) * inv;
      di = (i[P] * c - r[P] * s - i[J]) * inv;
    };
    // push-forward: (psi_J - psi_{J-d} e^{+i th_{J-d}}) / D
    auto push = [&](const double* r, const double* i, std::uint32_t M, double c, double s, double inv,
                    double& dr, double& di) {
      dr = (r[J] - (r[M] * c - i[M] * s)) * inv;
      di = (i[J] - (i[M] * c + r[M] * s)) * inv;
    };

    double ar, ai, br, bi, qr, qi;

    // psi_1: D>_z psi_3 + (D>_x - i D>_y) psi_4
    push(r3, i3, zm, cz[zm], sz[zm], iz, ar, ai);
    push(r4, i4, xm, cx[xm], sx[xm], ix, br, bi);
    push(r4, i4, ym, cy[ym], sy[ym], iy, qr, qi);
    o[J] = -kC * (ar + br + qi);
    o[N + J] = -kC * (ai + bi - qr);

    // psi_2: (D<_x + i D<_y) psi_3 - D<_z psi_4
    pull(r3, i3, xp, cx[J], sx[J], ix, ar, ai);
    pull(r3, i3, yp, cy[J], sy[J], iy, br, bi);
    pull(r4, i4, zp, cz[J], sz[J], iz, qr, qi);
    o[2 * N + J] = -kC * (ar - bi - qr);
    o[3 * N + J] = -kC * (ai + br - qi);

    // psi_3: D<_z psi_1 + (D>_x - i D>_y) psi_2
    pull(r1, i1, zp, cz[J], sz[J], iz, ar, ai);
    push(r2, i2, xm, cx[xm], sx[xm], ix, br, bi);
    push(r2, i2, ym, cy[ym], sy[ym], iy, qr, qi);
    o[4 * N + J] = -kC * (ar + br + qi);
    o[5 * N + J] = -kC * (ai + bi - qr);

    // psi_4: (D<_x + i D<_y) psi_1 - D>_z psi_2
    pull(r1, i1, xp, cx[J], sx[J], ix, ar, ai);
    pull(r1, i1, yp, cy[J], sy[J], iy, br, bi);
    push(r2, i2, zm, cz[zm], sz[zm], iz, qr, qi);
    o[6 * N + J] = -kC * (ar - bi - qr);
    o[7 * N + J] = -kC * (ai + br - qi);
  }
}

double eval_H1(const SpinorField& psi, const WilsonLineCache& lines, const LatticeSpec& spec) {
  using cd = std::complex<double>;
  const std::size_t N = spec.sites();
  const auto P = Derivative::Pullback;
  const auto F = Derivative::Pushforward;
  auto D = [&](int c, int a, Derivative k) { return covariant_derivative(psi, c, a, k, lines, spec); };
  const ComplexLattice d3zF = D(2, 2, F), d4xF = D(3, 0, F), d4yF = D(3, 1, F);
  const ComplexLattice d3xP = D(2, 0, P), d3yP = D(2, 1, P), d4zP = D(3, 2, P);
  const ComplexLattice d1zP = D(0, 2, P), d2xF = D(1, 0, F), d2yF = D(1, 1, F);
  const ComplexLattice d1xP = D(0, 0, P), d1yP = D(0, 1, P), d2zF = D(1, 2, F);
  auto at = [](const ComplexLattice& f, std::size_t J) { return cd(f.re[J], f.im[J]); };
  const cd I(0.0, 1.0);
  const double norm = 1.0 / std::sqrt(2.0 * kHbar);
  std::vector<double> terms(N);
  for (std::size_t J = 0; J < N; ++J) {
    cd p[4];
    for (int c = 0; c < 4; ++c) p[c] = cd(psi.re(c)[J], psi.im(c)[J]) * norm;
    const cd row1 = at(d3zF, J) + at(d4xF, J) - I * at(d4yF, J);
    const cd row2 = at(d3xP, J) + I * at(d3yP, J) - at(d4zP, J);
    const cd row3 = at(d1zP, J) + at(d2xF, J) - I * at(d2yF, J);
    const cd row4 = at(d1xP, J) + I * at(d1yP, J) - at(d2zF, J);
    const cd s = std::conj(p[0]) * row1 + std::conj(p[1]) * row2 + std::conj(p[2]) * row3 + std::conj(p[3]) * row4;
    terms[J] = (-I * kHbar * kC * s).real();
  }
  return pairwise_sum(terms) * spec.cell_volume();
}

double eval_H1_form(const SpinorField& psi, const DiracOperator& op) {
  const std::size_t N = psi.sites();
  std::vector<double> x(8 * N);
  op.apply(psi.flat(), x);
  std::vector<double> terms(N, 0.0);
  for (int c = 0; c < 4; ++c) {
    auto r = psi.re(c), i = psi.im(c);
    const double* xr = x.data() + 2 * c * N;
    const double* xi = xr + N;
    for (std::size_t J = 0; J < N; ++J) terms[J] += i[J] * xr[J] - r[J] * xi[J];
  }
  return 0.5 * op.spec().cell_volume() * pairwise_sum(terms);
}

double eval_H2(const SpinorField& psi, const VertexField& phi, const Physics& phys, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  const double mc2 = phys.mass * kC * kC;
  std::vector<double> terms(N);
  auto ph = phi[0];
  for (std::size_t J = 0; J < N; ++J) {
    double up = 0.0, dn = 0.0;
    for (int c = 0; c < 2; ++c) up += psi.re(c)[J] * psi.re(c)[J] + psi.im(c)[J] * psi.im(c)[J];
    for (int c = 2; c < 4; ++c) dn += psi.re(c)[J] * psi.re(c)[J] + psi.im(c)[J] * psi.im(c)[J];
    const double ep = phys.charge * ph[J];
    terms[J] = (ep + mc2) * up + (ep - mc2) * dn;
  }
  return spec.cell_volume() / (2.0 * kHbar) * pairwise_sum(terms);
}

double eval_H3(const GaugeState& gauge, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  const FaceField B = curl(gauge.A, spec);
  const EdgeField gphi = grad(gauge.phi, spec);
  std::vector<double> terms(N);
  for (std::size_t J = 0; J < N; ++J) {
    double y2 = 0.0, b2 = 0.0, yg = 0.0;
    for (int a = 0; a < 3; ++a) {
      y2 += gauge.Y[a][J] * gauge.Y[a][J];
      b2 += B[a][J] * B[a][J];
      yg += gauge.Y[a][J] * gphi[a][J];
    }
    terms[J] = 16.0 * kPi * kPi * kC * kC * y2 + b2 - 8.0 * kPi * kC * yg;
  }
  return spec.cell_volume() / (8.0 * kPi) * pairwise_sum(terms);
}

double fermion_bilinear_energy(const SpinorField& a, const SpinorField& b, const DiracOperator& op,
                               const VertexField& phi, const Physics& phys) {
  const LatticeSpec& spec = op.spec();
  const std::size_t N = spec.sites();
  std::vector<double> x(8 * N);
  op.apply(b.flat(), x);
  const double mc2 = phys.mass * kC * kC;
  auto ph = phi[0];
  std::vector<double> terms(N, 0.0);
  for (int c = 0; c < 4; ++c) {
    auto ar = a.re(c), ai = a.im(c), br = b.re(c), bi = b.im(c);
    const double* xr = x.data() + 2 * c * N;
    const double* xi = xr + N;
    const double sign = c < 2 ? 1.0 : -1.0;
    for (std::size_t J = 0; J < N; ++J) {
      // kinetic part times hbar so that both pieces share the dV / (2 hbar) prefactor
      terms[J] += kHbar * (ai[J] * xr[J] - ar[J] * xi[J]) +
                  (phys.charge * ph[J] + sign * mc2) * (ar[J] * br[J] + ai[J] * bi[J]);
    }
  }
  return spec.cell_volume() / (2.0 * kHbar) * pairwise_sum(terms);
}

void current_bilinear(const SpinorField& a, const SpinorField& b, const WilsonLineCache& lines,
                      const LatticeSpec& spec, double scale, EdgeField& out) {
  const std::size_t N = spec.sites();
  if (out.sites() != N) out = EdgeField(N);
  const Neighbours nb(spec);
  auto a1R = a.re(0), a1I = a.im(0), a2R = a.re(1), a2I = a.im(1);
  auto b3R = b.re(2), b3I = b.im(2), b4R = b.re(3), b4I = b.im(3);
  for (std::size_t J = 0; J < N; ++J) {
    {
      const auto P = nb.up(0, J);
      const double c = lines.cos(0)[J], s = lines.sin(0)[J];
      out[0][J] += scale * ((a1R[P] * b4R[J] + a1I[P] * b4I[J] + a2R[J] * b3R[P] + a2I[J] * b3I[P]) * c +
                            (a1I[P] * b4R[J] - a1R[P] * b4I[J] - a2I[J] * b3R[P] + a2R[J] * b3I[P]) * s);
    }
    {
      const auto P = nb.up(1, J);
      const double c = lines.cos(1)[J], s = lines.sin(1)[J];
      out[1][J] += scale * ((a1R[P] * b4I[J] - a1I[P] * b4R[J] - a2R[J] * b3I[P] + a2I[J] * b3R[P]) * c +
                            (a1R[P] * b4R[J] + a1I[P] * b4I[J] + a2R[J] * b3R[P] + a2I[J] * b3I[P]) * s);
    }
    {
      const auto P = nb.up(2, J);
      const double c = lines.cos(2)[J], s = lines.sin(2)[J];
      out[2][J] += scale * ((a1R[P] * b3R[J] + a1I[P] * b3I[J] - a2R[J] * b4R[P] - a2I[J] * b4I[P]) * c +
                            (a1I[P] * b3R[J] - a1R[P] * b3I[J] - a2R[J] * b4I[P] + a2I[J] * b4R[P]) * s);
    }
  }
}

EdgeField current_increment(const SpinorField& psi, const WilsonLineCache& lines, const Physics& phys,
                            const LatticeSpec& spec) {
  EdgeField out(spec.sites());
  current_bilinear(psi, psi, lines, spec, phys.charge / kHbar, out);
  return out;
}

VertexField charge_density(const SpinorField& psi, const Physics& phys, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  VertexField rho(N);
  for (int c = 0; c < 4; ++c) {
    auto r = psi.re(c), i = psi.im(c);
    for (std::size_t J = 0; J < N; ++J) rho[0][J] += r[J] * r[J] + i[J] * i[J];
  }
  const double f = phys.charge / (2.0 * kHbar);
  for (auto& v : rho.data()) v *= f;
  return rho;
}

double net_charge(const SpinorField& psi, const Physics& phys, const LatticeSpec& spec) {
  return phys.charge * psi.probability(spec);
}

VertexField gauss_residual(const EdgeField& Y, const VertexField& rho, const LatticeSpec& spec) {
  VertexField g = div(Y, spec);
  for (std::size_t J = 0; J < spec.sites(); ++J) g[0][J] = kC * g[0][J] + rho[0][J];
  return g;
}

}  // namespace qedlat
