#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qedlat/diagnostics.hpp"

namespace qedlat {

using cd = std::complex<double>;

double lattice_dispersion_massless(const Vec3& k, const LatticeSpec& spec) {
  double p2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double p = lattice_momentum(k[d], spec.spacing[d]);
    p2 += p * p;
  }
  return 2.0 / spec.dt * std::atan(0.5 * kC * spec.dt * std::sqrt(p2));
}

Eigen::Matrix4cd transfer_matrix(const Vec3& k, double mass, const LatticeSpec& spec, const Schedule& schedule) {
  const Eigen::Matrix4cd G = kinetic_symbol(k, spec);
  const Eigen::Matrix4cd I = Eigen::Matrix4cd::Identity();
  const double mc2 = mass * kC * kC;
  Eigen::Matrix4cd T = I;
  for (const Stage& st : schedule.stages()) {
    const double tau = st.fraction * spec.dt;
    switch (st.kind) {
      case Substep::Mass: {
        Eigen::Matrix4cd R = Eigen::Matrix4cd::Zero();
        for (int c = 0; c < 4; ++c) R(c, c) = std::polar(1.0, (c < 2 ? -1.0 : 1.0) * mc2 * tau / kHbar);
        T = R * T;
        break;
      }
      case Substep::Dirac:
        T = (I - 0.5 * tau * G).partialPivLu().solve((I + 0.5 * tau * G) * T);
        break;
      case Substep::Gauge:
        // no field, no fermion coupling
        break;
    }
  }
  return T;
}

std::vector<double> lattice_dispersion_massive_oracle(const Vec3& k, double mass, const LatticeSpec& spec,
                                                      const Schedule& schedule) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(transfer_matrix(k, mass, spec, schedule), false);
  std::vector<double> w(4);
  for (int i = 0; i < 4; ++i) w[i] = -std::arg(es.eigenvalues()(i)) / spec.dt;
  std::sort(w.begin(), w.end());
  return w;
}

BranchMinima dispersion_minima(const LatticeSpec& grid, double mass, const Schedule& schedule) {
  const std::size_t N = grid.sites();
  std::vector<std::array<double, 4>> w(N);
  for (std::size_t J = 0; J < N; ++J) {
    const auto v = lattice_dispersion_massive_oracle(grid_momentum(grid, J), mass, grid, schedule);
    for (int b = 0; b < 4; ++b) w[J][b] = std::abs(v[b]);
  }
  BranchMinima out;
  for (std::size_t J = 0; J < N; ++J) {
    const auto c = grid.coords(J);
    for (int b = 0; b < 4; ++b) {
      bool minimum = true;
      for (int dz = -1; dz <= 1 && minimum; ++dz)
        for (int dy = -1; dy <= 1 && minimum; ++dy)
          for (int dx = -1; dx <= 1 && minimum; ++dx) {
            const std::array<int, 3> d{dx, dy, dz};
            bool self = true, skip = false;
            std::array<int, 3> q{};
            for (int a = 0; a < 3; ++a) {
              if (d[a] != 0 && grid.n[a] == 1) skip = true;
              self = self && d[a] == 0;
              q[a] = (c[a] + d[a] + grid.n[a]) % grid.n[a];
            }
            if (self || skip) continue;
            const double other = w[grid.index(q[0], q[1], q[2])][b];
            if (other < w[J][b] - 1e-12 * std::max(1.0, w[J][b])) minimum = false;
          }
      if (minimum) out.at[b].push_back(grid_momentum(grid, J));
    }
  }
  return out;
}

BenchmarkBranches benchmark_dispersions(double k, double omega_p, double mass) {
  if (!(omega_p >= 0.0)) throw ConfigError("plasma frequency must be >= 0");
  const double ck2 = kC * kC * k * k;
  const double m2 = std::pow(mass * kC * kC / kHbar, 2);
  const double wp2 = omega_p * omega_p;
  BenchmarkBranches b;
  b.fermion = std::sqrt(ck2 + m2);
  b.electromagnetic = std::sqrt(ck2 + wp2);
  // x = omega^2: x^2 - (2 ck2 + wp2 + 4 m2) x + ck2 (ck2 + wp2) + 4 m2 wp2 = 0
  const double s = 2.0 * ck2 + wp2 + 4.0 * m2;
  const double p = ck2 * (ck2 + wp2) + 4.0 * m2 * wp2;
  const double disc = std::sqrt((wp2 - 4.0 * m2) * (wp2 - 4.0 * m2) + 16.0 * m2 * ck2);
  const double hi = 0.5 * (s + disc);
  const double lo = hi > 0.0 ? p / hi : 0.0;
  b.pair = std::sqrt(hi);
  b.langmuir = std::sqrt(std::max(lo, 0.0));
  return b;
}

}  // namespace qedlat
