#include <cmath>

#include "qedlat/ensemble.hpp"

namespace qedlat {

namespace {

using cd = std::complex<double>;

Eigen::Vector2cd pauli(int s) { return s == 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0); }

Eigen::Matrix2cd sigma_dot(const Vec3& p) {
  Eigen::Matrix2cd m;
  m << cd(p[2], 0.0), cd(p[0], -p[1]), cd(p[0], p[1]), cd(-p[2], 0.0);
  return m;
}

double energy(const Vec3& p, double mass) {
  const double p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
  return std::sqrt(kC * kC * p2 + mass * mass * std::pow(kC, 4));
}

// normalised component of a orthogonal to b
Eigen::Vector4cd orthonormal_to(Eigen::Vector4cd a, const Eigen::Vector4cd& b) {
  a -= b * b.dot(a);
  return a / a.norm();
}

}  // namespace

Eigen::Vector4cd analytic_u(int s, const Vec3& p, double mass) {
  const double E = energy(p, mass), mc2 = mass * kC * kC;
  Eigen::Vector4cd out;
  if (E == 0.0) {
    out.setZero();
    out(s) = 1.0;
    return out;
  }
  const double norm = std::sqrt((E + mc2) / (2.0 * E));
  const Eigen::Vector2cd U = pauli(s);
  const Eigen::Vector2cd lower = (s == 0 ? 1.0 : -1.0) * kC * sigma_dot(p) * U / (E + mc2);
  out << U, lower;
  return norm * out;
}

Eigen::Vector4cd analytic_v(int s, const Vec3& p, double mass) {
  const double E = energy(p, mass), mc2 = mass * kC * kC;
  Eigen::Vector4cd out;
  if (E == 0.0) {
    out.setZero();
    out(2 + s) = 1.0;
    return out;
  }
  const double norm = std::sqrt((E + mc2) / (2.0 * E));
  const Eigen::Vector2cd U = pauli(s);
  const Eigen::Vector2cd upper = (s == 0 ? 1.0 : -1.0) * kC * sigma_dot(p) * U / (E + mc2);
  out << upper, U;
  return norm * out;
}

Eigen::Matrix4cd energy_projector(const Eigen::Matrix4cd& h, int sign) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  Eigen::Matrix4cd P = Eigen::Matrix4cd::Zero();
  // eigenvalues ascending: the two lowest are the negative branch
  const int first = sign > 0 ? 2 : 0;
  for (int i = first; i < first + 2; ++i) P += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return P;
}

EigenspinorTable::EigenspinorTable(double mass, const LatticeSpec& spec) : mass_(mass) {
  if (mass < 0.0) throw ConfigError("fermion mass must be >= 0");
  const std::size_t N = spec.sites();
  modes_.resize(N);
  for (std::size_t J = 0; J < N; ++J) {
    ModeSpinors& m = modes_[J];
    m.k = grid_momentum(spec, J);
    Vec3 p, mp;
    for (int a = 0; a < 3; ++a) {
      p[a] = kHbar * lattice_momentum(m.k[a], spec.spacing[a]);
      mp[a] = -p[a];
    }
    const Eigen::Matrix4cd h = dirac_symbol(m.k, mass, spec);
    const bool degenerate = h.norm() < 1e-14;
    const Eigen::Matrix4cd Pp = degenerate ? Eigen::Matrix4cd(Eigen::Vector4cd(1, 1, 0, 0).asDiagonal())
                                           : energy_projector(h, +1);
    const Eigen::Matrix4cd Pm = Eigen::Matrix4cd::Identity() - Pp;

    // the closed-form seeds already lie in the right eigenspaces when the lattice
    // symbol has the continuum structure; projection only removes the remainder
    Eigen::Vector4cd u0 = Pp * analytic_u(0, p, mass), u1 = Pp * analytic_u(1, p, mass);
    Eigen::Vector4cd w0 = Pm * analytic_v(0, mp, mass), w1 = Pm * analytic_v(1, mp, mass);
    auto pick = [](Eigen::Vector4cd& a, Eigen::Vector4cd& b, const Eigen::Matrix4cd& P) {
      if (a.norm() < 1e-6) std::swap(a, b);
      if (a.norm() < 1e-6) {
        // seeds both outside the subspace: fall back to its own basis
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(P);
        a = es.eigenvectors().col(3);
        b = es.eigenvectors().col(2);
      }
      a /= a.norm();
      Eigen::Vector4cd r = b - a * a.dot(b);
      if (r.norm() < 1e-6) {
        // any unit vector of the subspace orthogonal to a
        for (int e = 0; e < 4 && r.norm() < 1e-6; ++e) {
          Eigen::Vector4cd t = P.col(e);
          r = t - a * a.dot(t);
        }
      }
      b = orthonormal_to(r, a);
    };
    pick(u0, u1, Pp);
    pick(w0, w1, Pm);
    // split levels: rotate the pair into exact eigenvectors so that each mode is stationary
    auto diagonalise = [&h](Eigen::Vector4cd& a, Eigen::Vector4cd& b) {
      Eigen::Matrix<std::complex<double>, 4, 2> B;
      B << a, b;
      const Eigen::Matrix2cd hs = B.adjoint() * h * B;
      if (std::abs(hs(0, 1)) <= 1e-13 * (1.0 + hs.norm())) return;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(hs);
      const Eigen::Matrix<std::complex<double>, 4, 2> R = B * es.eigenvectors();
      a = R.col(1);
      b = R.col(0);
    };
    diagonalise(u0, u1);
    diagonalise(w0, w1);
    m.u[0] = u0;
    m.u[1] = u1;
    m.w[0] = w0;
    m.w[1] = w1;
    for (int s = 0; s < 2; ++s) {
      m.e_pos[s] = (m.u[s].adjoint() * h * m.u[s])(0).real();
      m.e_neg[s] = (m.w[s].adjoint() * h * m.w[s])(0).real();
    }
  }
}

double vacuum_energy(const EigenspinorTable& table) {
  std::vector<double> terms(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const ModeSpinors& m = table[i];
    terms[i] = -0.5 * (m.e_pos[0] + m.e_pos[1] + std::abs(m.e_neg[0]) + std::abs(m.e_neg[1]));
  }
  return pairwise_sum(terms);
}

}  // namespace qedlat
