#include <cmath>
#include <complex>

#include "doctest.h"
#include "oracles.hpp"
#include "qedlat/ensemble.hpp"

using namespace qedlat;
using cd = std::complex<double>;

namespace {

LatticeSpec zline(int nz, double dz, double dt) {
  LatticeSpec s;
  s.n = {1, 1, nz};
  s.spacing = {dz, dz, dz};
  s.dt = dt;
  return s;
}

EnsembleConfig config(int members, double n, std::uint64_t seed = 7) {
  EnsembleConfig c;
  c.members = members;
  c.n_plus = EnsembleConfig::constant(n);
  c.n_minus = EnsembleConfig::constant(n);
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("closed-form spinors at rest and for a massless particle along z") {
  const Vec3 zero{0.0, 0.0, 0.0};
  const Eigen::Vector4cd u = analytic_u(0, zero, 1.0);
  const Eigen::Vector4cd v = analytic_v(0, zero, 1.0);
  CHECK((u - Eigen::Vector4cd(1, 0, 0, 0)).norm() <= 1e-15);
  CHECK((v - Eigen::Vector4cd(0, 0, 1, 0)).norm() <= 1e-15);
  const Eigen::Vector4cd u0 = analytic_u(0, Vec3{0.0, 0.0, 0.7}, 0.0);
  CHECK((u0 - Eigen::Vector4cd(1, 0, 1, 0) / std::sqrt(2.0)).norm() <= 1e-15);
}

TEST_CASE("closed-form spinors satisfy the orthogonality relations") {
  oracle::Gen gen(61);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 p{gen.normal(2.0), gen.normal(2.0), gen.normal(2.0)};
    const Vec3 mp{-p[0], -p[1], -p[2]};
    const double m = gen.uniform(0.0, 2.0);
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) {
        const double d = s == t ? 1.0 : 0.0;
        CHECK(std::abs(analytic_u(s, p, m).dot(analytic_u(t, p, m)) - d) <= 1e-12);
        CHECK(std::abs(analytic_v(s, p, m).dot(analytic_v(t, p, m)) - d) <= 1e-12);
        // across branches the closed forms are orthogonal for equal spin labels only
        if (s == t) CHECK(std::abs(analytic_u(s, p, m).dot(analytic_v(t, mp, m))) <= 1e-12);
      }
  }
}

TEST_CASE("lattice eigenspinor table is orthonormal and diagonalises the lattice Hamiltonian") {
  oracle::Gen gen(62);
  for (int trial = 0; trial < 6; ++trial) {
    const LatticeSpec s = trial == 0 ? zline(32, 0.05, 0.025) : gen.lattice(5);
    const double m = trial == 1 ? 0.0 : gen.uniform(0.1, 1.0);
    const EigenspinorTable tab(m, s);
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const ModeSpinors& md = tab[i];
      const Eigen::Matrix4cd h = dirac_symbol(md.k, m, s);
      Eigen::Matrix4cd B;
      B << md.u[0], md.u[1], md.w[0], md.w[1];
      CHECK((B.adjoint() * B - Eigen::Matrix4cd::Identity()).norm() <= 1e-12);
      const Eigen::Matrix4cd D = B.adjoint() * h * B;
      const double tol = 1e-13 * (1.0 + h.norm());
      CHECK(std::abs(D(0, 2)) + std::abs(D(0, 3)) + std::abs(D(1, 2)) + std::abs(D(1, 3)) <= tol);
      CHECK(md.e_pos[0] >= -1e-12);
      CHECK(md.e_pos[1] >= -1e-12);
      CHECK(md.e_neg[0] <= 1e-12);
      CHECK(md.e_neg[1] <= 1e-12);
      for (int r = 0; r < 4; ++r) CHECK((h * B.col(r) - D(r, r).real() * B.col(r)).norm() <= 1e-11 * (1.0 + h.norm()));
    }
  }
}

TEST_CASE("on a z line the table reproduces the closed-form spin-up spinors") {
  const LatticeSpec s = zline(16, 0.5, 0.25);
  const EigenspinorTable tab(0.8, s);
  for (std::size_t i = 0; i < tab.size(); ++i) {
    const Vec3 p{0.0, 0.0, lattice_momentum(tab[i].k[2], 0.5)};
    const Eigen::Vector4cd a = analytic_u(0, p, 0.8);
    CHECK(std::abs(std::abs(a.dot(tab[i].u[0])) - 1.0) <= 1e-12);
    const Eigen::Vector4cd v = analytic_v(0, Vec3{0.0, 0.0, -p[2]}, 0.8);
    CHECK(std::abs(std::abs(v.dot(tab[i].w[0])) - 1.0) <= 1e-12);
  }
}

TEST_CASE("half occupation gives vanishing amplitudes and fields") {
  const LatticeSpec s = zline(8, 1.0, 0.5);
  const EigenspinorTable tab(0.25, s);
  const Ensemble ens = sample_background(config(3, 0.5), tab, s);
  for (const auto& p : ens.pairs) {
    CHECK(oracle::max_abs(p.M.data()) == 0.0);
    CHECK(oracle::max_abs(p.F.data()) == 0.0);
  }
}

TEST_CASE("sampling is reproducible per seed and member") {
  const LatticeSpec s = zline(8, 1.0, 0.5);
  const EigenspinorTable tab(0.25, s);
  const Ensemble a = sample_background(config(4, 0.0, 11), tab, s);
  const Ensemble b = sample_background(config(6, 0.0, 11), tab, s);
  const Ensemble c = sample_background(config(4, 0.0, 12), tab, s);
  for (int m = 0; m < 4; ++m) CHECK(a.pairs[m].M.data() == b.pairs[m].M.data());
  CHECK(a.pairs[0].M.data() != c.pairs[0].M.data());
}

TEST_CASE("FFT synthesis matches a direct mode sum") {
  oracle::Gen gen(63);
  const LatticeSpec s = gen.lattice(4);
  const EigenspinorTable tab(0.5, s);
  const ModeAmplitudes amp = draw_amplitudes(config(1, 0.2), tab, s, 0);
  const StochasticPair p = synthesize(amp, tab, s);
  const std::size_t N = s.sites();
  const double V = s.volume();
  double err = 0.0, scale = 0.0;
  for (std::size_t J = 0; J < N; ++J) {
    const auto x = s.coords(J);
    for (int c = 0; c < 4; ++c) {
      cd m = 0.0, f = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double ph = 0.0;
        for (int d = 0; d < 3; ++d) ph += tab[i].k[d] * s.spacing[d] * (x[d] + kComponentOffset[c][d]);
        const cd e = std::polar(1.0, ph);
        for (int sp = 0; sp < 2; ++sp) {
          m += (amp.xi[sp][i] * tab[i].u[sp](c) + amp.eta[sp][i] * tab[i].w[sp](c)) * e;
          f += (double(amp.xi_sign[i]) * amp.xi[sp][i] * tab[i].u[sp](c) -
                double(amp.eta_sign[i]) * amp.eta[sp][i] * tab[i].w[sp](c)) *
               e;
        }
      }
      // real fields are sqrt(2 hbar) psi with psi = sum / (V sqrt 2)
      m *= std::sqrt(2.0 * kHbar) / (V * std::sqrt(2.0));
      f *= std::sqrt(2.0 * kHbar) / (V * std::sqrt(2.0));
      err = std::max({err, std::abs(m - cd(p.M.re(c)[J], p.M.im(c)[J])), std::abs(f - cd(p.F.re(c)[J], p.F.im(c)[J]))});
      scale = std::max(scale, std::abs(m));
    }
  }
  CHECK(err <= 1e-12 * scale);
}

TEST_CASE("vacuum sample: zero net charge and energy equal to the closed-form vacuum energy") {
  oracle::Gen gen(64);
  for (int trial = 0; trial < 3; ++trial) {
    const LatticeSpec s = trial == 0 ? zline(32, 0.05, 0.025) : gen.lattice(4);
    const Physics ph{gen.uniform(0.2, 1.0), 0.2};
    const EigenspinorTable tab(ph.mass, s);
    Ensemble ens = sample_background(config(5, 0.0), tab, s);
    GaugeState g(s.sites());
    const double sea = ph.charge * 2.0 * double(s.sites());
    CHECK(std::abs(ensemble_net_charge(ens, ph, s)) <= 1e-12 * sea);
    freeze_reference(ens, g, tab, s, ph);
    const EnsembleEnergy e = ensemble_energy(ens, g, s, ph);
    CHECK(std::abs(e.fermion) <= 1e-11 * std::abs(ens.ref.energy));
    // the frozen mean removes the uniform part of the sampled current exactly
    EdgeField J;
    const WilsonLineCache lines(g.A, ph.coupling(), s);
    ensemble_current(ens, lines, s, ph, 1, J);
    EdgeField raw;
    raw_ensemble_current(ens, lines, s, ph, 1, raw);
    for (int a = 0; a < 3; ++a) {
      double mean = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < s.sites(); ++i) {
        mean += J[a][i] / double(s.sites());
        scale = std::max(scale, std::abs(raw[a][i]));
      }
      CHECK(std::abs(mean) <= 1e-12 * (1.0 + scale));
    }
    // each member carries 2N states in M and F
    CHECK(ensemble_probability(ens, s) == doctest::Approx(2.0 * double(s.sites())).epsilon(1e-12));
  }
}

TEST_CASE("plasma sample carries the occupied-mode energy above the vacuum") {
  const LatticeSpec s = zline(16, 0.1, 0.05);
  const Physics ph{1.0, 0.2};
  const EigenspinorTable tab(ph.mass, s);
  Ensemble ens = sample_background(config(3, 0.1), tab, s);
  GaugeState g(s.sites());
  freeze_reference(ens, g, tab, s, ph);
  const EnsembleEnergy e = ensemble_energy(ens, g, s, ph);
  CHECK(e.fermion == doctest::Approx(-0.2 * vacuum_energy(tab)).epsilon(1e-11));

  // occupation above one half flips the F sign so the cross moment stays 1 - 2n
  Ensemble inv = sample_background(config(3, 0.9), tab, s);
  freeze_reference(inv, g, tab, s, ph);
  CHECK(ensemble_energy(inv, g, s, ph).fermion == doctest::Approx(-1.8 * vacuum_energy(tab)).epsilon(1e-11));
}

TEST_CASE("degenerate ensemble current is the single-field current with reversed sign") {
  oracle::Gen gen(65);
  const LatticeSpec s = gen.lattice(4);
  const Physics ph{0.5, 0.7};
  SpinorField psi = gen.spinor(s);
  Ensemble ens;
  ens.pairs.push_back({psi, psi});
  const EdgeField A = gen.edge(s);
  const WilsonLineCache w(A, ph.coupling(), s);
  EdgeField J;
  raw_ensemble_current(ens, w, s, ph, 1, J);
  const EdgeField single = oracle::current(psi, A, ph.charge, s);
  for (std::size_t i = 0; i < J.data().size(); ++i) CHECK(J.data()[i] == doctest::Approx(-single.data()[i]).epsilon(1e-12));
}

TEST_CASE("ensemble current is minus the A-gradient of the ensemble energy per cell volume") {
  oracle::Gen gen(66);
  const LatticeSpec s = gen.lattice(3);
  const Physics ph{0.5, 0.6};
  Ensemble ens;
  for (int m = 0; m < 3; ++m) ens.pairs.push_back({gen.spinor(s), gen.spinor(s)});
  ens.ref.current = {0.1, -0.2, 0.3};
  GaugeState g(s.sites());
  g.A = gen.edge(s);
  EdgeField J;
  ensemble_current(ens, WilsonLineCache(g.A, ph.coupling(), s), s, ph, 1, J);
  const double h = 1e-6;
  for (int probe = 0; probe < 8; ++probe) {
    const std::size_t i = std::size_t(gen.integer(0, int(3 * s.sites()) - 1));
    GaugeState gp = g, gm = g;
    gp.A.data()[i] += h;
    gm.A.data()[i] -= h;
    const double d = (ensemble_energy(ens, gp, s, ph).fermion - ensemble_energy(ens, gm, s, ph).fermion) / (2.0 * h);
    CHECK(J.data()[i] == doctest::Approx(-d / s.cell_volume()).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("coupled ensemble evolution keeps Gauss law and member norms; energy error is second order") {
  // weak coupling keeps the sampled vacuum noise in the linear regime
  const Physics ph{1.0, 0.02};
  auto run = [&](double dt, bool checks) {
    const LatticeSpec s = zline(32, 0.05, dt);
    const EigenspinorTable tab(ph.mass, s);
    Ensemble ens = sample_background(config(4, 0.0), tab, s);
    GaugeState g(s.sites());
    freeze_reference(ens, g, tab, s, ph);
    const double e0 = ensemble_energy(ens, g, s, ph).total;
    double rho_scale = 0.0;
    for (double v : ens.ref.rho[0]) rho_scale = std::max(rho_scale, std::abs(v));
    std::vector<double> norms;
    for (const auto& p : ens.pairs) norms.push_back(p.M.probability(s));
    Integrator integ(s, ph, SolverConfig{}, 2);
    EnsembleSector sector(ens, s, ph, SolverConfig{}, 1);
    const int steps = int(std::lround(1.0 / dt));
    double worst = 0.0;
    for (int n = 0; n < steps; ++n) {
      integ.step(sector, g, n * dt, dt);
      worst = std::max(worst, std::abs(ensemble_energy(ens, g, s, ph).total - e0));
    }
    if (checks) {
      CHECK(worst <= 1e-4 * std::abs(ens.ref.energy));
      CHECK(oracle::max_abs(g.Y.data()) > 0.0);
      for (std::size_t m = 0; m < ens.pairs.size(); ++m)
        CHECK(ens.pairs[m].M.probability(s) == doctest::Approx(norms[m]).epsilon(1e-10));
      // each solve leaves a residual of order tol * |psi|, which enters the charge once per step
      const VertexField r = gauss_residual(g.Y, ensemble_charge_density(ens, ph, s), s);
      CHECK(oracle::max_abs(r.data()) <= 10.0 * steps * 1e-12 * rho_scale);
      CHECK(std::abs(ensemble_net_charge(ens, ph, s)) <= 10.0 * steps * 1e-12 * rho_scale * s.volume());
    }
    return worst;
  };
  const double coarse = run(0.025, true);
  const double fine = run(0.0125, false);
  // halving dt must cut the error by about 4 or more
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("results do not depend on the thread count") {
  const LatticeSpec s = zline(16, 0.1, 0.05);
  const Physics ph{1.0, 0.3};
  const EigenspinorTable tab(ph.mass, s);
  auto run = [&](int threads) {
    Ensemble ens = sample_background(config(9, 0.0), tab, s);
    GaugeState g(s.sites());
    for (double& v : g.Y[2]) v = -0.5;
    freeze_reference(ens, g, tab, s, ph, threads);
    Integrator integ(s, ph, SolverConfig{}, 2);
    EnsembleSector sector(ens, s, ph, SolverConfig{}, threads);
    for (int n = 0; n < 10; ++n) integ.step(sector, g, n * s.dt, s.dt);
    return std::make_pair(g.Y.data(), ens.pairs[5].F.data());
  };
  const auto a = run(1), b = run(3);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("per-mode moments of the stochastic amplitudes") {
  LatticeSpec s;
  s.n = {4, 4, 4};
  const EigenspinorTable tab(0.5, s);
  EnsembleConfig cfg = config(1024, 0.0, 99);
  cfg.n_plus = EnsembleConfig::constant(0.1);
  cfg.n_minus = EnsembleConfig::constant(0.3);
  const std::size_t N = s.sites();
  const double V = s.volume();
  std::vector<cd> cross_xi(N), cross_eta(N), pseudo(N), mixed(N);
  std::vector<double> second_xi(N), second_eta(N);
  for (int m = 0; m < cfg.members; ++m) {
    const ModeAmplitudes a = draw_amplitudes(cfg, tab, s, m);
    for (std::size_t i = 0; i < N; ++i) {
      // M/F cross moments per mode
      second_xi[i] += std::real(a.xi[0][i] * std::conj(double(a.xi_sign[i]) * a.xi[0][i])) / V;
      second_eta[i] += std::real(a.eta[1][i] * std::conj(double(a.eta_sign[i]) * a.eta[1][i])) / V;
      cross_xi[i] += a.xi[0][i] * std::conj(a.xi[1][i]) / V;
      cross_eta[i] += a.eta[0][i] * std::conj(a.eta[1][i]) / V;
      pseudo[i] += a.xi[0][i] * a.xi[0][i] / V;
      mixed[i] += a.xi[0][i] * std::conj(a.eta[0][i]) / V;
    }
  }
  const double bound = 4.0 / std::sqrt(double(cfg.members));
  for (std::size_t i = 0; i < N; ++i) {
    CHECK(std::abs(second_xi[i] / cfg.members - 0.8) <= bound);
    CHECK(std::abs(second_eta[i] / cfg.members - 0.4) <= bound);
    CHECK(std::abs(cross_xi[i]) / cfg.members <= bound);
    CHECK(std::abs(cross_eta[i]) / cfg.members <= bound);
    CHECK(std::abs(pseudo[i]) / cfg.members <= bound);
    CHECK(std::abs(mixed[i]) / cfg.members <= bound);
  }
}

TEST_CASE("invalid ensemble configuration") {
  EnsembleConfig c;
  c.members = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.members = 2;
  c.n_plus = EnsembleConfig::constant(1.5);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
