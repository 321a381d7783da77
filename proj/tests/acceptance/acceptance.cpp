// Acceptance criteria C1..C10. One PASS/FAIL line per criterion; exit status is
// the number of failures. Arguments select criteria by name (default: all).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "qedlat/experiments.hpp"

using namespace qedlat;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

std::filesystem::path out_root() { return std::filesystem::path(QEDLAT_ACCEPTANCE_OUT); }

ScenarioConfig config_named(const std::string& file, const std::string& out) {
  ScenarioConfig c = load_scenario((std::filesystem::path(QEDLAT_CONFIG_DIR) / file).string());
  c.output = (out_root() / out).string();
  c.checkpoint_every = 0;
  c.validate();
  return c;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  return oracle::max_abs_diff(a, b) / std::max(1e-300, oracle::max_abs(b));
}

LatticeSpec cube(int n, double d, double dt) {
  LatticeSpec s;
  s.n = {n, n, n};
  s.spacing = {d, d, d};
  s.dt = dt;
  return s;
}

// C1
Outcome free_fermion() {
  const json v = run_scenario(config_named("free_fermion.json", "free_fermion")).values.at("fermion_spectrum");
  const double gap = v["gap"], bin = v["frequency_bin"], ridge = v["ridge_max_deviation_bins"];
  const bool ok = std::abs(gap - 0.5) <= bin && ridge <= 2.0;
  return {ok, fmt("gap %.4f (2m = 0.5, bin %.4f); ridge max deviation %.2f bins over %d columns |k| <= 4m", gap, bin,
                  ridge, int(v["ridge_columns"]))};
}

// C2
Outcome doubling() {
  const ScenarioConfig c = config_named("free_fermion.json", "doubling");
  const Schedule sch = Schedule::of_order(c.order);
  LatticeSpec bz = c.lattice;
  bz.n = {32, 32, 32};
  const BranchMinima full = dispersion_minima(bz, c.physics.mass, sch);
  const BranchMinima line = dispersion_minima(c.lattice, c.physics.mass, sch);
  bool ok = true, line_ok = true;
  std::ostringstream os;
  os << "32^3 sweep minima per branch:";
  for (int b = 0; b < 4; ++b) {
    const auto& at = full.at[b];
    const bool at_zero = at.size() == 1 && std::abs(at[0][0]) + std::abs(at[0][1]) + std::abs(at[0][2]) < 1e-12;
    ok = ok && at_zero;
    line_ok = line_ok && line.at[b].size() == 1;
    os << ' ' << at.size();
  }
  const auto& extra = full.at[2];
  for (const Vec3& q : extra)
    if (std::abs(q[0]) + std::abs(q[1]) + std::abs(q[2]) > 0.0) {
      os << fmt(" (extra at k = (%.4f, %.4f, %.4f))", q[0], q[1], q[2]);
      break;
    }
  os << "; z line 1x1x256: " << (line_ok ? "one minimum per branch at k = 0" : "extra minima");
  return {ok, os.str()};
}

// C3
Outcome vacuum_spectra() {
  const json v = run_scenario(config_named("vacuum_spectra.json", "vacuum_spectra")).values.at("field_spectra");
  const double gap = v["ez_gap"], bin = v["frequency_bin"], band = v["ex_light_cone_band_over_median_min"];
  const bool ok = std::abs(gap - 0.5) <= 2.0 * bin && band >= 100.0;
  return {ok, fmt("E_z continuum onset %.4f (strongest bin %.4f, 2m = 0.5, bin %.4f); E_x light-cone band / column "
                  "median min %.1f (need >= 100); lattice vs continuum light cone %.2f bins",
                  gap, double(v["ez_strongest_bin"]), bin, band, double(v["light_cone_lattice_vs_continuum_bins"]))};
}

// C4
Outcome conservation() {
  const json v = run_scenario(config_named("conservation.json", "conservation")).values.at("conservation");
  const double all = v["energy_error_max"], early = v["energy_error_first_1000_steps"];
  const double slope = v["second_half_slope"], se = v["second_half_slope_stderr"];
  const double prob = v["probability_error_max"];
  const bool bounded = all <= 10.0 * early;
  const bool flat = std::abs(slope) <= 3.0 * se;
  const bool norm = prob <= 1e-7;
  return {bounded && flat && norm,
          fmt("energy error max %.3e vs first 1e3 steps %.3e (ratio %.2f, need <= 10); second-half slope %.3e +- %.3e "
              "(%s); probability error %.3e (need <= 1e-7)",
              all, early, all / early, slope, se, flat ? "consistent with 0" : "not consistent with 0", prob)};
}

// C5: global error at t = 1 against a dt_min / 16 run of the same order
std::vector<double> evolve(const FieldState& init, const LatticeSpec& s0, const Physics& ph, int order, double dt,
                           double T) {
  LatticeSpec s = s0;
  s.dt = dt;
  FieldState st = init;
  SolverConfig sc;
  sc.rel_tolerance = 1e-14;
  Stepper stepper(st, s, ph, sc, order);
  const long n = std::lround(T / dt);
  for (long i = 0; i < n; ++i) stepper.step();
  std::vector<double> x = st.psi.data();
  x.insert(x.end(), st.gauge.A.data().begin(), st.gauge.A.data().end());
  x.insert(x.end(), st.gauge.Y.data().begin(), st.gauge.Y.data().end());
  return x;
}

Outcome convergence() {
  const LatticeSpec s = cube(4, 1.0, 0.1);
  const Physics ph{1.0, 0.5};
  oracle::Gen gen(2024);
  FieldState init(s.sites());
  init.psi = gen.spinor(s, 0.5);
  init.gauge.A = gen.edge(s, 0.3);
  init.gauge.Y = gen.edge(s, 0.05);
  const double T = 1.0;
  struct Case {
    int order;
    double target, tol;
    std::vector<double> dts;
  };
  const std::vector<Case> cases{{1, 1.0, 0.1, {0.05, 0.025, 0.0125}},
                                {2, 2.0, 0.1, {0.1, 0.05, 0.025}},
                                {4, 4.0, 0.3, {0.2, 0.1, 0.05}}};
  bool ok = true;
  std::ostringstream os;
  for (const Case& c : cases) {
    const std::vector<double> ref = evolve(init, s, ph, c.order, c.dts.back() / 16.0, T);
    Eigen::VectorXd lx(Eigen::Index(c.dts.size())), ly(lx.size());
    for (std::size_t i = 0; i < c.dts.size(); ++i) {
      lx(Eigen::Index(i)) = std::log(c.dts[i]);
      ly(Eigen::Index(i)) = std::log(rel_diff(evolve(init, s, ph, c.order, c.dts[i], T), ref));
    }
    const double mx = lx.mean(), my = ly.mean();
    const double slope = ((lx.array() - mx) * (ly.array() - my)).sum() / (lx.array() - mx).square().sum();
    const bool pass = std::abs(slope - c.target) <= c.tol;
    ok = ok && pass;
    os << fmt("order %d slope %.3f (%.1f +- %.1f, errors %.2e..%.2e)%s", c.order, slope, c.target, c.tol,
              std::exp(ly(0)), std::exp(ly(ly.size() - 1)), c.order == 4 ? "" : "; ");
  }
  return {ok, os.str()};
}

// C6: dense matrices assembled from the component-form oracle
Outcome oracle_equivalence() {
  const LatticeSpec s = cube(2, 0.7, 0.15);
  const Physics ph{0.6, 0.8};
  oracle::Gen gen(66);
  GaugeState g(s.sites());
  g.A = gen.edge(s);
  g.Y = gen.edge(s, 0.2);
  const SpinorField psi0 = gen.spinor(s);
  const std::size_t N = s.sites(), n8 = 8 * N, n3 = 3 * N;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(Eigen::Index(n8), Eigen::Index(n8));
  SpinorField unit(N);
  for (std::size_t j = 0; j < n8; ++j) {
    std::fill(unit.data().begin(), unit.data().end(), 0.0);
    unit.data()[j] = 1.0;
    const std::vector<double> col = oracle::kinetic_rhs(unit, g.A, ph.coupling(), s);
    for (std::size_t i = 0; i < n8; ++i) K(Eigen::Index(i), Eigen::Index(j)) = col[i];
  }
  const Eigen::MatrixXd I8 = Eigen::MatrixXd::Identity(K.rows(), K.cols());
  const Eigen::MatrixXd CK = (I8 - 0.5 * s.dt * K).partialPivLu().solve(I8 + 0.5 * s.dt * K);
  const Eigen::VectorXd p1 = CK * Eigen::Map<const Eigen::VectorXd>(psi0.data().data(), Eigen::Index(n8));
  SpinorField mid(N);
  for (std::size_t i = 0; i < n8; ++i) mid.data()[i] = 0.5 * (psi0.data()[i] + p1(Eigen::Index(i)));
  EdgeField Yref = oracle::current(mid, g.A, ph.charge, s);
  for (std::size_t i = 0; i < n3; ++i) Yref.data()[i] = g.Y.data()[i] + s.dt * Yref.data()[i];

  SolverConfig sc;
  Integrator integ(s, ph, sc, 2);
  SpinorField psi = psi0;
  GaugeState gd = g;
  SingleFermion f(psi, s, ph, sc);
  integ.step_MD(f, gd, s.dt);
  const double e_psi = rel_diff(psi.data(), std::vector<double>(p1.data(), p1.data() + p1.size()));
  const double e_y = rel_diff(gd.Y.data(), Yref.data());

  // curl written per face: B_a(J) = d_b A_c - d_c A_b with forward differences
  Eigen::MatrixXd Cu = Eigen::MatrixXd::Zero(Eigen::Index(n3), Eigen::Index(n3));
  for (std::size_t J = 0; J < N; ++J)
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      const auto row = Eigen::Index(a * N + J);
      Cu(row, Eigen::Index(c * N + s.shift(J, b, 1))) += 1.0 / s.spacing[b];
      Cu(row, Eigen::Index(c * N + J)) -= 1.0 / s.spacing[b];
      Cu(row, Eigen::Index(b * N + s.shift(J, c, 1))) -= 1.0 / s.spacing[c];
      Cu(row, Eigen::Index(b * N + J)) += 1.0 / s.spacing[c];
    }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(Eigen::Index(2 * n3), Eigen::Index(2 * n3));
  Q.topRightCorner(Eigen::Index(n3), Eigen::Index(n3)) =
      4.0 * kPi * kC * kC * Eigen::MatrixXd::Identity(Eigen::Index(n3), Eigen::Index(n3));
  Q.bottomLeftCorner(Eigen::Index(n3), Eigen::Index(n3)) = -(Cu.transpose() * Cu) / (4.0 * kPi);
  const Eigen::MatrixXd I6 = Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
  Eigen::VectorXd x0(Eigen::Index(2 * n3));
  for (std::size_t i = 0; i < n3; ++i) {
    x0(Eigen::Index(i)) = g.A.data()[i];
    x0(Eigen::Index(n3 + i)) = g.Y.data()[i];
  }
  const Eigen::VectorXd x1 = (I6 - 0.5 * s.dt * Q).partialPivLu().solve((I6 + 0.5 * s.dt * Q) * x0);
  GaugeState gg = g;
  integ.step_MG(gg, 0.0, s.dt);
  std::vector<double> got = gg.A.data();
  got.insert(got.end(), gg.Y.data().begin(), gg.Y.data().end());
  const double e_g = rel_diff(got, std::vector<double>(x1.data(), x1.data() + x1.size()));
  const bool ok = e_psi <= 1e-12 && e_y <= 1e-12 && e_g <= 1e-12;
  return {ok, fmt("2x2x2: step_MD psi %.2e, Y %.2e; step_MG (A, Y) %.2e (relative, need <= 1e-12)", e_psi, e_y, e_g)};
}

// C7
struct Observables {
  double h1, h2, h3, p, q;
};

Observables observe(const FieldState& st, const Physics& ph, const LatticeSpec& s) {
  return {eval_H1(st.psi, WilsonLineCache(st.gauge.A, ph.coupling(), s), s), eval_H2(st.psi, st.gauge.phi, ph, s),
          eval_H3(st.gauge, s), st.psi.probability(s), net_charge(st.psi, ph, s)};
}

double obs_diff(const Observables& a, const Observables& b) {
  auto r = [](double x, double y) { return std::abs(x - y) / std::max(1e-300, std::max(std::abs(x), std::abs(y))); };
  return std::max({r(a.h1, b.h1), r(a.h2, b.h2), r(a.h3, b.h3), r(a.p, b.p), r(a.q, b.q)});
}

Outcome gauge_invariance() {
  const LatticeSpec s = cube(4, 0.8, 0.1);
  const Physics ph{0.7, 0.6};
  oracle::Gen gen(77);
  FieldState st(s.sites());
  st.psi = gen.spinor(s, 0.5);
  st.gauge.A = gen.edge(s, 0.5);
  st.gauge.Y = gen.edge(s, 0.1);
  VertexField theta(s.sites());
  gen.fill(theta.data(), 2.0);
  FieldState tr = st;
  gauge_transform(tr, theta, ph.coupling(), s);
  const double before = obs_diff(observe(st, ph, s), observe(tr, ph, s));

  SolverConfig sc;
  Stepper a(st, s, ph, sc, 2), b(tr, s, ph, sc, 2);
  for (int i = 0; i < 100; ++i) {
    a.step();
    b.step();
  }
  const double after = obs_diff(observe(st, ph, s), observe(tr, ph, s));
  // evolving then transforming equals transforming then evolving
  FieldState st_tr = st;
  gauge_transform(st_tr, theta, ph.coupling(), s);
  std::vector<double> x = st_tr.psi.data(), y = tr.psi.data();
  x.insert(x.end(), st_tr.gauge.A.data().begin(), st_tr.gauge.A.data().end());
  y.insert(y.end(), tr.gauge.A.data().begin(), tr.gauge.A.data().end());
  const double commute = rel_diff(x, y);
  const bool ok = before <= 1e-10 && after <= 1e-10 && commute <= 1e-10;
  return {ok, fmt("H1, H2, H3, P, Q relative differences: before %.2e, after 100 steps %.2e; state commutation %.2e "
                  "(need <= 1e-10)",
                  before, after, commute)};
}

// C8
json schwinger_run(const std::string& file, const std::string& out) {
  return run_scenario(config_named(file, out)).values;
}

Outcome schwinger() {
  const json full = schwinger_run("schwinger.json", "schwinger");
  const json sub = schwinger_run("schwinger_subthreshold.json", "schwinger_06");
  if (!full.contains("schwinger") || !sub.contains("schwinger")) return {false, "analysis missing"};
  const json& a = full["schwinger"];
  const json& b = sub["schwinger"];
  const std::vector<double> env = a["fermion_energy_lower_envelope"];
  const double g0 = a["gauge_energy_initial"], g1 = a["gauge_energy_end"];
  const bool decays = g1 < g0;
  const bool chirp = a.contains("half_period_last") && double(a["half_period_last"]) < double(a["half_period_first"]);
  const double early = env[4] - env[0], late = env[9] - env[5];
  const bool saturates = early > 0.0 && late < early;
  const double amp = a["ez_amplitude_last_tenth"];
  const bool amp_ok = amp >= 0.55 && amp <= 0.80;
  const bool q_ok = double(a["charge_max_abs"]) <= double(a["charge_noise_floor"]) &&
                    double(b["charge_max_abs"]) <= double(b["charge_noise_floor"]);
  const double f1 = a["fermion_energy_end"], f06 = b["fermion_energy_end"];
  const bool sub_ok = f1 > 0.0 && f06 < 0.2 * f1;
  std::ostringstream os;
  os << fmt("gauge energy %.3e -> %.3e (%s); ", g0, g1, decays ? "decays" : "does not decay");
  if (a.contains("half_period_first"))
    os << fmt("half period %.3f -> %.3f (%s); ", double(a["half_period_first"]), double(a["half_period_last"]),
              chirp ? "chirp" : "no chirp");
  else
    os << "fewer than 4 zero crossings; ";
  os << fmt("fermion envelope growth %.3e then %.3e; E_z amplitude %.3f E_S (need 0.55..0.80); |Q| max %.2e / floor "
            "%.2e; fermion energy 0.6 E_S %.3e vs 1.0 E_S %.3e",
            early, late, amp, double(a["charge_max_abs"]), double(a["charge_noise_floor"]), f06, f1);
  return {decays && chirp && saturates && amp_ok && q_ok && sub_ok, os.str()};
}

// C9
Outcome kerr() {
  const json v = run_scenario(config_named("kerr.json", "kerr")).values;
  if (!v.contains("kerr") || !v["kerr"].contains("axis_ratio_source")) return {false, "no trace window"};
  const double src = v["kerr"]["axis_ratio_source"], tgt = v["kerr"]["axis_ratio_target"];
  const bool ok = src <= 0.02 && tgt > 0.02 && tgt > src;
  return {ok, fmt("B-trace axis ratio source %.4f (need <= 0.02), target %.4f (need > 0.02)", src, tgt)};
}

// C10
Outcome sampler() {
  LatticeSpec s;
  s.n = {4, 4, 4};
  const double np = 0.15, nm = 0.35;
  const EigenspinorTable tab(1.0, s);
  EnsembleConfig cfg;
  cfg.members = 1024;
  cfg.seed = 10;
  cfg.n_plus = EnsembleConfig::constant(np);
  cfg.n_minus = EnsembleConfig::constant(nm);
  const std::size_t K = s.sites();
  const double V = s.volume();
  std::vector<double> xi(2 * K), eta(2 * K);
  // moments that vanish: spin cross terms, pseudo-moments, and xi-eta mixing
  std::vector<std::complex<double>> cross(K), pseudo(K), mixed(K);
  for (int m = 0; m < cfg.members; ++m) {
    const ModeAmplitudes a = draw_amplitudes(cfg, tab, s, m);
    for (std::size_t i = 0; i < K; ++i)
      for (int spin = 0; spin < 2; ++spin) {
        // M amplitude times F amplitude: the sign of 1 - 2n sits on F
        xi[spin * K + i] += double(a.xi_sign[i]) * std::norm(a.xi[spin][i]) / V;
        eta[spin * K + i] += double(a.eta_sign[i]) * std::norm(a.eta[spin][i]) / V;
      }
    for (std::size_t i = 0; i < K; ++i) {
      cross[i] += a.xi[0][i] * std::conj(a.xi[1][i]) / V;
      pseudo[i] += a.eta[0][i] * a.eta[0][i] / V;
      mixed[i] += a.xi[1][i] * std::conj(a.eta[1][i]) / V;
    }
  }
  const double bound = 4.0 / std::sqrt(double(cfg.members));
  double worst = 0.0;
  for (std::size_t i = 0; i < 2 * K; ++i)
    worst = std::max({worst, std::abs(xi[i] / cfg.members - (1.0 - 2.0 * np)),
                      std::abs(eta[i] / cfg.members - (1.0 - 2.0 * nm))});
  double off = 0.0;
  for (std::size_t i = 0; i < K; ++i)
    off = std::max({off, std::abs(cross[i]) / cfg.members, std::abs(pseudo[i]) / cfg.members,
                    std::abs(mixed[i]) / cfg.members});
  return {worst <= bound && off <= bound,
          fmt("N_e = 1024, 64 modes x 2 spins, n+ = %.2f, n- = %.2f: second moments max deviation %.3e, vanishing "
              "moments max %.3e (bound 4/sqrt(N_e) = %.3e)",
              np, nm, worst, off, bound)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"C1", free_fermion},       {"C2", doubling},         {"C3", vacuum_spectra}, {"C4", conservation},
      {"C5", convergence},        {"C6", oracle_equivalence}, {"C7", gauge_invariance}, {"C8", schwinger},
      {"C9", kerr},               {"C10", sampler}};
  const std::map<std::string, std::string> title{
      {"C1", "free-fermion gap and ridge"},   {"C2", "doubling-free Brillouin zone"},
      {"C3", "vacuum field spectra"},         {"C4", "long-run conservation"},
      {"C5", "convergence order"},            {"C6", "oracle equivalence"},
      {"C7", "gauge invariance"},             {"C8", "Schwinger pair creation"},
      {"C9", "vacuum Kerr birefringence"},    {"C10", "statistical sampler moments"}};
  std::set<std::string> pick(argv + 1, argv + argc);
  std::filesystem::create_directories(out_root());
  int failures = 0;
  for (const auto& [name, fn] : all) {
    if (!pick.empty() && !pick.count(name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ' ' << title.at(name) << ": " << o.detail
              << fmt(" [%.0f s]", sec) << std::endl;
  }
  return failures;
}
