#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "qedlat/experiments.hpp"

namespace qedlat {

using nlohmann::json;

namespace {

bool is_ensemble(Scenario s) { return s == Scenario::SchwingerPairs || s == Scenario::VacuumKerr; }

Physics stepping_physics(const ScenarioConfig& c) {
  Physics p = c.physics;
  // the dispersion run evolves the free Dirac field
  if (c.scenario == Scenario::FreeFermionDispersion) p.charge = 0.0;
  return p;
}

double mean_of(std::span<const double> v) { return pairwise_sum(v) / double(v.size()); }

// plane average of a face component at z index k
double plane_mean(const FaceField& f, int comp, const LatticeSpec& s, int k) {
  const std::size_t plane = std::size_t(s.n[0]) * s.n[1];
  return mean_of(f[comp].subspan(std::size_t(k) * plane, plane));
}

std::vector<double> tail(const std::vector<double>& v, std::size_t from) {
  return {v.begin() + std::ptrdiff_t(std::min(from, v.size())), v.end()};
}

void require_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw OutputError("cannot create output directory " + dir);
}

}  // namespace

double trace_axis_ratio(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw std::invalid_argument("trace needs at least 3 matching samples");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double tr = 0.5 * (sxx + syy);
  const double d = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
  const double big = tr + d, small = std::max(0.0, tr - d);
  if (!(big > 0.0)) return 0.0;
  return std::sqrt(small / big);
}

ScenarioRun::ScenarioRun(const ScenarioConfig& cfg) : ScenarioRun(cfg, true) {}

ScenarioRun::ScenarioRun(const ScenarioConfig& cfg, bool initialise) : cfg_(cfg) {
  cfg_.validate();
  build(initialise);
}

ScenarioRun::~ScenarioRun() = default;

void ScenarioRun::build(bool initialise) {
  const LatticeSpec& s = cfg_.lattice;
  const std::size_t N = s.sites();
  const Physics phys = stepping_physics(cfg_);
  gauge_ = GaugeState(N);

  if (is_ensemble(cfg_.scenario)) {
    table_ = std::make_unique<EigenspinorTable>(cfg_.physics.mass, s);
    if (initialise) {
      EnsembleConfig ec;
      ec.members = cfg_.members;
      ec.n_plus = EnsembleConfig::constant(cfg_.n_plus);
      ec.n_minus = EnsembleConfig::constant(cfg_.n_minus);
      ec.seed = cfg_.seed;
      ec.threads = cfg_.threads;
      ens_ = sample_background(ec, *table_, s);
    } else {
      ens_.pairs.assign(std::size_t(cfg_.members), StochasticPair{SpinorField(N), SpinorField(N)});
      ens_.ref.rho = VertexField(N);
    }
  } else {
    psi_ = SpinorField(N);
    if (initialise && cfg_.noise_sigma > 0.0) {
      std::mt19937_64 rng(cfg_.seed);
      std::normal_distribution<double> nd(0.0, cfg_.noise_sigma);
      for (double& v : psi_.data()) v = nd(rng);
    }
  }

  if (initialise) {
    bool any = false;
    for (double f : cfg_.field_es) any = any || f != 0.0;
    if (any) {
      const double es = cfg_.critical_field();
      for (int a = 0; a < 3; ++a)
        std::fill(gauge_.Y[a].begin(), gauge_.Y[a].end(), -cfg_.field_es[a] * es / (4.0 * kPi * kC));
    }
    if (is_ensemble(cfg_.scenario)) freeze_reference(ens_, gauge_, *table_, s, phys, cfg_.threads);
  }

  integ_ = std::make_unique<Integrator>(s, phys, cfg_.solver, cfg_.order);
  if (is_ensemble(cfg_.scenario))
    sector_ = std::make_unique<EnsembleSector>(ens_, s, phys, cfg_.solver, cfg_.threads);
  else
    sector_ = std::make_unique<SingleFermion>(psi_, s, phys, cfg_.solver);

  if (s.cut_z()) {
    mur_ = std::make_unique<MurBoundaryZ>(s);
    if (initialise) mur_->prime(gauge_);
    integ_->hooks().gauge_clamp = [this](const GaugeState& before, const GaugeState* trial, double dt,
                                         GaugeClamp& c) { mur_->clamp(before, trial, dt, c); };
    integ_->hooks().after_step = [this](GaugeState& g, double) { mur_->commit(g); };
  }
  if (cfg_.source) {
    tfsf_ = std::make_unique<TfsfSource>(s, *cfg_.source, cfg_.critical_field());
    integ_->hooks().gauge_forcing = [this](double t, EdgeField& f) { tfsf_->forcing(t, f); };
  }
  if (cfg_.dhw_every > 0 && is_ensemble(cfg_.scenario)) {
    dhw_ = std::make_unique<DhwAnalyzer>(s, cfg_.physics);
    if (initialise) dhw_->set_reference(ens_, gauge_);
  }

  const double rec_dt = s.dt * cfg_.record_every;
  auto line = [&](const std::string& name) {
    lines_.emplace_back(s.n[2], s.spacing[2], rec_dt);
    line_names_.push_back(name);
  };
  switch (cfg_.scenario) {
    case Scenario::FreeFermionDispersion:
      for (int c = 1; c <= 4; ++c) line("psi" + std::to_string(c));
      break;
    case Scenario::VacuumSpectra:
      for (int c = 1; c <= 4; ++c) line("psi" + std::to_string(c));
      line("Ex");
      line("Ez");
      break;
    case Scenario::SchwingerPairs:
      line("Ez");
      break;
    default:
      break;
  }

  if (initialise) {
    record();
    if (dhw_) record_dhw();
  }
}

void ScenarioRun::advance(long until) {
  until = std::min(until, cfg_.steps);
  const double dt = cfg_.lattice.dt;
  while (step_ < until) {
    try {
      integ_->step(*sector_, gauge_, time_, dt);
    } catch (const NonConvergence& e) {
      throw NonConvergence("step " + std::to_string(step_ + 1) + ": " + e.what(), e.residual(), e.iterations(),
                           e.best_iterate());
    }
    ++step_;
    time_ = double(step_) * dt;
    if (step_ % cfg_.record_every == 0) record();
    if (dhw_ && step_ % cfg_.dhw_every == 0) record_dhw();
  }
}

void ScenarioRun::record() {
  const LatticeSpec& s = cfg_.lattice;
  const Physics phys = stepping_physics(cfg_);
  const WilsonLineCache lines(gauge_.A, phys.coupling(), s);
  auto put = [&](const std::string& k, double v) { series_[k].push_back(v); };
  const double es = cfg_.physics.charge != 0.0 && cfg_.physics.mass > 0.0 ? cfg_.critical_field() : 1.0;

  put("t", time_);
  if (is_ensemble(cfg_.scenario)) {
    const EnsembleEnergy en = ensemble_energy(ens_, gauge_, s, phys);
    put("H_fermion", en.fermion);
    put("H_gauge", en.gauge);
    put("H_total", en.total);
    put("probability", ensemble_probability(ens_, s));
    put("charge", ensemble_net_charge(ens_, phys, s));
    EdgeField j;
    ensemble_current(ens_, lines, s, phys, cfg_.threads, j);
    put("j_z", mean_of(j[2]));
  } else {
    const double h1 = eval_H1(psi_, lines, s), h2 = eval_H2(psi_, gauge_.phi, phys, s), h3 = eval_H3(gauge_, s);
    put("H1", h1);
    put("H2", h2);
    put("H3", h3);
    put("H_total", h1 + h2 + h3);
    put("probability", psi_.probability(s));
    put("charge", net_charge(psi_, phys, s));
    put("j_z", mean_of(current_increment(psi_, lines, phys, s)[2]));
  }
  put("A_z", mean_of(gauge_.A[2]));
  // E = -4 pi c Y, in units of E_S when the field scale is defined
  put("E_z", -4.0 * kPi * kC * mean_of(gauge_.Y[2]) / es);

  if (cfg_.scenario == Scenario::VacuumKerr) {
    const FaceField B = curl(gauge_.A, s);
    put("Bx_source", plane_mean(B, 0, s, cfg_.source->plane));
    put("By_source", plane_mean(B, 1, s, cfg_.source->plane));
    put("Bx_target", plane_mean(B, 0, s, cfg_.source->target_plane));
    put("By_target", plane_mean(B, 1, s, cfg_.source->target_plane));
  }

  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const std::string& n = line_names_[l];
    if (n[0] == 'p') {
      const int c = n[3] - '1';
      lines_[l].push(time_, psi_.re(c), psi_.im(c));
    } else {
      const int a = n == "Ex" ? 0 : 2;
      std::vector<double> e(gauge_.Y[a].begin(), gauge_.Y[a].end());
      for (double& v : e) v *= -4.0 * kPi * kC;
      lines_[l].push(time_, e);
    }
  }
}

void ScenarioRun::record_dhw() {
  const DhwObservables o = dhw_->evaluate(ens_, gauge_);
  series_["dhw_t"].push_back(time_);
  series_["dhw_n_plus"].push_back(o.n_plus);
  series_["dhw_n_minus"].push_back(o.n_minus);
  series_["dhw_n_plus_local"].push_back(o.n_plus_local);
  series_["dhw_n_minus_local"].push_back(o.n_minus_local);
}

Checkpoint ScenarioRun::checkpoint() const {
  Checkpoint ck;
  ck.put("config", scenario_to_json(cfg_).dump());
  ck.put("build", build_id());
  ck.put("clock", std::vector<double>{double(step_), time_});
  std::vector<double> g = gauge_.A.data();
  g.insert(g.end(), gauge_.Y.data().begin(), gauge_.Y.data().end());
  g.insert(g.end(), gauge_.phi.data().begin(), gauge_.phi.data().end());
  ck.put("gauge", g);
  if (is_ensemble(cfg_.scenario)) {
    std::vector<double> e;
    e.reserve(ens_.pairs.size() * 2 * 8 * cfg_.lattice.sites());
    for (const auto& p : ens_.pairs) {
      e.insert(e.end(), p.M.data().begin(), p.M.data().end());
      e.insert(e.end(), p.F.data().begin(), p.F.data().end());
    }
    ck.put("ensemble", e);
    std::vector<double> r = ens_.ref.rho.data();
    r.insert(r.end(), ens_.ref.current.begin(), ens_.ref.current.end());
    r.push_back(ens_.ref.energy);
    r.push_back(ens_.ref.frozen ? 1.0 : 0.0);
    ck.put("ensemble_reference", r);
  } else {
    ck.put("spinor", psi_.data());
  }
  if (mur_) ck.put("mur", mur_->save());
  if (dhw_) ck.put("dhw_reference", dhw_->reference());
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    std::vector<double> v{lines_[l].start_time()};
    for (const auto& z : lines_[l].samples()) {
      v.push_back(z.real());
      v.push_back(z.imag());
    }
    ck.put("line." + line_names_[l], v);
  }
  for (const auto& [k, v] : series_) ck.put("series." + k, v);
  return ck;
}

std::unique_ptr<ScenarioRun> ScenarioRun::resume(const Checkpoint& ck) {
  ScenarioConfig cfg;
  try {
    cfg = scenario_from_json(json::parse(ck.text("config")));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  std::unique_ptr<ScenarioRun> run(new ScenarioRun(cfg, false));
  const std::size_t N = cfg.lattice.sites();
  auto expect = [](const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) throw CheckpointError(std::string("checkpoint section '") + what + "' has the wrong size");
  };

  const auto clock = ck.doubles("clock");
  expect(clock, 2, "clock");
  run->step_ = long(clock[0]);
  run->time_ = clock[1];
  const auto g = ck.doubles("gauge");
  expect(g, 7 * N, "gauge");
  std::copy_n(g.begin(), 3 * N, run->gauge_.A.data().begin());
  std::copy_n(g.begin() + 3 * N, 3 * N, run->gauge_.Y.data().begin());
  std::copy_n(g.begin() + 6 * N, N, run->gauge_.phi.data().begin());
  if (is_ensemble(cfg.scenario)) {
    const auto e = ck.doubles("ensemble");
    expect(e, std::size_t(cfg.members) * 16 * N, "ensemble");
    auto it = e.begin();
    for (auto& p : run->ens_.pairs) {
      std::copy_n(it, 8 * N, p.M.data().begin());
      std::copy_n(it + 8 * N, 8 * N, p.F.data().begin());
      it += 16 * N;
    }
    const auto r = ck.doubles("ensemble_reference");
    expect(r, N + 5, "ensemble_reference");
    std::copy_n(r.begin(), N, run->ens_.ref.rho.data().begin());
    run->ens_.ref.current = {r[N], r[N + 1], r[N + 2]};
    run->ens_.ref.energy = r[N + 3];
    run->ens_.ref.frozen = r[N + 4] != 0.0;
  } else {
    const auto p = ck.doubles("spinor");
    expect(p, 8 * N, "spinor");
    run->psi_.data() = p;
  }
  if (run->mur_) run->mur_->restore(ck.doubles("mur"));
  if (run->dhw_) run->dhw_->restore_reference(ck.doubles("dhw_reference"));
  for (std::size_t l = 0; l < run->lines_.size(); ++l) {
    const auto v = ck.doubles("line." + run->line_names_[l]);
    if (v.empty() || v.size() % 2 != 1) throw CheckpointError("checkpoint line section is malformed");
    std::vector<std::complex<double>> z((v.size() - 1) / 2);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = {v[1 + 2 * i], v[2 + 2 * i]};
    try {
      run->lines_[l].restore(v[0], std::move(z));
    } catch (const SamplingError& e) {
      throw CheckpointError(e.what());
    }
  }
  for (const auto& [name, bytes] : ck.sections)
    if (name.rfind("series.", 0) == 0) run->series_[name.substr(7)] = ck.doubles(name);
  return run;
}

namespace {

json analyse_free_fermion(const std::vector<SpectrumGrid>& psi, const ScenarioConfig& c) {
  const SpectrumGrid g = summed_power(psi);
  const double m = c.physics.mass;
  const Schedule sch = Schedule::of_order(c.order);
  LatticeSpec rec = c.lattice;
  rec.dt *= c.record_every;
  double worst = 0.0;
  int columns = 0;
  for (int ik = 0; ik < g.nk; ++ik) {
    if (std::abs(g.k(ik)) > 4.0 * m + 1e-12) continue;
    const auto w = lattice_dispersion_massive_oracle({0.0, 0.0, g.k(ik)}, m, c.lattice, sch);
    const double up = ridge_frequency(g, ik, +1), lo = ridge_frequency(g, ik, -1);
    worst = std::max({worst, std::abs(up - w.back()) / g.dw, std::abs(lo - w.front()) / g.dw});
    ++columns;
  }
  return {{"gap", spectral_gap(g)},
          {"gap_expected", 2.0 * m},
          {"frequency_bin", g.dw},
          {"ridge_max_deviation_bins", worst},
          {"ridge_columns", columns},
          {"parseval_defect", g.parseval_defect}};
}

json analyse_vacuum(const SpectrumGrid& ex, const SpectrumGrid& ez, const ScenarioConfig& c) {
  const double m = c.physics.mass;
  const int i0 = ez.k_index(0.0);
  // the pair continuum starts at 2m; its strongest bin wanders with the noise
  const double gap = continuum_onset(ez, i0, 0.1);
  const double gap_peak = ridge_frequency(ez, i0, +1);
  double min_band = std::numeric_limits<double>::infinity(), cont_dev = 0.0, pair_dev = 0.0;
  for (int ik = 0; ik < ex.nk; ++ik) {
    const double k = ex.k(ik);
    if (k == 0.0 || std::abs(k) > 4.0 * m + 1e-12) continue;
    const double lc = lattice_dispersion_massless({0.0, 0.0, k}, c.lattice);
    std::vector<double> col;
    double band = 0.0;
    for (int iw = ex.nw / 2 + 1; iw < ex.nw; ++iw) {
      const double p = ex.power(ik, iw);
      col.push_back(p);
      if (std::abs(ex.omega(iw) - lc) <= 2.0 * ex.dw + 1e-12) band = std::max(band, p);
    }
    std::nth_element(col.begin(), col.begin() + col.size() / 2, col.end());
    const double med = col[col.size() / 2];
    min_band = std::min(min_band, med > 0.0 ? band / med : std::numeric_limits<double>::infinity());
    cont_dev = std::max(cont_dev, std::abs(lc - kC * std::abs(k)) / ex.dw);
    pair_dev = std::max(pair_dev, std::abs(ridge_frequency(ez, ik, +1) - benchmark_dispersions(k, 0.0, m).pair) / ez.dw);
  }
  return {{"ez_gap", gap},
          {"ez_strongest_bin", gap_peak},
          {"gap_expected", 2.0 * m},
          {"frequency_bin", ez.dw},
          {"ex_light_cone_band_over_median_min", min_band},
          {"light_cone_lattice_vs_continuum_bins", cont_dev},
          {"ez_ridge_vs_pair_branch_max_bins", pair_dev}};
}

}  // namespace

RunSummary ScenarioRun::summarize(bool write) const {
  RunSummary out;
  json& v = out.values;
  v["scenario"] = to_string(cfg_.scenario);
  v["steps_done"] = step_;
  v["time"] = time_;
  v["seed"] = cfg_.seed;
  v["build"] = build_id();

  std::map<std::string, SpectrumGrid> spectra;
  for (std::size_t l = 0; l < lines_.size(); ++l)
    if (lines_[l].frames() >= 2) {
      // driven gauge fields carry a secular ramp; fermion lines are used as recorded
      const bool field = line_names_[l][0] == 'E';
      spectra.emplace(line_names_[l], lines_[l].spectrum(field));
    }

  const auto& S = series_;
  auto has = [&](const char* k) { return S.count(k) && !S.at(k).empty(); };
  try {
    switch (cfg_.scenario) {
      case Scenario::FreeFermionDispersion:
      case Scenario::VacuumSpectra: {
        if (spectra.count("psi1")) {
          std::vector<SpectrumGrid> psi;
          for (int c = 1; c <= 4; ++c) psi.push_back(spectra.at("psi" + std::to_string(c)));
          v["fermion_spectrum"] = analyse_free_fermion(psi, cfg_);
        }
        if (spectra.count("Ex") && spectra.count("Ez")) v["field_spectra"] = analyse_vacuum(spectra.at("Ex"), spectra.at("Ez"), cfg_);
        break;
      }
      case Scenario::ConservationLongRun: {
        const auto& t = S.at("t");
        const auto& h = S.at("H_total");
        const auto& p = S.at("probability");
        const double h0 = std::abs(h.front()) > 0.0 ? std::abs(h.front()) : 1.0;
        const double p0 = std::abs(p.front()) > 0.0 ? std::abs(p.front()) : 1.0;
        double early = 0.0, all = 0.0, pmax = 0.0;
        std::vector<double> rel(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
          rel[i] = (h[i] - h.front()) / h0;
          all = std::max(all, std::abs(rel[i]));
          if (t[i] <= 1000.0 * cfg_.lattice.dt + 1e-9) early = std::max(early, std::abs(rel[i]));
          pmax = std::max(pmax, std::abs(p[i] - p.front()) / p0);
        }
        json c{{"energy_error_max", all}, {"energy_error_first_1000_steps", early}, {"probability_error_max", pmax}};
        if (h.size() >= 6) {
          const std::size_t half = h.size() / 2;
          const LineFit f = fit_line(tail(t, half), tail(rel, half));
          c["second_half_slope"] = f.slope;
          c["second_half_slope_stderr"] = f.slope_stderr;
          c["second_half_drift"] = f.slope * (t.back() - t[half]);
        }
        v["conservation"] = c;
        break;
      }
      case Scenario::SchwingerPairs: {
        const auto& t = S.at("t");
        const auto& ez = S.at("E_z");
        const auto& hf = S.at("H_fermion");
        const auto& hg = S.at("H_gauge");
        const auto& q = S.at("charge");
        const std::size_t n = t.size(), last = n - std::max<std::size_t>(1, n / 10);
        double amp = 0.0;
        for (std::size_t i = last; i < n; ++i) amp = std::max(amp, std::abs(ez[i]));
        // half periods between zero crossings of the mean field
        std::vector<double> cross;
        for (std::size_t i = 1; i < n; ++i)
          if ((ez[i - 1] < 0.0) != (ez[i] < 0.0))
            cross.push_back(t[i - 1] + (t[i] - t[i - 1]) * ez[i - 1] / (ez[i - 1] - ez[i]));
        json sw{{"ez_initial", ez.front()},
                {"ez_amplitude_last_tenth", amp},
                {"fermion_energy_end", hf.back()},
                {"gauge_energy_initial", hg.front()},
                {"gauge_energy_end", hg.back()},
                {"zero_crossings", cross.size()}};
        if (cross.size() >= 4) {
          sw["half_period_first"] = cross[1] - cross[0];
          sw["half_period_last"] = cross.back() - cross[cross.size() - 2];
        }
        // lower envelope of the fermion energy in ten windows
        std::vector<double> env;
        for (int w = 0; w < 10; ++w) {
          const std::size_t lo = n * w / 10, hi = std::max(lo + 1, n * (w + 1) / 10);
          env.push_back(*std::min_element(hf.begin() + lo, hf.begin() + std::min(hi, n)));
        }
        sw["fermion_energy_lower_envelope"] = env;
        double qmax = 0.0;
        for (double x : q) qmax = std::max(qmax, std::abs(x));
        // rounding scale: one unit occupation per mode spinor at the solver tolerance
        const double floor =
            10.0 * std::max(std::abs(q.front()), std::abs(cfg_.physics.charge) * cfg_.solver.rel_tolerance * 4.0 *
                                                     double(cfg_.lattice.sites()));
        sw["charge_max_abs"] = qmax;
        sw["charge_noise_floor"] = floor;
        v["schwinger"] = sw;
        break;
      }
      case Scenario::VacuumKerr: {
        const auto& t = S.at("t");
        const SourceConfig& src = *cfg_.source;
        const TfsfSource probe(cfg_.lattice, src, cfg_.critical_field());
        const double v_ph = src.omega / probe.wavenumber();
        const double ramp = src.ramp_periods * 2.0 * kPi / src.omega;
        const double t_on = (src.target_plane + 1 - src.plane) * cfg_.lattice.spacing[2] / v_ph + ramp;
        std::size_t from = 0;
        while (from < t.size() && t[from] < t_on) ++from;
        json k{{"window_start", t_on}, {"window_samples", t.size() - std::min(from, t.size())}};
        if (t.size() - std::min(from, t.size()) >= 3) {
          k["axis_ratio_source"] = trace_axis_ratio(tail(S.at("Bx_source"), from), tail(S.at("By_source"), from));
          k["axis_ratio_target"] = trace_axis_ratio(tail(S.at("Bx_target"), from), tail(S.at("By_target"), from));
        }
        v["kerr"] = k;
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    v["analysis_error"] = e.what();
  }
  if (has("dhw_t")) {
    v["dhw"] = {{"n_plus_end", S.at("dhw_n_plus").back()}, {"n_minus_end", S.at("dhw_n_minus").back()}};
  }

  if (!write) return out;
  const std::string& dir = cfg_.output;
  require_dir(dir);
  auto file = [&](const std::string& name) {
    out.files.push_back(name);
    return (std::filesystem::path(dir) / name).string();
  };
  std::vector<std::string> head, dhead;
  std::vector<std::vector<double>> cols, dcols;
  for (const auto& [k, col] : S) {
    if (k == "t" || k == "dhw_t") continue;
    (k.rfind("dhw_", 0) == 0 ? dhead : head).push_back(k);
    (k.rfind("dhw_", 0) == 0 ? dcols : cols).push_back(col);
  }
  head.insert(head.begin(), "t");
  cols.insert(cols.begin(), S.at("t"));
  write_series_csv(file("series.csv"), head, cols);
  if (has("dhw_t")) {
    dhead.insert(dhead.begin(), "t");
    dcols.insert(dcols.begin(), S.at("dhw_t"));
    write_series_csv(file("dhw.csv"), dhead, dcols);
    const DhwObservables o = dhw_->evaluate(ens_, gauge_);
    std::vector<double> idx(o.rho_plus.size());
    std::iota(idx.begin(), idx.end(), 0.0);
    write_series_csv(file("dhw_densities.csv"), {"site", "rho_plus", "rho_minus"}, {idx, o.rho_plus, o.rho_minus});
  }
  json axes;
  for (const auto& [name, g] : spectra) {
    write_spectrum_csv(file("spectrum_" + name + ".csv"), g);
    axes[name] = spectrum_axes(g);
  }
  if (!axes.empty()) v["spectra"] = axes;
  json manifest{{"values", v}, {"config", scenario_to_json(cfg_)}, {"build", build_id()}, {"seed", cfg_.seed}};
  out.files.push_back("manifest.json");
  manifest["files"] = out.files;
  write_json((std::filesystem::path(dir) / "manifest.json").string(), manifest);
  return out;
}

RunSummary continue_run(ScenarioRun& run) {
  const ScenarioConfig& c = run.config();
  if (c.checkpoint_every > 0) require_dir(c.output);
  const std::string ck = (std::filesystem::path(c.output) / "checkpoint.bin").string();
  while (!run.finished()) {
    const long next = c.checkpoint_every > 0 ? (run.step_index() / c.checkpoint_every + 1) * c.checkpoint_every : c.steps;
    run.advance(next);
    if (c.checkpoint_every > 0 && !run.finished()) run.checkpoint().save(ck);
  }
  return run.summarize(true);
}

RunSummary run_scenario(const ScenarioConfig& cfg) {
  ScenarioRun run(cfg);
  return continue_run(run);
}

}  // namespace qedlat
