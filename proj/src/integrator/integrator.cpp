#include "qedlat/integrator.hpp"

#include <cmath>
#include <string>

namespace qedlat {

double Schedule::jump_a(int l) { return 1.0 / (2.0 - std::pow(2.0, 1.0 / (2.0 * l + 1.0))); }
double Schedule::jump_b(int l) { return 1.0 - 2.0 * jump_a(l); }

Schedule Schedule::of_order(int order) {
  Schedule s;
  s.order_ = order;
  if (order == 1) {
    s.stages_ = {{Substep::Mass, 1.0}, {Substep::Dirac, 1.0}, {Substep::Gauge, 1.0}};
    s.weights_ = {1.0};
    return s;
  }
  if (order < 1 || order % 2 != 0 || order > 10)
    throw ConfigError("integrator order must be 1 or an even number up to 10, got " + std::to_string(order));
  std::vector<double> w{1.0};
  for (int l = 1; 2 * l + 2 <= order; ++l) {
    const double a = jump_a(l), b = jump_b(l);
    std::vector<double> next;
    for (double f : {a, b, a})
      for (double x : w) next.push_back(f * x);
    w = std::move(next);
  }
  s.weights_ = w;
  for (double x : w) {
    const std::vector<Stage> strang{{Substep::Mass, 0.5 * x}, {Substep::Dirac, 0.5 * x}, {Substep::Gauge, x},
                                    {Substep::Dirac, 0.5 * x}, {Substep::Mass, 0.5 * x}};
    for (const Stage& st : strang) {
      if (st.kind == Substep::Mass && !s.stages_.empty() && s.stages_.back().kind == Substep::Mass)
        s.stages_.back().fraction += st.fraction;
      else
        s.stages_.push_back(st);
    }
  }
  return s;
}

DiracCayley::DiracCayley(const LatticeSpec& spec, const SolverConfig& cfg)
    : op_(spec), cfg_(cfg), rhs_(8 * spec.sites()), x_(8 * spec.sites()), tmp_(8 * spec.sites()) {}

SolveStats DiracCayley::advance(SpinorField& psi, const WilsonLineCache& lines, double dt) {
  op_.bind(lines);
  auto p = psi.flat();
  const std::size_t n = p.size();
  op_.apply(p, tmp_);
  const double h = 0.5 * dt;
  for (std::size_t i = 0; i < n; ++i) {
    rhs_[i] = p[i] + h * tmp_[i];
    x_[i] = p[i] + dt * tmp_[i];
  }
  LinearOperator sys;
  sys.dim = n;
  sys.tag = "kinetic Cayley";
  sys.apply = [this, h](std::span<const double> in, std::span<double> out) {
    op_.apply(in, out);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - h * out[i];
  };
  const SolveStats st = solve(sys, rhs_, x_, cfg_);
  std::copy(x_.begin(), x_.end(), p.begin());
  return st;
}

MaxwellCayley::MaxwellCayley(const LatticeSpec& spec, const SolverConfig& cfg)
    : spec_(spec), nb_(spec), cfg_(cfg), rhs_(6 * spec.sites()), x_(6 * spec.sites()) {}

LinearOperator MaxwellCayley::system(double dt) const {
  const std::size_t N = spec_.sites();
  LinearOperator sys;
  sys.dim = 6 * N;
  sys.tag = "gauge Cayley";
  const double ka = 2.0 * kPi * kC * kC * dt;  // (dt/2) 4 pi c^2
  const double ky = dt / (8.0 * kPi);           // (dt/2) / 4 pi
  sys.apply = [this, N, ka, ky](std::span<const double> in, std::span<double> out) {
    if (a_view_.sites() != N) a_view_ = EdgeField(N);
    std::copy(in.begin(), in.begin() + 3 * N, a_view_.data().begin());
    curl(a_view_, spec_, nb_, face_);
    curl_transpose(face_, spec_, nb_, ctc_);
    const auto& c = ctc_.data();
    for (std::size_t i = 0; i < 3 * N; ++i) {
      out[i] = in[i] - ka * in[3 * N + i];
      out[3 * N + i] = in[3 * N + i] + ky * c[i];
    }
    if (clamp_)
      for (std::size_t e : clamp_->edges) {
        out[e] = in[e];
        out[3 * N + e] = in[3 * N + e];
      }
  };
  return sys;
}

SolveStats MaxwellCayley::advance(GaugeState& g, double dt, const EdgeField* forcing, const GaugeClamp* clamp) {
  const std::size_t N = spec_.sites();
  const double ka = 2.0 * kPi * kC * kC * dt;
  const double ky = dt / (8.0 * kPi);
  curl(g.A, spec_, nb_, face_);
  curl_transpose(face_, spec_, nb_, ctc_);
  const auto& A = g.A.data();
  const auto& Y = g.Y.data();
  const auto& c = ctc_.data();
  for (std::size_t i = 0; i < 3 * N; ++i) {
    rhs_[i] = A[i] + ka * Y[i];
    rhs_[3 * N + i] = Y[i] - ky * c[i];
    if (forcing) rhs_[3 * N + i] += dt * forcing->data()[i];
  }
  // explicit predictor as initial guess
  for (std::size_t i = 0; i < 3 * N; ++i) {
    x_[i] = A[i] + 2.0 * ka * Y[i];
    x_[3 * N + i] = rhs_[3 * N + i] - ky * c[i];
  }
  if (clamp)
    for (std::size_t n = 0; n < clamp->edges.size(); ++n) {
      const std::size_t e = clamp->edges[n];
      rhs_[e] = x_[e] = clamp->a[n];
      rhs_[3 * N + e] = x_[3 * N + e] = clamp->y[n];
    }
  clamp_ = clamp;
  SolveStats st;
  try {
    st = solve(system(dt), rhs_, x_, cfg_);
  } catch (...) {
    clamp_ = nullptr;
    throw;
  }
  clamp_ = nullptr;
  std::copy(x_.begin(), x_.begin() + 3 * N, g.A.data().begin());
  std::copy(x_.begin() + 3 * N, x_.end(), g.Y.data().begin());

  bool has_phi = false;
  for (double v : g.phi.data())
    if (v != 0.0) {
      has_phi = true;
      break;
    }
  if (has_phi) {
    const EdgeField gp = grad(g.phi, spec_);
    for (std::size_t i = 0; i < 3 * N; ++i) g.A.data()[i] -= kC * dt * gp.data()[i];
  }
  return st;
}

void mass_rotation(SpinorField& psi, const VertexField& phi, const Physics& phys, double dt) {
  const std::size_t N = psi.sites();
  const double mc2 = phys.mass * kC * kC;
  auto ph = phi[0];
  bool uniform = true;
  for (double v : ph)
    if (v != ph[0]) {
      uniform = false;
      break;
    }
  for (int c = 0; c < 4; ++c) {
    const double sign = c < 2 ? 1.0 : -1.0;
    auto r = psi.re(c), im = psi.im(c);
    if (uniform) {
      const double a = (phys.charge * (N ? ph[0] : 0.0) + sign * mc2) * dt / kHbar;
      const double ca = std::cos(a), sa = std::sin(a);
      for (std::size_t J = 0; J < N; ++J) {
        const double nr = r[J] * ca + im[J] * sa;
        im[J] = im[J] * ca - r[J] * sa;
        r[J] = nr;
      }
    } else {
      for (std::size_t J = 0; J < N; ++J) {
        const double a = (phys.charge * ph[J] + sign * mc2) * dt / kHbar;
        const double ca = std::cos(a), sa = std::sin(a);
        const double nr = r[J] * ca + im[J] * sa;
        im[J] = im[J] * ca - r[J] * sa;
        r[J] = nr;
      }
    }
  }
}

SingleFermion::SingleFermion(SpinorField& psi, const LatticeSpec& spec, const Physics& phys,
                             const SolverConfig& cfg)
    : psi_(psi), spec_(spec), phys_(phys), cayley_(spec, cfg), mid_(spec.sites()) {}

void SingleFermion::mass_step(const VertexField& phi, double dt) { mass_rotation(psi_, phi, phys_, dt); }

SolveStats SingleFermion::dirac_step(const WilsonLineCache& lines, EdgeField& Y, double dt) {
  auto m = mid_.flat();
  auto p = psi_.flat();
  std::copy(p.begin(), p.end(), m.begin());
  const SolveStats st = cayley_.advance(psi_, lines, dt);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (m[i] + p[i]);
  current_bilinear(mid_, mid_, lines, spec_, dt * phys_.charge / kHbar, Y);
  return st;
}

Integrator::Integrator(const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg, int order)
    : spec_(spec), phys_(phys), cfg_(cfg), schedule_(Schedule::of_order(order)), maxwell_(spec, cfg) {
  spec_.validate();
  phys_.validate();
  cfg_.validate();
}

void Integrator::step_MM(FermionSector& fermions, const GaugeState& gauge, double dt) {
  fermions.mass_step(gauge.phi, dt);
}

SolveStats Integrator::step_MD(FermionSector& fermions, GaugeState& gauge, double dt) {
  lines_.rebuild(gauge.A, phys_.coupling(), spec_);
  return fermions.dirac_step(lines_, gauge.Y, dt);
}

SolveStats Integrator::step_MG(GaugeState& gauge, double t, double dt) {
  const EdgeField* f = nullptr;
  if (hooks_.gauge_forcing) {
    if (forcing_.sites() != spec_.sites()) forcing_ = EdgeField(spec_.sites());
    forcing_.fill(0.0);
    hooks_.gauge_forcing(t + 0.5 * dt, forcing_);
    f = &forcing_;
  }
  if (!hooks_.gauge_clamp) return maxwell_.advance(gauge, dt, f);
  const GaugeState before = gauge;
  GaugeClamp clamp;
  SolveStats total;
  for (int pass = 0; pass < std::max(1, hooks_.clamp_passes); ++pass) {
    hooks_.gauge_clamp(before, pass ? &gauge : nullptr, dt, clamp);
    if (pass) gauge = before;
    const SolveStats st = maxwell_.advance(gauge, dt, f, &clamp);
    total.iterations += st.iterations;
    total.relative_residual = st.relative_residual;
    total.method_used = st.method_used;
    total.fell_back = total.fell_back || st.fell_back;
  }
  return total;
}

void Integrator::step(FermionSector& fermions, GaugeState& gauge, double t, double dt) {
  double tau = t;
  bool lines_valid = false;
  last_iterations_ = 0;
  for (const Stage& st : schedule_.stages()) {
    const double h = st.fraction * dt;
    switch (st.kind) {
      case Substep::Mass:
        fermions.mass_step(gauge.phi, h);
        break;
      case Substep::Dirac:
        if (!lines_valid) {
          lines_.rebuild(gauge.A, phys_.coupling(), spec_);
          lines_valid = true;
        }
        last_iterations_ += fermions.dirac_step(lines_, gauge.Y, h).iterations;
        break;
      case Substep::Gauge:
        last_iterations_ += step_MG(gauge, tau, h).iterations;
        tau += h;
        lines_valid = false;
        break;
    }
  }
  if (hooks_.after_step) hooks_.after_step(gauge, t + dt);
}

Stepper::Stepper(FieldState& state, const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg,
                 int order)
    : state_(state), spec_(spec), integ_(spec, phys, cfg, order), sector_(state.psi, spec, phys, cfg) {}

void Stepper::step() {
  integ_.step(sector_, state_.gauge, state_.time, spec_.dt);
  state_.time += spec_.dt;
  ++state_.step;
}

}  // namespace qedlat
