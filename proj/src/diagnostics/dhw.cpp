#include <cmath>

#include <fftw3.h>

#include "qedlat/diagnostics.hpp"

namespace qedlat {

namespace {

using cd = std::complex<double>;

class Fft3d {
 public:
  Fft3d(const LatticeSpec& spec, int sign) : n_(spec.sites()) {
    buf_ = fftw_alloc_complex(n_);
    plan_ = fftw_plan_dft_3d(spec.n[2], spec.n[1], spec.n[0], buf_, buf_, sign, FFTW_ESTIMATE);
  }
  ~Fft3d() {
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;
  cd* data() { return reinterpret_cast<cd*>(buf_); }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* buf_;
  fftw_plan plan_;
};

Vec3 mean_shift(const GaugeState& gauge, const Physics& phys) {
  Vec3 s{};
  for (int d = 0; d < 3; ++d) {
    const auto a = gauge.A[d];
    s[d] = a.empty() ? 0.0 : phys.coupling() * pairwise_sum(a) / double(a.size());
  }
  return s;
}

}  // namespace

DhwAnalyzer::DhwAnalyzer(const LatticeSpec& spec, const Physics& phys) : spec_(spec), phys_(phys) {
  spec_.validate();
}

DhwAnalyzer::Projected DhwAnalyzer::project(const Ensemble& ens, const GaugeState& gauge) const {
  const std::size_t N = spec_.sites();
  const double dV = spec_.cell_volume(), V = spec_.volume();
  const Vec3 shift = mean_shift(gauge, phys_);

  std::vector<Eigen::Matrix4cd> Pp(N);
  std::vector<std::array<cd, 4>> phase(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec3 k = grid_momentum(spec_, i);
    Pp[i] = energy_projector(dirac_symbol(k, phys_.mass, spec_, shift), +1);
    for (int c = 0; c < 4; ++c) {
      double ph = 0.0;
      for (int d = 0; d < 3; ++d) ph += k[d] * spec_.spacing[d] * kComponentOffset[c][d];
      phase[i][c] = std::polar(1.0, ph);
    }
  }

  Projected out;
  out.plus.assign(N, 0.0);
  out.minus.assign(N, 0.0);
  out.tr_plus.assign(N, 0.0);
  out.tr_minus.assign(N, 0.0);
  if (ens.pairs.empty()) return out;

  Fft3d fwd(spec_, FFTW_FORWARD), bwd(spec_, FFTW_BACKWARD);
  std::vector<Eigen::Vector4cd> aM(N), aF(N);
  std::array<std::vector<cd>, 4> xm, xf;
  for (auto& v : xm) v.resize(N);
  for (auto& v : xf) v.resize(N);

  auto amplitudes = [&](const SpinorField& psi, std::vector<Eigen::Vector4cd>& a) {
    for (int c = 0; c < 4; ++c) {
      cd* b = fwd.data();
      const auto re = psi.re(c), im = psi.im(c);
      for (std::size_t J = 0; J < N; ++J) b[J] = cd(re[J], im[J]);
      fwd.run();
      for (std::size_t i = 0; i < N; ++i) a[i](c) = b[i] * dV * std::conj(phase[i][c]);
    }
  };
  // branch-projected field on the lattice, (1/V) sum_k (P a)_c e^{ik(x + offset_c)}
  auto synth = [&](const std::vector<Eigen::Vector4cd>& a, int sign, std::array<std::vector<cd>, 4>& x) {
    std::vector<Eigen::Vector4cd> pa(N);
    for (std::size_t i = 0; i < N; ++i) pa[i] = sign > 0 ? Eigen::Vector4cd(Pp[i] * a[i]) : Eigen::Vector4cd(a[i] - Pp[i] * a[i]);
    for (int c = 0; c < 4; ++c) {
      cd* b = bwd.data();
      for (std::size_t i = 0; i < N; ++i) b[i] = pa[i](c) * phase[i][c] / V;
      bwd.run();
      std::copy(b, b + N, x[c].begin());
    }
  };

  const double inv = 1.0 / double(ens.pairs.size());
  for (const StochasticPair& pr : ens.pairs) {
    amplitudes(pr.M, aM);
    amplitudes(pr.F, aF);
    for (std::size_t i = 0; i < N; ++i) {
      const cd tp = aM[i].dot(Pp[i] * aF[i]);
      const cd tt = aM[i].dot(aF[i]);
      out.tr_plus[i] += inv * tp.real() / V;
      out.tr_minus[i] += inv * (tt - tp).real() / V;
    }
    for (int sign : {+1, -1}) {
      synth(aM, sign, xm);
      synth(aF, sign, xf);
      std::vector<double>& dst = sign > 0 ? out.plus : out.minus;
      for (int c = 0; c < 4; ++c)
        for (std::size_t J = 0; J < N; ++J) dst[J] += inv * dV * (std::conj(xm[c][J]) * xf[c][J]).real();
    }
  }
  return out;
}

void DhwAnalyzer::set_reference(const Ensemble& ens, const GaugeState& gauge) {
  const Projected p = project(ens, gauge);
  ref_plus_ = p.plus;
  ref_minus_ = p.minus;
  has_ref_ = true;
}

std::vector<double> DhwAnalyzer::reference() const {
  if (!has_ref_) return {};
  std::vector<double> v = ref_plus_;
  v.insert(v.end(), ref_minus_.begin(), ref_minus_.end());
  return v;
}

void DhwAnalyzer::restore_reference(const std::vector<double>& v) {
  if (v.empty()) {
    has_ref_ = false;
    ref_plus_.clear();
    ref_minus_.clear();
    return;
  }
  const std::size_t N = spec_.sites();
  if (v.size() != 2 * N) throw std::invalid_argument("pseudo-distribution reference has the wrong size");
  ref_plus_.assign(v.begin(), v.begin() + N);
  ref_minus_.assign(v.begin() + N, v.end());
  has_ref_ = true;
}

DhwObservables DhwAnalyzer::evaluate(const Ensemble& ens, const GaugeState& gauge) const {
  const std::size_t N = spec_.sites();
  const double dV = spec_.cell_volume();
  const Projected p = project(ens, gauge);
  DhwObservables o;
  o.rho_plus.resize(N);
  o.rho_minus.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    o.n_plus += 0.5 * (2.0 - p.tr_plus[i]);
    o.n_minus += 0.5 * (2.0 + p.tr_minus[i]);
  }
  for (std::size_t J = 0; J < N; ++J) {
    // without a recorded pattern the vacuum is taken as uniform: 2 per site per branch
    const double rp = has_ref_ ? ref_plus_[J] : 2.0;
    const double rm = has_ref_ ? ref_minus_[J] : -2.0;
    o.rho_plus[J] = 0.5 * (rp - p.plus[J]) / dV;
    o.rho_minus[J] = 0.5 * (p.minus[J] - rm) / dV;
    o.n_plus_local += o.rho_plus[J] * dV;
    o.n_minus_local += o.rho_minus[J] * dV;
  }
  return o;
}

}  // namespace qedlat
