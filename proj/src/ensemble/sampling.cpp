#include <cmath>
#include <complex>

#include <fftw3.h>

#include "qedlat/ensemble.hpp"

namespace qedlat {

namespace {

using cd = std::complex<double>;

double occupation(const Occupation& n, const Vec3& k) {
  if (!n) return 0.0;
  const double v = n(k);
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("occupation outside [0, 1] at a lattice mode");
  return v;
}

// Backward 3-D transform with x fastest, matching J = i + nx (j + ny k).
class Backward3d {
 public:
  explicit Backward3d(const LatticeSpec& spec) : n_(spec.sites()) {
    buf_ = fftw_alloc_complex(n_);
    plan_ = fftw_plan_dft_3d(spec.n[2], spec.n[1], spec.n[0], buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Backward3d() {
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  Backward3d(const Backward3d&) = delete;
  Backward3d& operator=(const Backward3d&) = delete;

  cd* data() { return reinterpret_cast<cd*>(buf_); }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* buf_;
  fftw_plan plan_;
};

}  // namespace

Occupation EnsembleConfig::constant(double n) {
  return [n](const Vec3&) { return n; };
}

void EnsembleConfig::validate() const {
  if (members < 1) throw ConfigError("ensemble.members must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  for (const Occupation* n : {&n_plus, &n_minus})
    if (*n) {
      const double v = (*n)(Vec3{0.0, 0.0, 0.0});
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("occupation must lie in [0, 1]");
    }
}

ModeAmplitudes draw_amplitudes(const EnsembleConfig& cfg, const EigenspinorTable& table, const LatticeSpec& spec,
                               int member) {
  const std::size_t N = table.size();
  const double V = spec.volume();
  std::seed_seq seq{std::uint32_t(cfg.seed & 0xffffffffu), std::uint32_t(cfg.seed >> 32), std::uint32_t(member),
                    0x9e3779b9u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  ModeAmplitudes a;
  for (int s = 0; s < 2; ++s) {
    a.xi[s].resize(N);
    a.eta[s].resize(N);
  }
  a.xi_sign.resize(N);
  a.eta_sign.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec3& k = table[i].k;
    const double fp = 1.0 - 2.0 * occupation(cfg.n_plus, k);
    const double fm = 1.0 - 2.0 * occupation(cfg.n_minus, k);
    const double rp = std::sqrt(V * std::abs(fp)), rm = std::sqrt(V * std::abs(fm));
    a.xi_sign[i] = fp >= 0.0 ? 1 : -1;
    a.eta_sign[i] = fm >= 0.0 ? 1 : -1;
    for (int s = 0; s < 2; ++s) {
      a.xi[s][i] = std::polar(rp, phase(rng));
      a.eta[s][i] = std::polar(rm, phase(rng));
    }
  }
  return a;
}

StochasticPair synthesize(const ModeAmplitudes& amp, const EigenspinorTable& table, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  const double scale = std::sqrt(2.0 * kHbar) / (spec.volume() * std::sqrt(2.0));
  StochasticPair pair{SpinorField(N), SpinorField(N)};
  Backward3d fft(spec);
  for (int female = 0; female < 2; ++female) {
    SpinorField& out = female ? pair.F : pair.M;
    for (int c = 0; c < 4; ++c) {
      cd* buf = fft.data();
      for (std::size_t i = 0; i < N; ++i) {
        const ModeSpinors& m = table[i];
        const double sx = female ? amp.xi_sign[i] : 1.0;
        const double se = female ? -double(amp.eta_sign[i]) : 1.0;
        cd v = 0.0;
        for (int s = 0; s < 2; ++s) v += sx * amp.xi[s][i] * m.u[s](c) + se * amp.eta[s][i] * m.w[s](c);
        double ph = 0.0;
        for (int d = 0; d < 3; ++d) ph += m.k[d] * spec.spacing[d] * kComponentOffset[c][d];
        buf[i] = v * std::polar(1.0, ph);
      }
      fft.run();
      auto re = out.re(c), im = out.im(c);
      for (std::size_t J = 0; J < N; ++J) {
        re[J] = scale * buf[J].real();
        im[J] = scale * buf[J].imag();
      }
    }
  }
  return pair;
}

Ensemble sample_background(const EnsembleConfig& cfg, const EigenspinorTable& table, const LatticeSpec& spec) {
  cfg.validate();
  if (table.size() != spec.sites()) throw ConfigError("eigenspinor table does not match the lattice");
  Ensemble ens;
  ens.pairs.resize(std::size_t(cfg.members));
  // members are independent streams; the fill order does not affect the result
  for (int m = 0; m < cfg.members; ++m) ens.pairs[m] = synthesize(draw_amplitudes(cfg, table, spec, m), table, spec);
  return ens;
}

}  // namespace qedlat
