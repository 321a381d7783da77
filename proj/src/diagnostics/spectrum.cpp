#include <algorithm>
#include <cmath>

#include <fftw3.h>

#include "qedlat/diagnostics.hpp"

namespace qedlat {

using cd = std::complex<double>;

int SpectrumGrid::k_index(double kv) const {
  const int i = int(std::lround(kv / dk)) + nk / 2;
  return std::clamp(i, 0, nk - 1);
}

ZLineRecorder::ZLineRecorder(int nz, double dz, double dt) : nz_(nz), dz_(dz), dt_(dt) {
  if (nz < 1 || !(dz > 0.0) || !(dt > 0.0)) throw SamplingError("z-line recorder needs nz >= 1, dz > 0, dt > 0");
}

void ZLineRecorder::push(double t, std::span<const double> re, std::span<const double> im) {
  if (re.size() != std::size_t(nz_) || (!im.empty() && im.size() != re.size()))
    throw SamplingError("z-line snapshot has " + std::to_string(re.size()) + " samples, expected " +
                        std::to_string(nz_));
  const int n = frames();
  if (n == 0)
    t0_ = t;
  else if (std::abs(t - (t0_ + n * dt_)) > 1e-9 * std::max(1.0, std::abs(t)))
    throw SamplingError("non-uniform time sampling at frame " + std::to_string(n));
  for (int j = 0; j < nz_; ++j) frames_.emplace_back(re[j], im.empty() ? 0.0 : im[j]);
}

void ZLineRecorder::restore(double t0, std::vector<cd> samples) {
  if (samples.size() % std::size_t(nz_) != 0) throw SamplingError("restored samples are not whole z lines");
  t0_ = t0;
  frames_ = std::move(samples);
}

SpectrumGrid ZLineRecorder::spectrum(bool detrend) const {
  if (!detrend) return space_time_spectrum(frames_, nz_, frames(), dz_, dt_);
  std::vector<cd> f = frames_;
  remove_linear_trend(f, nz_, frames());
  return space_time_spectrum(f, nz_, frames(), dz_, dt_);
}

void remove_linear_trend(std::vector<cd>& f, int nz, int nt) {
  if (f.size() != std::size_t(nz) * std::size_t(nt)) throw SamplingError("space-time samples do not form an nt x nz grid");
  if (nt < 2) return;
  const double tm = 0.5 * (nt - 1);
  double stt = 0.0;
  for (int n = 0; n < nt; ++n) stt += (n - tm) * (n - tm);
  for (int j = 0; j < nz; ++j) {
    cd mean = 0.0, slope = 0.0;
    for (int n = 0; n < nt; ++n) {
      const cd v = f[std::size_t(n) * nz + j];
      mean += v;
      slope += (n - tm) * v;
    }
    mean /= double(nt);
    slope /= stt;
    for (int n = 0; n < nt; ++n) f[std::size_t(n) * nz + j] -= mean + slope * (n - tm);
  }
}

SpectrumGrid space_time_spectrum(const std::vector<cd>& samples, int nz, int nt, double dz, double dt) {
  if (nz < 1 || nt < 1 || samples.size() != std::size_t(nz) * std::size_t(nt))
    throw SamplingError("space-time samples do not form an nt x nz grid");
  const std::size_t N = samples.size();
  fftw_complex* in = fftw_alloc_complex(N);
  fftw_complex* out = fftw_alloc_complex(N);
  fftw_plan plan = fftw_plan_dft_2d(nt, nz, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  // forward over z; time reversed so the forward transform carries e^{+i omega t}
  cd* a = reinterpret_cast<cd*>(in);
  for (int n = 0; n < nt; ++n) {
    const int src = (nt - n) % nt;
    std::copy_n(samples.begin() + std::size_t(src) * nz, nz, a + std::size_t(n) * nz);
  }
  fftw_execute(plan);

  SpectrumGrid g;
  g.nk = nz;
  g.nw = nt;
  g.dk = 2.0 * kPi / (nz * dz);
  g.dw = 2.0 * kPi / (nt * dt);
  g.data.resize(N);
  const cd* b = reinterpret_cast<const cd*>(out);
  for (int iw = 0; iw < nt; ++iw) {
    const int fw = ((iw - nt / 2) % nt + nt) % nt;
    for (int ik = 0; ik < nz; ++ik) {
      const int fk = ((ik - nz / 2) % nz + nz) % nz;
      g.data[std::size_t(iw) * nz + ik] = b[std::size_t(fw) * nz + fk];
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);

  double es = 0.0, ef = 0.0;
  for (const cd& v : samples) es += std::norm(v);
  for (const cd& v : g.data) ef += std::norm(v);
  ef /= double(N);
  g.parseval_defect = es > 0.0 ? std::abs(ef - es) / es : ef;
  return g;
}

SpectrumGrid summed_power(const std::vector<SpectrumGrid>& grids) {
  if (grids.empty()) throw SamplingError("no spectra to combine");
  SpectrumGrid out = grids.front();
  for (auto& v : out.data) v = std::norm(v);
  for (std::size_t i = 1; i < grids.size(); ++i) {
    const SpectrumGrid& g = grids[i];
    if (g.nk != out.nk || g.nw != out.nw) throw SamplingError("spectra have different axes");
    for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] += std::norm(g.data[j]);
    out.parseval_defect = std::max(out.parseval_defect, g.parseval_defect);
  }
  // store amplitudes so that power() returns the summed power
  for (auto& v : out.data) v = std::sqrt(v.real());
  return out;
}

double ridge_frequency(const SpectrumGrid& g, int ik, int sign, double w_min) {
  double best = -1.0, w = 0.0;
  for (int iw = 0; iw < g.nw; ++iw) {
    const double om = g.omega(iw);
    if (sign > 0 ? om <= w_min : om >= -w_min) continue;
    const double p = g.power(ik, iw);
    if (p > best) {
      best = p;
      w = om;
    }
  }
  return w;
}

double continuum_onset(const SpectrumGrid& g, int ik, double fraction) {
  double top = 0.0;
  for (int iw = 0; iw < g.nw; ++iw)
    if (g.omega(iw) > 0.0) top = std::max(top, g.power(ik, iw));
  for (int iw = 0; iw < g.nw; ++iw)
    if (g.omega(iw) > 0.0 && g.power(ik, iw) >= fraction * top) return g.omega(iw);
  return 0.0;
}

double spectral_gap(const SpectrumGrid& g) {
  const int ik = g.k_index(0.0);
  return ridge_frequency(g, ik, +1) - ridge_frequency(g, ik, -1);
}

}  // namespace qedlat
