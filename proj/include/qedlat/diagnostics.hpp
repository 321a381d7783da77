#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qedlat/ensemble.hpp"
#include "qedlat/integrator.hpp"
#include "qedlat/symbol.hpp"

namespace qedlat {

class SamplingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Space-time spectrum on the t-z plane. Axes are centred: column ik holds
// k = (ik - nk/2) dk, row iw holds omega = (iw - nw/2) dw, so both cover
// [-pi/Delta, pi/Delta). Entries are sum_{j,n} f(z_j, t_n) e^{-i(k z_j - omega t_n)}.
struct SpectrumGrid {
  int nk = 0, nw = 0;
  double dk = 0.0, dw = 0.0;
  std::vector<std::complex<double>> data;  // row-major [iw * nk + ik]
  double parseval_defect = 0.0;            // |sum |S|^2 / (nk nw) - sum |f|^2| / sum |f|^2

  double k(int ik) const { return (ik - nk / 2) * dk; }
  double omega(int iw) const { return (iw - nw / 2) * dw; }
  int k_index(double k) const;
  double power(int ik, int iw) const { return std::norm(data[std::size_t(iw) * nk + ik]); }
};

// Collects snapshots of one complex field component along a z line at
// uniformly spaced times.
class ZLineRecorder {
 public:
  ZLineRecorder(int nz, double dz, double dt);
  // rejects a time that is not t0 + n dt or a line of the wrong length
  void push(double t, std::span<const double> re, std::span<const double> im = {});
  int frames() const { return int(frames_.size() / std::size_t(nz_)); }
  // detrend removes the per-site least-squares line in t first (secular drift
  // of a driven field would otherwise leak as 1/omega^2 over every column)
  SpectrumGrid spectrum(bool detrend = false) const;
  double start_time() const { return t0_; }
  const std::vector<std::complex<double>>& samples() const { return frames_; }
  void restore(double t0, std::vector<std::complex<double>> samples);

 private:
  int nz_;
  double dz_, dt_;
  double t0_ = 0.0;
  std::vector<std::complex<double>> frames_;
};

// samples[n * nz + j] = f(z_j, t_n)
SpectrumGrid space_time_spectrum(const std::vector<std::complex<double>>& samples, int nz, int nt, double dz,
                                 double dt);

// Subtracts the least-squares line a + b t from every site's time series.
void remove_linear_trend(std::vector<std::complex<double>>& samples, int nz, int nt);

// Power of several grids with identical axes, summed entrywise (phases dropped).
SpectrumGrid summed_power(const std::vector<SpectrumGrid>& grids);

// Frequency of the strongest bin in column ik restricted to omega > w_min
// (sign > 0) or omega < -w_min (sign < 0).
double ridge_frequency(const SpectrumGrid& g, int ik, int sign, double w_min = 0.0);

// Lowest positive frequency whose power reaches `fraction` of the column maximum
// over positive frequencies: the lower edge of a continuum.
double continuum_onset(const SpectrumGrid& g, int ik, double fraction);

// Distance between the strongest positive- and negative-frequency bins at k = 0.
double spectral_gap(const SpectrumGrid& g);

// (2/dt) atan((c dt / 2) |p_hat|), p_hat_d = 2 sin(k_d Delta_d / 2) / Delta_d
double lattice_dispersion_massless(const Vec3& k, const LatticeSpec& spec);

// One-step map of a plane wave at A = 0 under the given stage sequence.
Eigen::Matrix4cd transfer_matrix(const Vec3& k, double mass, const LatticeSpec& spec, const Schedule& schedule);

// Eigenphases of the transfer matrix divided by -dt, ascending.
std::vector<double> lattice_dispersion_massive_oracle(const Vec3& k, double mass, const LatticeSpec& spec,
                                                      const Schedule& schedule);

// Local minima of |omega| per branch (ascending order of the oracle frequencies)
// over the momentum grid of `grid` (its n sets the sweep resolution, periodic
// neighbours, axes with n = 1 skipped). A grid point counts when no neighbour is
// lower by more than a relative 1e-12.
struct BranchMinima {
  std::array<std::vector<Vec3>, 4> at;
};
BranchMinima dispersion_minima(const LatticeSpec& grid, double mass, const Schedule& schedule);

struct BenchmarkBranches {
  double fermion = 0.0;        // +sqrt(c^2 k^2 + m^2 c^4 / hbar^2)
  double electromagnetic = 0.0; // sqrt(c^2 k^2 + omega_p^2)
  double langmuir = 0.0;       // lower positive root of the electrostatic quartic
  double pair = 0.0;           // upper positive root
};
BenchmarkBranches benchmark_dispersions(double k, double omega_p, double mass);

// Lattice realisation of the pseudo-distribution read-out. Momentum space:
// the ensemble correlator C(k) = <a_F a_M^+ + a_M a_F^+> / (2V) is projected on
// the branches of h(k) with the uniform part of A; the vacuum has
// tr(P+ C) = 2 and tr(P- C) = -2 per mode. Local densities use the branch-projected
// fields minus their pattern at the reference time.
struct DhwObservables {
  std::vector<double> rho_plus, rho_minus;  // local densities per unit volume
  double n_plus = 0.0, n_minus = 0.0;       // momentum-space totals
  double n_plus_local = 0.0, n_minus_local = 0.0;  // volume sums of the local densities
};

class DhwAnalyzer {
 public:
  DhwAnalyzer(const LatticeSpec& spec, const Physics& phys);
  // records the local reference pattern
  void set_reference(const Ensemble& ens, const GaugeState& gauge);
  DhwObservables evaluate(const Ensemble& ens, const GaugeState& gauge) const;
  // reference pattern for checkpoints; empty when none was recorded
  std::vector<double> reference() const;
  void restore_reference(const std::vector<double>& v);

 private:
  struct Projected {
    std::vector<double> plus, minus;  // per site, member averaged
    std::vector<double> tr_plus, tr_minus;  // per mode
  };
  Projected project(const Ensemble& ens, const GaugeState& gauge) const;

  LatticeSpec spec_;
  Physics phys_;
  std::vector<double> ref_plus_, ref_minus_;
  bool has_ref_ = false;
};

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_stderr = 0.0;
};
// Ordinary least squares y = a + b x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Recorded time series of conserved quantities.
class ConservationMonitor {
 public:
  void record(double t, double energy, double probability, double charge);
  const std::vector<double>& times() const { return t_; }
  // |X(t) - X(0)| / |X(0)| per sample
  std::vector<double> energy_error() const;
  std::vector<double> probability_error() const;
  const std::vector<double>& charge() const { return q_; }

 private:
  std::vector<double> t_, h_, p_, q_;
};

// CSV with one header line; JSON sidecar carries axes, parameters, seed and build id.
void write_spectrum_csv(const std::string& path, const SpectrumGrid& g);
void write_series_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);
std::string build_id();
nlohmann::json spectrum_axes(const SpectrumGrid& g);
void write_json(const std::string& path, const nlohmann::json& j);

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qedlat
