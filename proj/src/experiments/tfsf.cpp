#include <cmath>

#include "qedlat/experiments.hpp"

namespace qedlat {

TfsfSource::TfsfSource(const LatticeSpec& spec, const SourceConfig& src, double critical_field)
    : spec_(spec), src_(src) {
  const int nz = spec.n[2];
  if (src.plane < 1 || src.plane > nz - 2) throw ConfigError("source.plane: must lie inside the domain");
  if (!(src.omega > 0.0)) throw ConfigError("source.omega: must be > 0");
  const double dz = spec.spacing[2], dt = spec.dt;
  // wave number that the gauge Cayley map propagates at omega
  const double s = (dz / (kC * dt)) * std::tan(0.5 * src.omega * dt);
  if (!(s < 1.0)) throw ConfigError("source.omega: above the lattice cutoff for this dt and dz");
  k_ = (2.0 / dz) * std::asin(s);
  vphase_ = src.omega / k_;
  a0_ = src.amplitude * std::abs(critical_field) * kC / src.omega;
  pol_ = {std::cos(src.polarization), std::sin(src.polarization), 0.0};
}

Vec3 TfsfSource::incident(int kz, double t) const {
  const double z = kz * spec_.spacing[2];
  const double tau = t - (z - src_.plane * spec_.spacing[2]) / vphase_;
  const double ramp = src_.ramp_periods * 2.0 * kPi / src_.omega;
  double env = 0.0;
  if (tau <= 0.0)
    env = 0.0;
  else if (tau >= ramp)
    env = 1.0;
  else {
    const double s = std::sin(0.5 * kPi * tau / ramp);
    env = s * s;
  }
  const double a = a0_ * env * std::sin(src_.omega * t - k_ * z);
  return {a * pol_[0], a * pol_[1], 0.0};
}

void TfsfSource::forcing(double t, EdgeField& out) const {
  if (a0_ == 0.0) return;
  const int zs = src_.plane;
  const std::size_t plane = std::size_t(spec_.n[0]) * spec_.n[1];
  const double dz = spec_.spacing[2];
  const double half = 0.5 * spec_.dt;
  // the implicit midpoint sees the average of the two time levels
  auto avg = [&](int kz) {
    const Vec3 a = incident(kz, t - half), b = incident(kz, t + half);
    return Vec3{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.0};
  };
  const Vec3 in_sf = avg(zs - 1), in_tf = avg(zs);
  const double w = 1.0 / (4.0 * kPi * dz * dz);
  for (int c = 0; c < 2; ++c) {
    auto f = out[c];
    for (std::size_t p = 0; p < plane; ++p) {
      // total-field plane misses the incident part of its scattered neighbour
      f[std::size_t(zs) * plane + p] += w * in_sf[c];
      // scattered-field plane must not see the incident part of its total neighbour
      f[std::size_t(zs - 1) * plane + p] -= w * in_tf[c];
    }
  }
}

}  // namespace qedlat
