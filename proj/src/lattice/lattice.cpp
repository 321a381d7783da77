#include "qedlat/lattice.hpp"

#include <cmath>
#include <limits>

namespace qedlat {

void LatticeSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 1) throw ConfigError("lattice extent must be >= 1 along every axis");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw ConfigError("lattice spacing must be positive and finite");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive and finite");
  if (sites() > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("lattice too large");
  if (boundary[0] != Boundary::Periodic || boundary[1] != Boundary::Periodic)
    throw ConfigError("absorbing boundaries are only supported on the z faces");
  if (boundary[2] == Boundary::MurSecondOrder && n[2] < 4)
    throw ConfigError("absorbing z boundary needs at least 4 layers");
}

std::size_t LatticeSpec::index(int i, int j, int k) const {
  auto wrap = [](int v, int m) { v %= m; return v < 0 ? v + m : v; };
  return std::size_t(wrap(i, n[0])) +
         std::size_t(n[0]) * (std::size_t(wrap(j, n[1])) + std::size_t(n[1]) * std::size_t(wrap(k, n[2])));
}

std::array<int, 3> LatticeSpec::coords(std::size_t J) const {
  int i = int(J % n[0]);
  std::size_t r = J / n[0];
  int j = int(r % n[1]);
  int k = int(r / n[1]);
  return {i, j, k};
}

std::size_t LatticeSpec::shift(std::size_t J, int axis, int step) const {
  auto c = coords(J);
  c[axis] += step;
  return index(c[0], c[1], c[2]);
}

Neighbours::Neighbours(const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  for (int a = 0; a < 3; ++a) {
    up_[a].resize(N);
    down_[a].resize(N);
  }
  for (int k = 0; k < spec.n[2]; ++k)
    for (int j = 0; j < spec.n[1]; ++j)
      for (int i = 0; i < spec.n[0]; ++i) {
        std::size_t J = spec.index(i, j, k);
        up_[0][J] = std::uint32_t(spec.index(i + 1, j, k));
        up_[1][J] = std::uint32_t(spec.index(i, j + 1, k));
        up_[2][J] = std::uint32_t(spec.index(i, j, k + 1));
        down_[0][J] = std::uint32_t(spec.index(i - 1, j, k));
        down_[1][J] = std::uint32_t(spec.index(i, j - 1, k));
        down_[2][J] = std::uint32_t(spec.index(i, j, k - 1));
      }
}

EdgeField grad(const VertexField& f, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  EdgeField g(N);
  auto fv = f[0];
  for (std::size_t J = 0; J < N; ++J)
    for (int a = 0; a < 3; ++a) g[a][J] = (fv[spec.shift(J, a, 1)] - fv[J]) / spec.spacing[a];
  return g;
}

namespace {

void mask_cut_faces(FaceField& b, const LatticeSpec& spec) {
  if (!spec.cut_z()) return;
  const std::size_t N = spec.sites();
  const std::size_t plane = std::size_t(spec.n[0]) * spec.n[1];
  for (std::size_t J = N - plane; J < N; ++J) b[0][J] = b[1][J] = 0.0;
}

}  // namespace

void curl(const EdgeField& a, const LatticeSpec& spec, const Neighbours& nb, FaceField& b) {
  const std::size_t N = spec.sites();
  const double dx = spec.spacing[0], dy = spec.spacing[1], dz = spec.spacing[2];
  if (b.sites() != N) b = FaceField(N);
  auto ax = a[0], ay = a[1], az = a[2];
  auto bx = b[0], by = b[1], bz = b[2];
  for (std::size_t J = 0; J < N; ++J) {
    const auto jx = nb.up(0, J), jy = nb.up(1, J), jz = nb.up(2, J);
    bx[J] = (az[jy] - az[J]) / dy - (ay[jz] - ay[J]) / dz;
    by[J] = (ax[jz] - ax[J]) / dz - (az[jx] - az[J]) / dx;
    bz[J] = (ay[jx] - ay[J]) / dx - (ax[jy] - ax[J]) / dy;
  }
  mask_cut_faces(b, spec);
}

FaceField curl(const EdgeField& a, const LatticeSpec& spec) {
  FaceField b;
  curl(a, spec, Neighbours(spec), b);
  return b;
}

// b is masked in place on cut faces before transposing
void curl_transpose(FaceField& b, const LatticeSpec& spec, const Neighbours& nb, EdgeField& out) {
  const std::size_t N = spec.sites();
  const double dx = spec.spacing[0], dy = spec.spacing[1], dz = spec.spacing[2];
  mask_cut_faces(b, spec);
  if (out.sites() != N) out = EdgeField(N);
  auto bx = b[0], by = b[1], bz = b[2];
  auto ox = out[0], oy = out[1], oz = out[2];
  for (std::size_t J = 0; J < N; ++J) {
    const auto mx = nb.down(0, J), my = nb.down(1, J), mz = nb.down(2, J);
    ox[J] = (by[mz] - by[J]) / dz + (bz[J] - bz[my]) / dy;
    oy[J] = (bx[J] - bx[mz]) / dz + (bz[mx] - bz[J]) / dx;
    oz[J] = (bx[my] - bx[J]) / dy + (by[J] - by[mx]) / dx;
  }
}

EdgeField curl_transpose(const FaceField& bin, const LatticeSpec& spec) {
  FaceField b = bin;
  EdgeField out;
  curl_transpose(b, spec, Neighbours(spec), out);
  return out;
}

void curlT_curl(const EdgeField& a, const LatticeSpec& spec, EdgeField& out) {
  out = curl_transpose(curl(a, spec), spec);
}

EdgeField curlT_curl(const EdgeField& a, const LatticeSpec& spec) {
  EdgeField out;
  curlT_curl(a, spec, out);
  return out;
}

VertexField div(const EdgeField& y, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  VertexField d(N);
  for (std::size_t J = 0; J < N; ++J) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += (y[a][J] - y[a][spec.shift(J, a, -1)]) / spec.spacing[a];
    d[0][J] = s;
  }
  return d;
}

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

}  // namespace qedlat
