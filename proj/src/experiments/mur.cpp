#include "qedlat/experiments.hpp"

namespace qedlat {

MurBoundaryZ::MurBoundaryZ(const LatticeSpec& spec) : spec_(spec) {
  if (spec.boundary[2] != Boundary::MurSecondOrder) throw ConfigError("lattice.boundary_z: Mur update needs \"mur\"");
  plane_ = std::size_t(spec.n[0]) * spec.n[1];
  levels_ = 2;
  hist_.assign(std::size_t(levels_) * 2 * 2 * 2 * plane_, 0.0);
}

double& MurBoundaryZ::h(int level, int face, int layer, int comp, std::size_t i) {
  return hist_[(((std::size_t(level) * 2 + face) * 2 + layer) * 2 + comp) * plane_ + i];
}

namespace {

// z plane index of (face, layer): face 0 counts up from k = 0, face 1 down from nz - 1
int plane_of(const LatticeSpec& s, int face, int layer) { return face == 0 ? layer : s.n[2] - 1 - layer; }

}  // namespace

void MurBoundaryZ::prime(const GaugeState& g) {
  for (int level = 0; level < levels_; ++level)
    for (int face = 0; face < 2; ++face)
      for (int layer = 0; layer < 2; ++layer) {
        const std::size_t base = std::size_t(plane_of(spec_, face, layer)) * plane_;
        for (int c = 0; c < 2; ++c)
          for (std::size_t i = 0; i < plane_; ++i) h(level, face, layer, c, i) = g.A[c][base + i];
      }
}

double MurBoundaryZ::h(int level, int face, int layer, int comp, std::size_t i) const {
  return hist_[(((std::size_t(level) * 2 + face) * 2 + layer) * 2 + comp) * plane_ + i];
}

void MurBoundaryZ::clamp(const GaugeState& before, const GaugeState* trial, double dt, GaugeClamp& out) const {
  const double cdt = kC * dt;
  const double dz = spec_.spacing[2];
  const double a = (cdt - dz) / (cdt + dz);
  const double b = 2.0 * dz / (cdt + dz);
  const double cx = cdt * cdt * dz / (2.0 * spec_.spacing[0] * spec_.spacing[0] * (cdt + dz));
  const double cy = cdt * cdt * dz / (2.0 * spec_.spacing[1] * spec_.spacing[1] * (cdt + dz));
  const int nx = spec_.n[0], ny = spec_.n[1];
  const std::size_t N = spec_.sites();
  out.edges.clear();
  out.a.clear();
  out.y.clear();

  for (int face = 0; face < 2; ++face) {
    const std::size_t b0 = std::size_t(plane_of(spec_, face, 0)) * plane_;
    const std::size_t b1 = std::size_t(plane_of(spec_, face, 1)) * plane_;
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const std::size_t p = std::size_t(j) * nx + i;
          const std::size_t xp = std::size_t(j) * nx + (i + 1) % nx, xm = std::size_t(j) * nx + (i + nx - 1) % nx;
          const std::size_t yp = std::size_t((j + 1) % ny) * nx + i, ym = std::size_t((j + ny - 1) % ny) * nx + i;
          auto lap = [&](int layer, std::size_t q, std::size_t qp, std::size_t qm) {
            return h(1, face, layer, c, qp) - 2.0 * h(1, face, layer, c, q) + h(1, face, layer, c, qm);
          };
          const double sx = lap(0, p, xp, xm) + lap(1, p, xp, xm);
          const double sy = lap(0, p, yp, ym) + lap(1, p, yp, ym);
          const double u1 = trial ? trial->A[c][b1 + p] : 2.0 * h(1, face, 1, c, p) - h(0, face, 1, c, p);
          const double u0 = -h(0, face, 1, c, p) + a * (u1 + h(0, face, 0, c, p)) +
                            b * (h(1, face, 0, c, p) + h(1, face, 1, c, p)) + cx * sx + cy * sy;
          out.edges.push_back(std::size_t(c) * N + b0 + p);
          out.a.push_back(u0);
          // Y is the momentum of A: dA/dt = 4 pi c^2 Y
          out.y.push_back((u0 - before.A[c][b0 + p]) / (4.0 * kPi * kC * kC * dt));
        }
    }
  }
}

void MurBoundaryZ::commit(const GaugeState& g) {
  for (int face = 0; face < 2; ++face)
    for (int layer = 0; layer < 2; ++layer)
      for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < plane_; ++i) h(0, face, layer, c, i) = h(1, face, layer, c, i);
  for (int face = 0; face < 2; ++face)
    for (int layer = 0; layer < 2; ++layer) {
      const std::size_t base = std::size_t(plane_of(spec_, face, layer)) * plane_;
      for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < plane_; ++i) h(1, face, layer, c, i) = g.A[c][base + i];
    }
}

std::vector<double> MurBoundaryZ::save() const { return hist_; }

void MurBoundaryZ::restore(const std::vector<double>& v) {
  if (v.size() != hist_.size()) throw CheckpointError("Mur history has the wrong size");
  hist_ = v;
}

}  // namespace qedlat
