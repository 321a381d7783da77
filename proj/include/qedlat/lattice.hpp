#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedlat {

enum class Boundary { Periodic, MurSecondOrder };

enum class Placement { Vertex, Edge, Face };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rectangular staggered lattice. Site J = i + nx*(j + ny*k), periodic wrap.
struct LatticeSpec {
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  double dt = 0.1;
  std::array<Boundary, 3> boundary{Boundary::Periodic, Boundary::Periodic, Boundary::Periodic};

  void validate() const;

  std::size_t sites() const { return std::size_t(n[0]) * n[1] * n[2]; }
  double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
  double volume() const { return cell_volume() * double(sites()); }

  std::size_t index(int i, int j, int k) const;
  std::array<int, 3> coords(std::size_t J) const;
  // neighbour of J one step along axis (step = +1 or -1), periodic
  std::size_t shift(std::size_t J, int axis, int step) const;

  // faces whose stencil crosses the z wrap are dropped when z is absorbing
  bool cut_z() const { return boundary[2] == Boundary::MurSecondOrder; }
};

// Precomputed forward/backward neighbour tables.
class Neighbours {
 public:
  explicit Neighbours(const LatticeSpec& spec);
  std::uint32_t up(int axis, std::size_t J) const { return up_[axis][J]; }
  std::uint32_t down(int axis, std::size_t J) const { return down_[axis][J]; }

 private:
  std::array<std::vector<std::uint32_t>, 3> up_, down_;
};

template <int Components, Placement P>
class Field {
 public:
  static constexpr int components = Components;
  static constexpr Placement placement = P;

  Field() = default;
  explicit Field(std::size_t sites) : sites_(sites), data_(sites * Components, 0.0) {}

  std::size_t sites() const { return sites_; }
  std::span<double> operator[](int c) { return {data_.data() + c * sites_, sites_}; }
  std::span<const double> operator[](int c) const { return {data_.data() + c * sites_, sites_}; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  std::size_t sites_ = 0;
  std::vector<double> data_;
};

using VertexField = Field<1, Placement::Vertex>;
using EdgeField = Field<3, Placement::Edge>;
using FaceField = Field<3, Placement::Face>;

// Forward difference of a vertex scalar onto edges.
EdgeField grad(const VertexField& f, const LatticeSpec& spec);
// Edge 1-form to face 2-form.
FaceField curl(const EdgeField& a, const LatticeSpec& spec);
// Backward-difference divergence of an edge field at vertices.
VertexField div(const EdgeField& y, const LatticeSpec& spec);
// Adjoint of curl applied to curl a; equals half the gradient of sum (curl a)^2.
EdgeField curlT_curl(const EdgeField& a, const LatticeSpec& spec);
void curlT_curl(const EdgeField& a, const LatticeSpec& spec, EdgeField& out);
// Transpose of curl acting on a face field.
EdgeField curl_transpose(const FaceField& b, const LatticeSpec& spec);

// Allocation-free variants for inner loops.
void curl(const EdgeField& a, const LatticeSpec& spec, const Neighbours& nb, FaceField& out);
void curl_transpose(FaceField& b, const LatticeSpec& spec, const Neighbours& nb, EdgeField& out);

double sum_squares(std::span<const double> v);
// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> v);

}  // namespace qedlat
