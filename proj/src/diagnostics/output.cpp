#include <cmath>
#include <fstream>
#include <iomanip>

#include "qedlat/diagnostics.hpp"

#ifndef QEDLAT_BUILD_ID
#define QEDLAT_BUILD_ID "unknown"
#endif

namespace qedlat {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw std::invalid_argument("line fit needs at least 3 matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.slope_stderr = sxx > 0.0 ? std::sqrt(ss / double(n - 2) / sxx) : 0.0;
  return f;
}

void ConservationMonitor::record(double t, double energy, double probability, double charge) {
  t_.push_back(t);
  h_.push_back(energy);
  p_.push_back(probability);
  q_.push_back(charge);
}

namespace {

std::vector<double> relative_to_first(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const double ref = std::abs(v.front()) > 0.0 ? std::abs(v.front()) : 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i] - v.front()) / ref;
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw OutputError("cannot open " + path + " for writing");
  f << std::setprecision(17);
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw OutputError("write failed: " + path);
}

}  // namespace

std::vector<double> ConservationMonitor::energy_error() const { return relative_to_first(h_); }
std::vector<double> ConservationMonitor::probability_error() const { return relative_to_first(p_); }

void write_spectrum_csv(const std::string& path, const SpectrumGrid& g) {
  std::ofstream f = open_out(path);
  f << "k,omega,re,im,log10_power\n";
  for (int iw = 0; iw < g.nw; ++iw)
    for (int ik = 0; ik < g.nk; ++ik) {
      const auto v = g.data[std::size_t(iw) * g.nk + ik];
      const double p = std::norm(v);
      f << g.k(ik) << ',' << g.omega(iw) << ',' << v.real() << ',' << v.imag() << ','
        << (p > 0.0 ? std::log10(p) : -400.0) << '\n';
    }
  finish(f, path);
}

void write_series_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("series header does not match column count");
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("series columns have different lengths");
  std::ofstream f = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) f << (c ? "," : "") << columns[c][r];
    f << '\n';
  }
  finish(f, path);
}

std::string build_id() { return QEDLAT_BUILD_ID; }

nlohmann::json spectrum_axes(const SpectrumGrid& g) {
  return {{"nk", g.nk},
          {"nw", g.nw},
          {"dk", g.dk},
          {"domega", g.dw},
          {"k_min", g.k(0)},
          {"omega_min", g.omega(0)},
          {"convention", "sum f(z,t) exp(-i(k z - omega t))"},
          {"parseval_defect", g.parseval_defect}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f = open_out(path);
  f << j.dump(2) << '\n';
  finish(f, path);
}

}  // namespace qedlat
