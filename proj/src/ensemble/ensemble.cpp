#include <exception>
#include <mutex>
#include <thread>

#include "qedlat/ensemble.hpp"

namespace qedlat {

void parallel_blocks(int blocks, int threads, const std::function<void(int, int)>& fn) {
  const int T = std::max(1, std::min(threads, blocks));
  if (T == 1) {
    for (int b = 0; b < blocks; ++b) fn(b, 0);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < T; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int b = w; b < blocks; b += T) fn(b, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

int block_count(std::size_t members) { return int((members + kMembersPerBlock - 1) / kMembersPerBlock); }

// sum of per-block partials in block order
void reduce_blocks(std::vector<EdgeField>& parts, EdgeField& out) {
  const std::size_t n = out.data().size();
  std::fill(out.data().begin(), out.data().end(), 0.0);
  for (const EdgeField& p : parts)
    for (std::size_t i = 0; i < n; ++i) out.data()[i] += p.data()[i];
}

void pair_current(const SpinorField& M, const SpinorField& F, const WilsonLineCache& lines,
                  const LatticeSpec& spec, double scale, EdgeField& acc) {
  current_bilinear(M, F, lines, spec, scale, acc);
  current_bilinear(F, M, lines, spec, scale, acc);
}

}  // namespace

void raw_ensemble_current(const Ensemble& ens, const WilsonLineCache& lines, const LatticeSpec& spec,
                          const Physics& phys, int threads, EdgeField& out) {
  const std::size_t N = spec.sites();
  if (out.sites() != N) out = EdgeField(N);
  const std::size_t members = ens.pairs.size();
  if (members == 0) {
    out.fill(0.0);
    return;
  }
  const double scale = -phys.charge / (2.0 * kHbar * double(members));
  const int blocks = block_count(members);
  std::vector<EdgeField> parts(static_cast<std::size_t>(blocks), EdgeField{N});
  parallel_blocks(blocks, threads, [&](int b, int) {
    const std::size_t lo = std::size_t(b) * kMembersPerBlock, hi = std::min(members, lo + kMembersPerBlock);
    for (std::size_t m = lo; m < hi; ++m) pair_current(ens.pairs[m].M, ens.pairs[m].F, lines, spec, scale, parts[b]);
  });
  reduce_blocks(parts, out);
}

void ensemble_current(const Ensemble& ens, const WilsonLineCache& lines, const LatticeSpec& spec,
                      const Physics& phys, int threads, EdgeField& out) {
  raw_ensemble_current(ens, lines, spec, phys, threads, out);
  for (int a = 0; a < 3; ++a)
    for (double& v : out[a]) v -= ens.ref.current[a];
}

VertexField raw_ensemble_charge_density(const Ensemble& ens, const Physics& phys, const LatticeSpec& spec) {
  const std::size_t N = spec.sites();
  VertexField rho(N);
  if (ens.pairs.empty()) return rho;
  const double scale = -phys.charge / (2.0 * kHbar * double(ens.pairs.size()));
  auto r = rho[0];
  for (const StochasticPair& p : ens.pairs) {
    const auto& m = p.M.data();
    const auto& f = p.F.data();
    for (int c = 0; c < 8; ++c)
      for (std::size_t J = 0; J < N; ++J) r[J] += scale * m[c * N + J] * f[c * N + J];
  }
  return rho;
}

VertexField ensemble_charge_density(const Ensemble& ens, const Physics& phys, const LatticeSpec& spec) {
  VertexField rho = raw_ensemble_charge_density(ens, phys, spec);
  if (ens.ref.frozen)
    for (std::size_t J = 0; J < rho.sites(); ++J) rho[0][J] -= ens.ref.rho[0][J];
  return rho;
}

double ensemble_net_charge(const Ensemble& ens, const Physics& phys, const LatticeSpec& spec) {
  const VertexField rho = raw_ensemble_charge_density(ens, phys, spec);
  return spec.cell_volume() * pairwise_sum(rho.data());
}

void freeze_reference(Ensemble& ens, const GaugeState& gauge, const EigenspinorTable& table,
                      const LatticeSpec& spec, const Physics& phys, int threads) {
  ens.ref.rho = raw_ensemble_charge_density(ens, phys, spec);
  const WilsonLineCache lines(gauge.A, phys.coupling(), spec);
  EdgeField J;
  raw_ensemble_current(ens, lines, spec, phys, threads, J);
  for (int a = 0; a < 3; ++a) ens.ref.current[a] = pairwise_sum(std::vector<double>(J[a].begin(), J[a].end())) / double(spec.sites());
  ens.ref.energy = vacuum_energy(table);
  ens.ref.frozen = true;
}

EnsembleEnergy ensemble_energy(const Ensemble& ens, const GaugeState& gauge, const LatticeSpec& spec,
                               const Physics& phys) {
  EnsembleEnergy e;
  e.gauge = eval_H3(gauge, spec);
  if (!ens.pairs.empty()) {
    const WilsonLineCache lines(gauge.A, phys.coupling(), spec);
    DiracOperator op(spec);
    op.bind(lines);
    std::vector<double> terms;
    terms.reserve(ens.pairs.size());
    for (const StochasticPair& p : ens.pairs) terms.push_back(fermion_bilinear_energy(p.M, p.F, op, gauge.phi, phys));
    e.fermion = -pairwise_sum(terms) / double(ens.pairs.size());
    e.fermion -= ens.ref.energy;
    double ja = 0.0;
    for (int a = 0; a < 3; ++a)
      ja += ens.ref.current[a] * pairwise_sum(std::vector<double>(gauge.A[a].begin(), gauge.A[a].end()));
    e.fermion += spec.cell_volume() * ja;
  }
  e.total = e.fermion + e.gauge;
  return e;
}

double ensemble_probability(const Ensemble& ens, const LatticeSpec& spec) {
  if (ens.pairs.empty()) return 0.0;
  std::vector<double> terms;
  for (const StochasticPair& p : ens.pairs) terms.push_back(0.5 * (p.M.probability(spec) + p.F.probability(spec)));
  return pairwise_sum(terms) / double(ens.pairs.size());
}

EnsembleSector::EnsembleSector(Ensemble& ens, const LatticeSpec& spec, const Physics& phys, const SolverConfig& cfg,
                               int threads)
    : ens_(ens), spec_(spec), phys_(phys), cfg_(cfg), threads_(std::max(1, threads)) {
  const int T = std::max(1, std::min(threads_, block_count(ens.pairs.size())));
  for (int w = 0; w < T; ++w) {
    workers_.emplace_back(spec, cfg);
    mid_m_.emplace_back(spec.sites());
    mid_f_.emplace_back(spec.sites());
  }
  block_sum_.assign(std::size_t(block_count(ens.pairs.size())), EdgeField(spec.sites()));
}

void EnsembleSector::mass_step(const VertexField& phi, double dt) {
  parallel_blocks(block_count(ens_.pairs.size()), threads_, [&](int b, int) {
    const std::size_t lo = std::size_t(b) * kMembersPerBlock;
    const std::size_t hi = std::min(ens_.pairs.size(), lo + kMembersPerBlock);
    for (std::size_t m = lo; m < hi; ++m) {
      mass_rotation(ens_.pairs[m].M, phi, phys_, dt);
      mass_rotation(ens_.pairs[m].F, phi, phys_, dt);
    }
  });
}

SolveStats EnsembleSector::dirac_step(const WilsonLineCache& lines, EdgeField& Y, double dt) {
  const std::size_t members = ens_.pairs.size();
  if (members == 0) return {};
  const int blocks = block_count(members);
  const double scale = -phys_.charge / (2.0 * kHbar * double(members));
  std::vector<int> iters(std::size_t(blocks), 0);
  parallel_blocks(blocks, threads_, [&](int b, int w) {
    EdgeField& acc = block_sum_[b];
    acc.fill(0.0);
    const std::size_t lo = std::size_t(b) * kMembersPerBlock, hi = std::min(members, lo + kMembersPerBlock);
    for (std::size_t m = lo; m < hi; ++m) {
      StochasticPair& p = ens_.pairs[m];
      for (int female = 0; female < 2; ++female) {
        SpinorField& psi = female ? p.F : p.M;
        SpinorField& mid = female ? mid_f_[w] : mid_m_[w];
        std::copy(psi.data().begin(), psi.data().end(), mid.data().begin());
        try {
          iters[b] += workers_[w].advance(psi, lines, dt).iterations;
        } catch (const NonConvergence& e) {
          throw MemberSolveError(e, int(m), female);
        }
        for (std::size_t i = 0; i < mid.data().size(); ++i) mid.data()[i] = 0.5 * (mid.data()[i] + psi.data()[i]);
      }
      pair_current(mid_m_[w], mid_f_[w], lines, spec_, scale, acc);
    }
  });
  for (const EdgeField& part : block_sum_)
    for (std::size_t i = 0; i < Y.data().size(); ++i) Y.data()[i] += dt * part.data()[i];
  for (int a = 0; a < 3; ++a)
    for (double& v : Y[a]) v -= dt * ens_.ref.current[a];
  SolveStats st;
  for (int it : iters) st.iterations += it;
  return st;
}

}  // namespace qedlat
