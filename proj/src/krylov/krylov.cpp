#include "qedlat/krylov.hpp"

#include <cmath>
#include <limits>

namespace qedlat {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void residual(const LinearOperator& op, std::span<const double> b, std::span<const double> x,
              std::vector<double>& r) {
  r.resize(b.size());
  op.apply(x, r);
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
}

struct Attempt {
  bool converged = false;
  int iterations = 0;
  double rel = 0.0;
};

Attempt bicgstab(const LinearOperator& op, std::span<const double> b, std::span<double> x, double tol,
                 int max_it) {
  const std::size_t n = b.size();
  const double bn = norm(b);
  std::vector<double> r, rhat, p(n, 0.0), v(n, 0.0), s(n), t(n);
  residual(op, b, x, r);
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  Attempt at;
  at.rel = norm(r) / bn;
  if (at.rel <= tol) {
    at.converged = true;
    return at;
  }
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  for (int it = 1; it <= max_it; ++it) {
    at.iterations = it;
    const double rho_new = dot(rhat, r);
    if (std::abs(rho_new) < tiny) return at;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    op.apply(p, v);
    const double rv = dot(rhat, v);
    if (std::abs(rv) < tiny) return at;
    alpha = rho / rv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm(s) / bn <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
      break;
    }
    op.apply(s, t);
    const double tt = dot(t, t);
    if (tt < tiny) return at;
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    if (norm(r) / bn <= tol) break;
    if (omega == 0.0) return at;
  }
  residual(op, b, x, r);
  at.rel = norm(r) / bn;
  at.converged = at.rel <= tol;
  return at;
}

Attempt gmres(const LinearOperator& op, std::span<const double> b, std::span<double> x, double tol, int max_it,
              int m) {
  const std::size_t n = b.size();
  const double bn = norm(b);
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> cs(m), sn(m), g(m + 1), r, w(n);
  Attempt at;
  int total = 0;
  while (total < max_it) {
    residual(op, b, x, r);
    double beta = norm(r);
    at.rel = beta / bn;
    if (at.rel <= tol) {
      at.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && total < max_it; ++k, ++total) {
      op.apply(V[k], w);
      for (int j = 0; j <= k; ++j) {
        H(j, k) = dot(w, V[j]);
        for (std::size_t i = 0; i < n; ++i) w[i] -= H(j, k) * V[j][i];
      }
      H(k + 1, k) = norm(w);
      if (H(k + 1, k) > 0.0)
        for (std::size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / H(k + 1, k);
      for (int j = 0; j < k; ++j) {
        const double h0 = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = h0;
      }
      const double den = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = den > 0.0 ? H(k, k) / den : 1.0;
      sn[k] = den > 0.0 ? H(k + 1, k) / den : 0.0;
      H(k, k) = den;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) / bn <= tol || den == 0.0) {
        ++k;
        ++total;
        break;
      }
    }
    std::vector<double> yv(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * yv[j];
      yv[i] = H(i, i) != 0.0 ? s / H(i, i) : 0.0;
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += yv[j] * V[j][i];
  }
  residual(op, b, x, r);
  at.rel = norm(r) / bn;
  at.converged = at.rel <= tol;
  at.iterations = total;
  return at;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(rel_tolerance > 0.0) || !std::isfinite(rel_tolerance)) throw std::invalid_argument("solver tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("solver max_iterations must be >= 1");
  if (restart < 1) throw std::invalid_argument("GMRES restart must be >= 1");
}

SolveStats solve(const LinearOperator& op, std::span<const double> rhs, std::span<double> x,
                 const SolverConfig& cfg) {
  if (rhs.size() != op.dim || x.size() != op.dim) throw std::invalid_argument("solve: dimension mismatch");
  SolveStats st;
  if (norm(rhs) == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return st;
  }
  std::vector<double> start(x.begin(), x.end());
  Attempt at;
  if (cfg.method == KrylovMethod::BiCGStab) {
    at = bicgstab(op, rhs, x, cfg.rel_tolerance, cfg.max_iterations);
    st.method_used = KrylovMethod::BiCGStab;
    st.iterations = at.iterations;
    if (!at.converged && cfg.fallback) {
      std::vector<double> keep(x.begin(), x.end());
      const double keep_rel = at.rel;
      if (!std::isfinite(keep_rel)) std::copy(start.begin(), start.end(), x.begin());
      at = gmres(op, rhs, x, cfg.rel_tolerance, cfg.max_iterations, cfg.restart);
      st.fell_back = true;
      st.method_used = KrylovMethod::GMRES;
      st.iterations += at.iterations;
      if (!at.converged && std::isfinite(keep_rel) && keep_rel < at.rel) {
        std::copy(keep.begin(), keep.end(), x.begin());
        at.rel = keep_rel;
      }
    }
  } else {
    at = gmres(op, rhs, x, cfg.rel_tolerance, cfg.max_iterations, cfg.restart);
    st.method_used = KrylovMethod::GMRES;
    st.iterations = at.iterations;
  }
  st.relative_residual = at.rel;
  if (!at.converged)
    throw NonConvergence("Krylov solve did not converge for " + (op.tag.empty() ? std::string("operator") : op.tag),
                         at.rel, st.iterations, std::vector<double>(x.begin(), x.end()));
  return st;
}

Eigen::MatrixXd dense_matrix(const LinearOperator& op) {
  const std::size_t n = op.dim;
  Eigen::MatrixXd M(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    for (std::size_t i = 0; i < n; ++i) M(i, j) = col[i];
    e[j] = 0.0;
  }
  return M;
}

Eigen::MatrixXd dense_cayley(const Eigen::MatrixXd& S, double dt) {
  const auto n = S.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd lhs = I - 0.5 * dt * S;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  if (!lu.isInvertible()) throw std::runtime_error("Cayley map undefined: I - S dt/2 is singular");
  return lu.solve(I + 0.5 * dt * S);
}

}  // namespace qedlat
