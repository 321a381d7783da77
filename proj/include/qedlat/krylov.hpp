#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qedlat {

struct LinearOperator {
  std::size_t dim = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::string tag;
};

enum class KrylovMethod { BiCGStab, GMRES };

struct SolverConfig {
  KrylovMethod method = KrylovMethod::BiCGStab;
  double rel_tolerance = 1e-12;
  int max_iterations = 1000;
  int restart = 30;
  // switch to GMRES(restart) when BiCGStab breaks down or stalls
  bool fallback = true;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  KrylovMethod method_used = KrylovMethod::BiCGStab;
  bool fell_back = false;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual, int iterations, std::vector<double> best)
      : std::runtime_error(what), residual_(residual), iterations_(iterations), best_(std::move(best)) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }
  const std::vector<double>& best_iterate() const { return best_; }

 private:
  double residual_;
  int iterations_;
  std::vector<double> best_;
};

// Solves op(x) = rhs. x holds the initial guess on entry.
SolveStats solve(const LinearOperator& op, std::span<const double> rhs, std::span<double> x,
                 const SolverConfig& cfg);

// Dense generator of a linear operator, column by column.
Eigen::MatrixXd dense_matrix(const LinearOperator& op);

// (I - S dt/2)^{-1} (I + S dt/2) by LU. Throws std::runtime_error when singular.
Eigen::MatrixXd dense_cayley(const Eigen::MatrixXd& S, double dt);

}  // namespace qedlat
