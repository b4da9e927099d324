#pragma once

#include <atomic>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "resistograph/grid_graph.hpp"

namespace resistograph {

enum class Preconditioner {
  identity,
};

struct SolverOptions {
  /// Relative residual target ||L x - P b|| / ||P b||.
  double tolerance = 1e-8;
  /// 0 means 10 * n.
  int max_iterations = 0;
  Preconditioner preconditioner = Preconditioner::identity;
};

struct SolveResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// MINRES for singular symmetric positive semidefinite systems whose null
/// space is spanned by the all-ones vector (the Laplacian of a connected
/// graph). Solves L x = P b with P b = b - mean(b) 1 and returns the solution
/// with 1^T x = 0, i.e. x = L^+ b.
class LaplacianSolver {
 public:
  /// Throws DataError if L is not square or not exactly symmetric.
  explicit LaplacianSolver(SparseMatrix laplacian, SolverOptions options = {});

  /// Throws SolverError if the tolerance is not met within max_iterations.
  /// `initial_guess`, when given, must have size n.
  SolveResult solve(const Eigen::VectorXd& rhs,
                    const Eigen::VectorXd* initial_guess = nullptr) const;

  /// Independent solves for several right-hand sides, advanced together so
  /// the sparse product streams over all of them. Column c of the result is
  /// bitwise identical to solve(rhs[c], guesses[c]). Does not throw on
  /// non-convergence; check SolveResult::converged.
  std::vector<SolveResult> solve_block(const std::vector<Eigen::VectorXd>& rhs,
                                       const std::vector<const Eigen::VectorXd*>& guesses = {}) const;

  int size() const noexcept { return static_cast<int>(laplacian_.rows()); }
  const SparseMatrix& matrix() const noexcept { return laplacian_; }
  const SolverOptions& options() const noexcept { return options_; }

  /// Number of right-hand sides solved so far; safe to read across threads.
  std::size_t solve_count() const noexcept { return solves_.load(); }

 private:
  SparseMatrix laplacian_;
  SolverOptions options_;
  int max_iterations_;
  mutable std::atomic<std::size_t> solves_{0};
};

/// One-shot convenience wrapper around LaplacianSolver.
SolveResult solve_psd(const SparseMatrix& laplacian, const Eigen::VectorXd& rhs,
                      const SolverOptions& options = {});

}  // namespace resistograph
