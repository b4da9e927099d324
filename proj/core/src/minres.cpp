#include "resistograph/minres.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "resistograph/error.hpp"

namespace resistograph {
namespace {

constexpr int kBlockWidth = 16;

void remove_mean(Eigen::VectorXd& v) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += v[i];
  const double mean = sum / static_cast<double>(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] -= mean;
}

double norm2(const Eigen::VectorXd& v) {
  double ss = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) ss += v[i] * v[i];
  return std::sqrt(ss);
}

bool exactly_symmetric(const SparseMatrix& a) {
  const SparseMatrix at = a.transpose();
  if (at.nonZeros() != a.nonZeros()) return false;
  for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
    SparseMatrix::InnerIterator it(a, row);
    SparseMatrix::InnerIterator jt(at, row);
    for (; it && jt; ++it, ++jt) {
      if (it.col() != jt.col() || it.value() != jt.value()) return false;
    }
    if (it || jt) return false;
  }
  return true;
}

// r = b - A x, re-centred.
void residual(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
              Eigen::VectorXd& r) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* vals = a.valuePtr();
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    double acc = 0.0;
    for (int k = outer[i]; k < outer[i + 1]; ++k) acc += vals[k] * x[inner[k]];
    r[i] = b[i] - acc;
  }
  remove_mean(r);
}

// One MINRES (Paige & Saunders) cycle on A dx_c = r_c for K columns at once.
// Storage is row-major n x K so the sparse product reads contiguous rows. All
// scalar recurrences are per column; a column stops on its own when its
// residual estimate drops below target[c] or its budget runs out, after which
// its lane is frozen (all coefficients zero). Lanczos vectors are re-centred
// after every product.
template <int K>
void block_cycle(const SparseMatrix& a, const Eigen::VectorXd* const* r, const double* target,
                 const int* budget, int width, Eigen::VectorXd* const* dx_out, int* iters_out) {
  const Eigen::Index n = a.rows();
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* vals = a.valuePtr();
  constexpr double tiny = std::numeric_limits<double>::epsilon();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto size = static_cast<std::size_t>(n) * K;

  std::array<std::vector<double>, 3> rb;
  std::array<std::vector<double>, 3> wb;
  for (auto& buf : rb) buf.assign(size, 0.0);
  for (auto& buf : wb) buf.assign(size, 0.0);
  std::vector<double> dx(size, 0.0);

  std::array<bool, K> live{};
  std::array<double, K> beta1{}, oldb{}, beta{}, dbar{}, epsln{}, phibar{}, cs{}, sn{};
  int remaining = 0;
  for (int c = 0; c < K; ++c) {
    cs[c] = -1.0;
    if (c >= width) continue;
    beta1[c] = norm2(*r[c]);
    beta[c] = beta1[c];
    phibar[c] = beta1[c];
    iters_out[c] = 0;
    live[c] = beta1[c] != 0.0 && budget[c] > 0;
    if (live[c]) ++remaining;
    for (Eigen::Index i = 0; i < n; ++i) {
      rb[0][i * K + c] = (*r[c])[i];
      rb[1][i * K + c] = (*r[c])[i];
    }
  }

  int ir1 = 0, ir2 = 1;
  int iw = 0, iw1 = 1, iw2 = 2;
  for (int itn = 1; remaining > 0; ++itn) {
    const double* r1 = rb[ir1].data();
    const double* r2 = rb[ir2].data();
    double* y = rb[3 - ir1 - ir2].data();

    std::array<double, K> inv_beta{}, c1{}, sum{}, alfa{}, ss{};
    for (int c = 0; c < K; ++c) {
      if (!live[c]) continue;
      inv_beta[c] = 1.0 / beta[c];
      c1[c] = itn >= 2 ? beta[c] / oldb[c] : 0.0;
    }
    // y = A v with v = r2 / beta, formed on the fly.
    for (Eigen::Index i = 0; i < n; ++i) {
      std::array<double, K> acc{};
      for (int e = outer[i]; e < outer[i + 1]; ++e) {
        const double val = vals[e];
        const double* rj = r2 + static_cast<Eigen::Index>(inner[e]) * K;
        for (int c = 0; c < K; ++c) acc[c] += val * (rj[c] * inv_beta[c]);
      }
      for (int c = 0; c < K; ++c) {
        y[i * K + c] = acc[c];
        sum[c] += acc[c];
      }
    }
    std::array<double, K> shift{};
    for (int c = 0; c < K; ++c) shift[c] = sum[c] * inv_n;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < K; ++c) {
        const Eigen::Index at = i * K + c;
        y[at] -= shift[c] + c1[c] * r1[at];
        alfa[c] += (r2[at] * inv_beta[c]) * y[at];
      }
    }
    std::array<double, K> c2{};
    for (int c = 0; c < K; ++c) c2[c] = live[c] ? alfa[c] / beta[c] : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < K; ++c) {
        const Eigen::Index at = i * K + c;
        y[at] -= c2[c] * r2[at];
        ss[c] += y[at] * y[at];
      }
    }

    std::array<double, K> oldeps{}, delta{}, inv_gamma{}, phi{};
    for (int c = 0; c < K; ++c) {
      if (!live[c]) continue;
      oldb[c] = beta[c];
      beta[c] = std::sqrt(ss[c]);
      oldeps[c] = epsln[c];
      delta[c] = cs[c] * dbar[c] + sn[c] * alfa[c];
      const double gbar = sn[c] * dbar[c] - cs[c] * alfa[c];
      epsln[c] = sn[c] * beta[c];
      dbar[c] = -cs[c] * beta[c];
      const double gamma = std::max(std::hypot(gbar, beta[c]), tiny);
      cs[c] = gbar / gamma;
      sn[c] = beta[c] / gamma;
      phi[c] = cs[c] * phibar[c];
      phibar[c] = sn[c] * phibar[c];
      inv_gamma[c] = 1.0 / gamma;
    }

    // w1 <- w2, w2 <- w; the oldest slot takes the new w. v is still
    // r2 / beta_old, and r2 becomes r1 below.
    const int oldest = iw1;
    iw1 = iw2;
    iw2 = iw;
    iw = oldest;
    double* w = wb[iw].data();
    const double* w1 = wb[iw1].data();
    const double* w2 = wb[iw2].data();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < K; ++c) {
        const Eigen::Index at = i * K + c;
        w[at] = ((r2[at] * inv_beta[c]) - oldeps[c] * w1[at] - delta[c] * w2[at]) * inv_gamma[c];
        dx[at] += phi[c] * w[at];
      }
    }
    // r1 <- r2, r2 <- y; the old r1 receives the next product.
    const int iy = 3 - ir1 - ir2;
    ir1 = ir2;
    ir2 = iy;

    for (int c = 0; c < K; ++c) {
      if (!live[c]) continue;
      if (phibar[c] <= target[c] || beta[c] <= tiny * beta1[c] || itn >= budget[c]) {
        live[c] = false;
        --remaining;
        iters_out[c] = itn;
      }
    }
  }
  for (int c = 0; c < width; ++c) {
    Eigen::VectorXd& out = *dx_out[c];
    out.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = dx[i * K + c];
  }
}

}  // namespace

LaplacianSolver::LaplacianSolver(SparseMatrix laplacian, SolverOptions options)
    : laplacian_(std::move(laplacian)), options_(options) {
  if (laplacian_.rows() != laplacian_.cols()) throw DataError("solver: matrix is not square");
  if (laplacian_.rows() == 0) throw DataError("solver: empty matrix");
  if (!exactly_symmetric(laplacian_)) throw DataError("solver: matrix is not symmetric");
  if (!(options_.tolerance > 0.0)) throw DataError("solver: tolerance must be positive");
  max_iterations_ = options_.max_iterations > 0 ? options_.max_iterations
                                                : 10 * static_cast<int>(laplacian_.rows());
}

std::vector<SolveResult> LaplacianSolver::solve_block(
    const std::vector<Eigen::VectorXd>& rhs,
    const std::vector<const Eigen::VectorXd*>& guesses) const {
  const Eigen::Index n = laplacian_.rows();
  const std::size_t count = rhs.size();
  if (!guesses.empty() && guesses.size() != count) {
    throw DataError("solver: guess count does not match right-hand sides");
  }
  solves_.fetch_add(count);

  std::vector<Eigen::VectorXd> b(count);
  std::vector<double> bnorm(count);
  std::vector<SolveResult> results(count);
  for (std::size_t c = 0; c < count; ++c) {
    if (rhs[c].size() != n) throw DataError("solver: right-hand side has wrong length");
    b[c] = rhs[c];
    remove_mean(b[c]);
    bnorm[c] = norm2(b[c]);
    const Eigen::VectorXd* guess = guesses.empty() ? nullptr : guesses[c];
    if (guess != nullptr && guess->size() == n && bnorm[c] != 0.0) {
      results[c].x = *guess;
      remove_mean(results[c].x);
    } else {
      results[c].x = Eigen::VectorXd::Zero(n);
    }
  }

  const double tol = options_.tolerance;
  constexpr int kMaxCycles = 8;
  std::vector<std::size_t> pending;
  for (std::size_t c = 0; c < count; ++c) {
    if (bnorm[c] != 0.0) pending.push_back(c);
  }
  Eigen::VectorXd r(n);
  for (int cycle = 0; !pending.empty(); ++cycle) {
    std::vector<std::size_t> active;
    std::vector<Eigen::VectorXd> residuals;
    std::vector<double> targets;
    std::vector<int> budgets;
    for (std::size_t c : pending) {
      SolveResult& res = results[c];
      residual(laplacian_, b[c], res.x, r);
      res.relative_residual = norm2(r) / bnorm[c];
      if (res.relative_residual <= tol) continue;
      const int budget = max_iterations_ - res.iterations;
      if (budget <= 0 || cycle >= kMaxCycles) {
        res.converged = false;
        continue;
      }
      active.push_back(c);
      residuals.push_back(r);
      // Aim below the target: the recurrence estimate drifts from the true
      // residual in floating point.
      targets.push_back(0.5 * tol * bnorm[c]);
      budgets.push_back(budget);
    }
    if (active.empty()) break;
    std::vector<Eigen::VectorXd> updates(active.size());
    std::vector<int> used(active.size(), 0);
    std::vector<const Eigen::VectorXd*> rp(active.size());
    std::vector<Eigen::VectorXd*> up(active.size());
    for (std::size_t j = 0; j < active.size(); ++j) {
      rp[j] = &residuals[j];
      up[j] = &updates[j];
    }
    for (std::size_t lo = 0; lo < active.size();) {
      const std::size_t left = active.size() - lo;
      const int width = static_cast<int>(std::min<std::size_t>(left, kBlockWidth));
      auto run = [&](auto kernel) {
        kernel(laplacian_, rp.data() + lo, targets.data() + lo, budgets.data() + lo, width,
               up.data() + lo, used.data() + lo);
      };
      if (width > 8) {
        run(block_cycle<kBlockWidth>);
      } else if (width > 4) {
        run(block_cycle<8>);
      } else if (width > 2) {
        run(block_cycle<4>);
      } else if (width > 1) {
        run(block_cycle<2>);
      } else {
        run(block_cycle<1>);
      }
      lo += static_cast<std::size_t>(width);
    }
    for (std::size_t j = 0; j < active.size(); ++j) {
      SolveResult& res = results[active[j]];
      res.x += updates[j];
      remove_mean(res.x);
      res.iterations += std::max(used[j], 1);
    }
    pending = std::move(active);
  }
  return results;
}

SolveResult LaplacianSolver::solve(const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd* initial_guess) const {
  std::vector<SolveResult> out = solve_block({rhs}, {initial_guess});
  SolveResult& result = out.front();
  if (!result.converged) {
    throw SolverError("MINRES did not reach relative residual " +
                          std::to_string(options_.tolerance) + " in " +
                          std::to_string(result.iterations) + " iterations (achieved " +
                          std::to_string(result.relative_residual) + ")",
                      result.relative_residual, result.iterations);
  }
  return std::move(result);
}

SolveResult solve_psd(const SparseMatrix& laplacian, const Eigen::VectorXd& rhs,
                      const SolverOptions& options) {
  LaplacianSolver solver(laplacian, options);
  return solver.solve(rhs);
}

}  // namespace resistograph
