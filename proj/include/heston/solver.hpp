#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <cstdio>
#include <vector>

#include "heston/assembly.hpp"

namespace heston {

enum class SolveStatus : std::uint8_t { converged, not_converged, singular };

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  int restart = 30;
  double ilut_droptol = 1e-7;
  int ilut_fill = 40;
};

struct SolveResult {
  GridFunction solution;  // full grid, Dirichlet values included
  SolveStatus status = SolveStatus::converged;
  int iterations = 0;
  double final_residual = 0.0;              // relative to |b|
  std::vector<double> residual_history;     // true residual per restart cycle
};

namespace detail {

// Restarted GMRES with right ILU preconditioning.  The loop is spelled out
// (rather than delegated) so the residual history, the best-iterate return
// and bit-reproducibility are under direct control.
inline SolveStatus gmres_ilut(const SparseMat& A, const Vec& b, Vec& x,
                              const SolveOptions& opt, int& iters,
                              double& final_rel, std::vector<double>& history) {
  const Eigen::Index n = A.rows();
  x = Vec::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    final_rel = 0.0;
    history.push_back(0.0);
    return SolveStatus::converged;
  }

  Eigen::IncompleteLUT<double> prec;
  prec.setDroptol(opt.ilut_droptol);
  prec.setFillfactor(opt.ilut_fill);
  prec.compute(A);
  if (prec.info() != Eigen::Success) return SolveStatus::singular;

  const int m = opt.restart;
  Mat V(n, m + 1);
  Mat H = Mat::Zero(m + 1, m);
  Vec cs = Vec::Zero(m), sn = Vec::Zero(m), gvec = Vec::Zero(m + 1);

  iters = 0;
  while (iters < opt.max_iter) {
    Vec r = b - A * x;
    const double beta = r.norm();
    history.push_back(beta / bnorm);
    if (beta / bnorm <= opt.tol) {
      final_rel = beta / bnorm;
      return SolveStatus::converged;
    }
    V.col(0) = r / beta;
    gvec.setZero();
    gvec[0] = beta;

    int j = 0;
    bool breakdown = false;
    for (; j < m && iters < opt.max_iter; ++j, ++iters) {
      const Vec z = prec.solve(V.col(j));
      Vec w = A * z;
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 1e-300) {
        V.col(j + 1) = w / H(j + 1, j);
      } else {
        breakdown = true;
      }
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = (denom == 0.0) ? 1.0 : H(j, j) / denom;
      sn[j] = (denom == 0.0) ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      gvec[j + 1] = -sn[j] * gvec[j];
      gvec[j] = cs[j] * gvec[j];
      if (std::abs(gvec[j + 1]) / bnorm <= opt.tol || breakdown) {
        ++j;
        ++iters;
        break;
      }
    }
    // solve the small triangular system and update x through the
    // preconditioner (right preconditioning keeps true residuals)
    Vec y = Vec::Zero(j);
    for (int i = j - 1; i >= 0; --i) {
      double s = gvec[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = (H(i, i) != 0.0) ? s / H(i, i) : 0.0;
    }
    x += prec.solve(V.leftCols(j) * y);
    if (breakdown) break;
  }
  const double rel = (b - A * x).norm() / bnorm;
  history.push_back(rel);
  final_rel = rel;
  return rel <= opt.tol ? SolveStatus::converged : SolveStatus::not_converged;
}

}  // namespace detail

inline SolveResult solve_system(const LinearSystem& sys,
                                const SolveOptions& opt = {}) {
  SolveResult res;
  Vec xu;
  res.status = detail::gmres_ilut(sys.A, sys.b, xu, opt, res.iterations,
                                  res.final_residual, res.residual_history);
  Vec full = sys.dirichlet_values;
  if (res.status != SolveStatus::singular)
    for (std::size_t u = 0; u < sys.node_of_unknown.size(); ++u)
      full[sys.node_of_unknown[u]] = xu[static_cast<Eigen::Index>(u)];
  res.solution = GridFunction(sys.grid, std::move(full));
  return res;
}

// Assemble and solve the variational problem with nodal source f and
// Dirichlet data g.  Existence/uniqueness statements assume a positive
// killing rate, so c0 = 0 earns a warning on the solve path.
inline SolveResult solve_variational(const Coefficients& c, GridPtr grid,
                                     const GridFunction& f,
                                     const GridFunction& dirichlet,
                                     const SolveOptions& opt = {}) {
  if (c.c0 == 0.0)
    std::fprintf(stderr,
                 "warning: solving with c0 = 0; the well-posedness theory "
                 "assumes c0 > 0\n");
  const auto sys = assemble_system(c, grid, dirichlet, f);
  return solve_system(sys, opt);
}

}  // namespace heston
