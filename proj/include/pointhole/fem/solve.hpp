#pragma once
//
// Sparse solves (LDL^T with a conjugate-gradient fallback) and a shift-invert
// subspace iteration for the generalized problem K x = lambda M x.
//

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "pointhole/errors.hpp"
#include "pointhole/fem/assemble.hpp"
#include "pointhole/log.hpp"

namespace pointhole::fem {

struct SolveInfo {
  bool used_fallback = false;
  double relative_residual = 0.0;
};

inline Vector solve(const SparseMatrix& a, const Vector& b, SolveInfo* info = nullptr) {
  if (b.norm() == 0.0) {
    if (info) *info = {};
    return Vector::Zero(b.size());
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  Vector x;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    x = ldlt.solve(b);
    ok = ldlt.info() == Eigen::Success && x.allFinite();
  }
  double res = ok ? (a * x - b).norm() / b.norm() : INFINITY;
  bool fallback = false;
  if (!ok || res > 1e-8) {
    log::warn("solve: LDL^T residual ", res, ", falling back to conjugate gradients");
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg(a);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20 * static_cast<int>(a.rows()));
    x = cg.solve(b);
    res = (a * x - b).norm() / b.norm();
    fallback = true;
    if (!(res < 1e-8)) {
      std::ostringstream msg;
      msg << "solve: factorization and conjugate gradients both failed (relative residual " << res << ")";
      throw NumericalError(msg.str());
    }
  }
  if (info) *info = {fallback, res};
  return x;
}

inline Vector solve(const SparseSystem& sys, SolveInfo* info = nullptr) { return solve(sys.matrix, sys.rhs, info); }

// ---------------------------------------------------------------------------
// generalized eigenproblem

struct EigenPairs {
  std::vector<double> values;        ///< ascending
  Eigen::MatrixXd vectors;           ///< M-orthonormal columns
  std::vector<double> residuals;     ///< ||K x - lambda M x|| / ||x||
  int iterations = 0;
};

struct EigOptions {
  double shift = 0.0;
  int guard = 6;                 ///< extra subspace vectors
  int max_iterations = 500;
  double tol = 1e-10;            ///< relative eigenvalue change for convergence
  unsigned long seed = 12345;
};

/// The `count` eigenvalues closest to `opt.shift`, by subspace iteration with
/// (K - shift M)^{-1} M and Rayleigh-Ritz.
inline EigenPairs gen_eigs(const SparseMatrix& k, const SparseMatrix& m, int count, const EigOptions& opt = {}) {
  const long n = k.rows();
  if (count < 1 || count > n) throw DomainError("gen_eigs: invalid eigenvalue count");
  const int p = static_cast<int>(std::min<long>(n, count + opt.guard));
  const SparseMatrix shifted = k - opt.shift * m;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "gen_eigs: factorization of K - " << opt.shift << " M failed";
    throw NumericalError(msg.str());
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);

  std::vector<double> prev(p, INFINITY);
  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  EigenPairs out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::MatrixXd y = ldlt.solve(m * x);
    const Eigen::MatrixXd ky = k * y, my = m * y;
    Eigen::MatrixXd kr = y.transpose() * ky, mr = y.transpose() * my;
    kr = 0.5 * (kr + kr.transpose()).eval();
    mr = 0.5 * (mr + mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(kr, mr);
    if (ges.info() != Eigen::Success) throw NumericalError("gen_eigs: Rayleigh-Ritz step failed");
    // order Ritz values by distance to the shift
    std::vector<int> order(p);
    for (int j = 0; j < p; ++j) order[j] = j;
    const Eigen::VectorXd ev = ges.eigenvalues();
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(ev[a] - opt.shift) < std::abs(ev[b] - opt.shift); });
    theta.resize(p);
    ritz.resize(p, p);
    for (int j = 0; j < p; ++j) {
      theta[j] = ev[order[j]];
      ritz.col(j) = ges.eigenvectors().col(order[j]);
    }
    x = y * ritz;
    bool converged = true;
    for (int j = 0; j < count; ++j) {
      if (std::abs(theta[j] - prev[j]) > opt.tol * std::max(1.0, std::abs(theta[j]))) converged = false;
      prev[j] = theta[j];
    }
    out.iterations = it;
    if (converged && it > 2) break;
  }
  std::vector<int> idx(count);
  for (int j = 0; j < count; ++j) idx[j] = j;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return theta[a] < theta[b]; });
  out.vectors.resize(n, count);
  for (int j = 0; j < count; ++j) {
    const int c = idx[j];
    out.values.push_back(theta[c]);
    Eigen::VectorXd v = x.col(c);
    v /= std::sqrt(v.dot(m * v));
    out.vectors.col(j) = v;
    out.residuals.push_back((k * v - theta[c] * (m * v)).norm() / v.norm());
  }
  if (out.iterations >= opt.max_iterations)
    log::warn("gen_eigs: no convergence after ", opt.max_iterations, " iterations");
  return out;
}

}  // namespace pointhole::fem
