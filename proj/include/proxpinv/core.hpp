#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "proxpinv/errors.hpp"
#include "proxpinv/problem.hpp"

namespace proxpinv {

/// f(Phi) = 1/2 ||M Phi - I||_F^2.
inline double objective(const ProblemData& p, const Iterate& x) {
  require_iterate_shape(p, x, "objective");
  Matrix residual = p.matrix() * x;
  residual.diagonal().array() -= 1.0;
  return 0.5 * residual.squaredNorm();
}

/// grad f(Phi) = M^T (M Phi - I), an n x m matrix.
inline Iterate gradient(const ProblemData& p, const Iterate& x) {
  require_iterate_shape(p, x, "gradient");
  Matrix residual = p.matrix() * x;
  residual.diagonal().array() -= 1.0;
  return p.matrix().transpose() * residual;
}

/// Factorization of A^{-1} = (I + mu M^T M) together with C = (M^T M + mu^{-1} I)^{-1} M^T.
///
/// B = (I + mu M^T M)^{-1} is never formed; apply_b() runs the triangular solves.
/// The object is immutable and may be shared freely once built.
class ProxOperators {
 public:
  ProxOperators(Eigen::LLT<Matrix> llt, Matrix c, double mu)
      : llt_(std::move(llt)), c_(std::move(c)), mu_(mu) {}

  double mu() const noexcept { return mu_; }
  Eigen::Index n() const noexcept { return c_.rows(); }
  Eigen::Index m() const noexcept { return c_.cols(); }

  const Matrix& c() const noexcept { return c_; }

  /// B * rhs, i.e. the solve (I + mu M^T M) X = rhs.
  Matrix apply_b(const Matrix& rhs) const {
    if (rhs.rows() != n()) {
      throw ShapeError("apply_b: right-hand side has " + std::to_string(rhs.rows()) +
                       " rows, factorization is " + std::to_string(n()) + "x" +
                       std::to_string(n()));
    }
    return llt_.solve(rhs);
  }

  /// L L^T, for checking the factorization against the explicit product.
  Matrix reconstruct() const {
    const Matrix l = llt_.matrixL();
    return l * l.transpose();
  }

 private:
  Eigen::LLT<Matrix> llt_;
  Matrix c_;
  double mu_;
};

/// I + mu M^T M, symmetric positive definite for any mu > 0.
inline Matrix prox_system_matrix(const ProblemData& p, double mu) {
  const Eigen::Index n = p.cols();
  Matrix a = Matrix::Identity(n, n);
  a.selfadjointView<Eigen::Lower>().rankUpdate(p.matrix().transpose(), mu);
  return a.selfadjointView<Eigen::Lower>();
}

inline ProxOperators build_prox_operators(const ProblemData& p, double mu) {
  require_positive_mu(mu);
  Eigen::LLT<Matrix> llt(prox_system_matrix(p, mu));
  if (llt.info() != Eigen::Success) {
    throw ConditioningError("Cholesky factorization of I + mu M^T M failed at mu = " +
                                std::to_string(mu),
                            mu);
  }
  const Matrix l = llt.matrixL();
  if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) {
    throw ConditioningError("degenerate Cholesky factor of I + mu M^T M at mu = " +
                                std::to_string(mu),
                            mu);
  }
  Matrix c = llt.solve(mu * p.matrix().transpose());
  return ProxOperators(std::move(llt), std::move(c), mu);
}

namespace detail {

inline void require_operators_fit(const ProxOperators& ops, const ProblemData& p) {
  if (ops.n() != p.cols() || ops.m() != p.rows()) {
    throw ShapeError("prox operators were built for a " + shape_string(ops.m(), ops.n()) +
                     " matrix, problem is " + shape_string(p.rows(), p.cols()));
  }
}

}  // namespace detail

/// One proximal step: the solve of (I + mu M^T M) X = Phi_k + mu M^T.
///
/// Evaluated as X = Phi_k - mu B grad f(Phi_k), which is the same matrix but avoids
/// forming Phi_k + mu M^T, whose rounding swamps Phi_k once mu is large.
inline Iterate prox_step_exact(const ProxOperators& ops, const ProblemData& p,
                               const Iterate& current) {
  detail::require_operators_fit(ops, p);
  require_iterate_shape(p, current, "prox_step_exact");
  return current - ops.mu() * ops.apply_b(gradient(p, current));
}

/// ||B Phi + C - Phi||_F. Zero exactly on fixed points of Phi -> B Phi + C.
inline double fixed_point_residual(const ProxOperators& ops, const ProblemData& p,
                                   const Iterate& x) {
  detail::require_operators_fit(ops, p);
  require_iterate_shape(p, x, "fixed_point_residual");
  // B Phi + C - Phi = -mu B grad f(Phi)
  return ops.mu() * ops.apply_b(gradient(p, x)).norm();
}

inline double fixed_point_residual(const ProblemData& p, double mu, const Iterate& x) {
  require_iterate_shape(p, x, "fixed_point_residual");
  return fixed_point_residual(build_prox_operators(p, mu), p, x);
}

/// Outcome of an inner conjugate-gradient solve of one proximal subproblem.
struct InnerSolve {
  Iterate next;    ///< accepted Phi_{k+1}
  int iterations;  ///< CG iterations performed
  double residual; ///< ||(I + mu M^T M) Phi_{k+1} - (Phi_k + mu M^T)||_F, recomputed
};

/// Conjugate gradients on the proximal subproblem, warm-started at X = Phi_k.
///
/// The unknown is the correction D = X - Phi_k, which solves
/// (I + mu M^T M) D = -mu grad f(Phi_k). After every CG iteration
/// accept(next, correction, residual) is consulted, where residual is the true
/// linear residual recomputed from D. The first accepted inner iterate is returned.
/// Throws NonConvergenceError if nothing is accepted within `cap` iterations.
template <typename Accept>
InnerSolve prox_inner_cg(const ProblemData& p, double mu, const Iterate& current, int cap,
                         Accept&& accept) {
  require_positive_mu(mu);
  require_iterate_shape(p, current, "prox_inner_cg");
  if (cap < 1) throw ConfigError("inner iteration cap must be positive");

  const Matrix& m = p.matrix();
  auto apply = [&](const Matrix& d) -> Matrix { return d + mu * (m.transpose() * (m * d)); };

  const Matrix rhs = -mu * gradient(p, current);
  if (rhs.squaredNorm() == 0.0) {
    // Phi_k already minimizes f, so it is its own proximal point.
    return {current, 0, 0.0};
  }

  Matrix d = Matrix::Zero(current.rows(), current.cols());
  Matrix r = rhs;
  Matrix dir = r;
  double rr = r.squaredNorm();
  double true_residual = std::sqrt(rr);

  for (int j = 1; j <= cap; ++j) {
    const Matrix a_dir = apply(dir);
    const double curvature = frobenius_dot(dir, a_dir);
    if (!(curvature > 0.0) || !std::isfinite(curvature)) break;
    const double step = rr / curvature;
    d += step * dir;
    r -= step * a_dir;

    true_residual = (rhs - apply(d)).norm();
    Iterate next = current + d;
    if (accept(static_cast<const Iterate&>(next), static_cast<const Matrix&>(d), true_residual)) {
      return {std::move(next), j, true_residual};
    }

    const double rr_next = r.squaredNorm();
    if (rr_next == 0.0) break;
    dir = r + (rr_next / rr) * dir;
    rr = rr_next;
  }
  std::ostringstream msg;
  msg << "inner solve not accepted within " << cap << " iterations (last residual "
      << std::scientific << std::setprecision(3) << true_residual << ")";
  throw NonConvergenceError(msg.str(), true_residual, cap);
}

/// Inexact proximal step: CG until
///   ||X - A(Phi_k + mu M^T)||_F <= eps_k min{1, ||X - Phi_k||_F^r}.
///
/// The left side is not observable; it is bounded above by the linear residual of
/// (I + mu M^T M) X = Phi_k + mu M^T because that matrix has smallest eigenvalue >= 1.
inline InnerSolve prox_step_inexact(const ProblemData& p, double mu, const Iterate& current,
                                    double eps_k, double r, int inner_cap) {
  if (!(eps_k > 0.0) || !std::isfinite(eps_k)) throw ConfigError("eps_k must be positive");
  if (!(r > 1.0) || !std::isfinite(r)) throw ConfigError("exponent r must exceed 1");
  return prox_inner_cg(p, mu, current, inner_cap,
                       [&](const Iterate&, const Matrix& d, double residual) {
                         const double bound = eps_k * std::min(1.0, std::pow(d.norm(), r));
                         return residual <= bound;
                       });
}

}  // namespace proxpinv
