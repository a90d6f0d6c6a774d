#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "proxpinv/errors.hpp"
#include "proxpinv/problem.hpp"

// Reference computations. Nothing here calls into the proximal code path.

namespace proxpinv::oracle {

inline constexpr double default_rank_tol = 1e-10;

namespace detail {
inline void require_rank_tol(double tol) {
  if (!(tol > 0.0 && tol < 1.0)) {
    throw ConfigError("rank tolerance must lie in (0, 1), got " + std::to_string(tol));
  }
}
}  // namespace detail

/// M^+ by SVD; singular values <= rank_tol * sigma_max are treated as zero.
inline Iterate svd_pseudo_inverse(const ProblemData& p, double rank_tol = default_rank_tol) {
  detail::require_rank_tol(rank_tol);
  const Eigen::JacobiSVD<Matrix> svd(p.matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Iterate pinv = Matrix::Zero(p.cols(), p.rows());
  if (s.size() == 0 || s(0) == 0.0) return pinv;
  const double cutoff = rank_tol * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= cutoff) break;
    pinv.noalias() += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).transpose();
  }
  return pinv;
}

/// Singular values in nonincreasing order.
inline Vector singular_values(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

/// (M^T M + eps I)^{-1} M^T.
inline Iterate tikhonov(const ProblemData& p, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("Tikhonov eps must be positive");
  const Matrix& m = p.matrix();
  Matrix gram = m.transpose() * m;
  gram.diagonal().array() += eps;
  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw ConditioningError("M^T M + eps I not factorizable", eps);
  return llt.solve(m.transpose());
}

/// alpha_1, the smallest nonzero eigenvalue of Phi -> M^T M Phi, and its eigenspace E_1.
struct SpectralInfo {
  double alpha1 = 0.0;
  double lambda_max = 0.0;
  /// Orthonormal eigenvectors of M^T M for alpha_1 (n x d).
  Matrix e1_vectors;
  /// E_1 inside R^{n x m}: each eigenvector placed in each of the m columns.
  std::vector<Iterate> e1_basis;
  int numerical_rank = 0;
  double rank_tolerance = default_rank_tol;
};

/// Eigenvalues within this relative distance of alpha_1 are taken to belong to E_1.
inline constexpr double eigen_cluster_tol = 1e-10;

inline SpectralInfo spectral_info(const ProblemData& p, double rank_tol = default_rank_tol) {
  detail::require_rank_tol(rank_tol);
  const Matrix& m = p.matrix();
  const Matrix gram = m.transpose() * m;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw SpectralError("eigendecomposition of M^T M failed");

  const Vector& lambda = eig.eigenvalues();  // ascending
  const Eigen::Index n = lambda.size();
  const double lambda_max = lambda(n - 1);
  if (!(lambda_max > 0.0)) throw SpectralError("M is zero: no nonzero eigenvalue of M^T M");

  const double threshold = rank_tol * lambda_max;
  Eigen::Index first = 0;
  while (first < n && lambda(first) <= threshold) ++first;

  SpectralInfo info;
  info.alpha1 = lambda(first);
  info.lambda_max = lambda_max;
  info.numerical_rank = static_cast<int>(n - first);
  info.rank_tolerance = rank_tol;

  Eigen::Index last = first;
  while (last + 1 < n && lambda(last + 1) - info.alpha1 <= eigen_cluster_tol * info.alpha1) {
    ++last;
  }
  info.e1_vectors = eig.eigenvectors().middleCols(first, last - first + 1);

  const Eigen::Index cols = p.rows();
  for (Eigen::Index v = 0; v < info.e1_vectors.cols(); ++v) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      Iterate psi = Matrix::Zero(n, cols);
      psi.col(j) = info.e1_vectors.col(v);
      info.e1_basis.push_back(std::move(psi));
    }
  }
  return info;
}

/// Frobenius-orthogonal projection of x onto span(e1_basis).
inline Iterate project_onto_e1(const SpectralInfo& info, const Iterate& x) {
  Iterate out = Matrix::Zero(x.rows(), x.cols());
  for (const Iterate& psi : info.e1_basis) out += frobenius_dot(psi, x) * psi;
  return out;
}

/// Distance from x / ||x||_F to its projection onto E_1.
inline double direction_distance(const SpectralInfo& info, const Iterate& x) {
  const double nrm = x.norm();
  if (nrm == 0.0) return 0.0;
  const Iterate unit = x / nrm;
  return (unit - project_onto_e1(info, unit)).norm();
}

/// Limit of the proximal sequence started at phi0: M^+ + (I - M^+ M) phi0,
/// the orthogonal projection of phi0 onto argmin f = M^+ + ker(Phi -> M Phi).
inline Iterate limit_oracle(const ProblemData& p, const Iterate& phi0,
                            double rank_tol = default_rank_tol) {
  require_iterate_shape(p, phi0, "limit_oracle");
  if (!all_finite(phi0)) throw InputError("initial iterate contains non-finite entries");
  const Iterate pinv = svd_pseudo_inverse(p, rank_tol);
  const Eigen::Index n = p.cols();
  const Matrix null_projector = Matrix::Identity(n, n) - pinv * p.matrix();
  return pinv + null_projector * phi0;
}

struct TheoreticalRates {
  double power_rate;    ///< 1 / (1 + alpha_1 mu)
  double linear_bound;  ///< 1 / sqrt(1 + mu^2 alpha_1^2)
};

inline TheoreticalRates theoretical_rates(const SpectralInfo& info, double mu) {
  require_positive_mu(mu);
  const double t = info.alpha1 * mu;
  return {1.0 / (1.0 + t), 1.0 / std::hypot(1.0, t)};
}

}  // namespace proxpinv::oracle
