#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "proxpinv/errors.hpp"

namespace proxpinv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An iterate lives in R^{n x m} for an m x n problem matrix, so that M * Phi is m x m.
using Iterate = Eigen::MatrixXd;

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

/// The problem matrix M (m x n). Validated on construction and immutable afterwards.
class ProblemData {
 public:
  explicit ProblemData(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.cols() < 1) {
      throw InputError("problem matrix must have at least one row and one column");
    }
    if (!all_finite(m_)) throw InputError("problem matrix contains non-finite entries");
  }

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index rows() const noexcept { return m_.rows(); }
  Eigen::Index cols() const noexcept { return m_.cols(); }

 private:
  Matrix m_;
};

inline std::string shape_string(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

/// Throws ShapeError unless x is n x m for an m x n problem.
inline void require_iterate_shape(const ProblemData& p, const Iterate& x, const char* what) {
  if (x.rows() != p.cols() || x.cols() != p.rows()) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(p.cols(), p.rows()) +
                     " iterate, got " + shape_string(x.rows(), x.cols()));
  }
}

inline void require_positive_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError("mu must be positive and finite, got " + std::to_string(mu));
  }
}

/// Frobenius inner product tr(X^T Y).
inline double frobenius_dot(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError("frobenius_dot: " + shape_string(x.rows(), x.cols()) + " vs " +
                     shape_string(y.rows(), y.cols()));
  }
  return (x.array() * y.array()).sum();
}

}  // namespace proxpinv
