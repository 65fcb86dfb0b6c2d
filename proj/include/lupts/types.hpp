#pragma once

#include <Eigen/Dense>
#include <string>

#include "lupts/error.hpp"

namespace lupts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative tolerances shared by the numeric modules (double precision,
/// dimensions up to a few hundred).
namespace tol {
inline constexpr double orth = 1e-8;   // residual orthogonality
inline constexpr double fit = 1e-9;    // exact-recovery / composition identities
inline constexpr double eig = 1e-8;    // spectral radius
inline constexpr double rank = 1e-10;  // singular values below rank * s_max are zero
}  // namespace tol

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw Error("non_finite", what + " contains NaN or Inf entries");
  }
}

inline void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) {
    throw Error("non_finite", what + " is not finite");
  }
}

}  // namespace lupts
