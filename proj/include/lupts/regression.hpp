#pragma once

#include <vector>

#include "lupts/types.hpp"

namespace lupts {

/// Output of a least-squares solve: minimum-norm coefficients, the residual
/// matrix targets - design * coefficients, and the numerical rank of the
/// design (singular values below tol::rank * s_max count as zero).
struct LeastSquaresFit {
  Matrix coefficients;  // p x q
  Matrix residuals;     // m x q
  Index rank = 0;
};

/// Minimum-norm least-squares solution of design * B = targets, via a
/// complete orthogonal decomposition. With a full-column-rank design this is
/// the unique normal-equation solution; rank-deficient designs (m < p, or
/// collinear columns) get the minimum-norm solution instead of a failure.
LeastSquaresFit solve_least_squares(const Matrix& design, const Matrix& targets);

/// Left-to-right product of the given factors. The list must be non-empty
/// and adjacent dimensions must conform.
Matrix matrix_chain_product(const std::vector<Matrix>& factors);

/// base^exponent by repeated multiplication; exponent 0 gives the identity.
Matrix matrix_power(const Matrix& base, int exponent);

/// Largest eigenvalue modulus of a square real matrix.
double spectral_radius(const Matrix& square);

}  // namespace lupts
