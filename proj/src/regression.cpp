#include "lupts/regression.hpp"

#include <Eigen/Eigenvalues>
#include <string>

namespace lupts {

LeastSquaresFit solve_least_squares(const Matrix& design, const Matrix& targets) {
  if (design.rows() < 1) {
    throw Error("invalid_argument", "least-squares design needs at least one row");
  }
  if (design.rows() != targets.rows()) {
    throw Error("dimension_mismatch",
                "design has " + std::to_string(design.rows()) + " rows but targets have " +
                    std::to_string(targets.rows()));
  }
  require_finite(design, "least-squares design");
  require_finite(targets, "least-squares targets");

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(tol::rank);
  cod.compute(design);

  LeastSquaresFit fit;
  fit.coefficients = cod.solve(targets);
  fit.residuals = targets - design * fit.coefficients;
  fit.rank = cod.rank();
  return fit;
}

Matrix matrix_chain_product(const std::vector<Matrix>& factors) {
  if (factors.empty()) {
    throw Error("invalid_argument", "matrix chain product of an empty list");
  }
  Matrix product = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    if (product.cols() != factors[i].rows()) {
      throw Error("dimension_mismatch",
                  "chain factor " + std::to_string(i) + " has " +
                      std::to_string(factors[i].rows()) + " rows, expected " +
                      std::to_string(product.cols()));
    }
    product = product * factors[i];
  }
  return product;
}

Matrix matrix_power(const Matrix& base, int exponent) {
  if (base.rows() != base.cols()) {
    throw Error("dimension_mismatch", "matrix power of a non-square matrix");
  }
  if (exponent < 0) {
    throw Error("invalid_argument", "matrix power exponent must be non-negative");
  }
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  for (int i = 0; i < exponent; ++i) {
    result = result * base;
  }
  return result;
}

double spectral_radius(const Matrix& square) {
  if (square.rows() != square.cols()) {
    throw Error("dimension_mismatch", "spectral radius of a non-square matrix");
  }
  require_finite(square, "spectral radius input");
  if (square.rows() == 1) {
    return std::abs(square(0, 0));
  }
  Eigen::EigenSolver<Matrix> solver(square, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace lupts
