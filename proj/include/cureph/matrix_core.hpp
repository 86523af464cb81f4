#pragma once

#include <Eigen/Dense>

namespace cureph {

/// Matrix exponential exp(A) by scaling-and-squaring with Pade approximants
/// (degree 13 at the top of the ladder). Accurate to ~1e-13 relative for the
/// moderate-norm matrices arising from sub-intensity evaluation.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Both blocks of exp([[T, M], [0, T]] * y): the propagator exp(T y) and the
/// convolution integral J(y) = int_0^y exp(T (y-u)) M exp(T u) du.
struct VanLoanBlocks {
  Eigen::MatrixXd propagator;  // exp(T y)
  Eigen::MatrixXd integral;    // J(y)
};

VanLoanBlocks van_loan_blocks(const Eigen::MatrixXd& t,
                              const Eigen::MatrixXd& m, double y);

/// J(y) = int_0^y exp(T (y-u)) M exp(T u) du via the augmented exponential.
Eigen::MatrixXd van_loan_integral(const Eigen::MatrixXd& t,
                                  const Eigen::MatrixXd& m, double y);

/// Solves (-T_sub) x = b for a sub-stochastic sub-intensity block T_sub.
/// Throws SingularMatrixError when the block is numerically singular
/// (a transient block containing an absorbing communicating class).
Eigen::VectorXd green_solve(const Eigen::MatrixXd& t_sub,
                            const Eigen::VectorXd& b);

}  // namespace cureph
