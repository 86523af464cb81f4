#include "cureph/matrix_core.hpp"

#include <cmath>
#include <string>

#include "cureph/errors.hpp"

namespace cureph {

namespace {

using Eigen::MatrixXd;

// Induced 1-norm (max column sum).
double one_norm(const MatrixXd& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

void pade3(const MatrixXd& a, const MatrixXd& a2, MatrixXd& u, MatrixXd& v) {
  static const double b[] = {120., 60., 12., 1.};
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  u.noalias() = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

void pade5(const MatrixXd& a, const MatrixXd& a2, MatrixXd& u, MatrixXd& v) {
  static const double b[] = {30240., 15120., 3360., 420., 30., 1.};
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  const MatrixXd a4 = a2 * a2;
  u.noalias() = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade7(const MatrixXd& a, const MatrixXd& a2, MatrixXd& u, MatrixXd& v) {
  static const double b[] = {17297280., 8648640., 1995840., 277200.,
                             25200.,    1512.,    56.,      1.};
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  u.noalias() = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade9(const MatrixXd& a, const MatrixXd& a2, MatrixXd& u, MatrixXd& v) {
  static const double b[] = {17643225600., 8821612800., 2075673600.,
                             302702400.,   30270240.,   2162160.,
                             110880.,      3960.,       90.,
                             1.};
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd a8 = a6 * a2;
  u.noalias() = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade13(const MatrixXd& a, const MatrixXd& a2, MatrixXd& u, MatrixXd& v) {
  static const double b[] = {64764752532480000., 32382376266240000.,
                             7771770303897600.,  1187353796428800.,
                             129060195264000.,   10559470521600.,
                             670442572800.,      33522128640.,
                             1323241920.,        40840800.,
                             960960.,            16380.,
                             182.,               1.};
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  MatrixXd w = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  w += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u.noalias() = a * w;
  v.noalias() = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw InvalidInputError("expm: matrix must be square");
  }
  if (!a.allFinite()) {
    throw InvalidInputError("expm: matrix has non-finite entries");
  }
  const Eigen::Index d = a.rows();
  if (d == 0) return Eigen::MatrixXd(0, 0);

  // Pade order thresholds for double precision (Higham 2005).
  static const double theta3 = 1.495585217958292e-2;
  static const double theta5 = 2.539398330063230e-1;
  static const double theta7 = 9.504178996162932e-1;
  static const double theta9 = 2.097847961257068e0;
  static const double theta13 = 5.371920351148152e0;

  const double norm = one_norm(a);
  int squarings = 0;
  MatrixXd u(d, d), v(d, d);
  MatrixXd scaled = a;

  if (norm <= theta13) {
    const MatrixXd a2 = a * a;
    if (norm <= theta3) {
      pade3(a, a2, u, v);
    } else if (norm <= theta5) {
      pade5(a, a2, u, v);
    } else if (norm <= theta7) {
      pade7(a, a2, u, v);
    } else if (norm <= theta9) {
      pade9(a, a2, u, v);
    } else {
      pade13(a, a2, u, v);
    }
  } else {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    scaled = a / std::ldexp(1.0, squarings);
    const MatrixXd a2 = scaled * scaled;
    pade13(scaled, a2, u, v);
  }

  // (V - U) X = (V + U)
  MatrixXd num = v + u;
  MatrixXd den = v - u;
  MatrixXd result = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

VanLoanBlocks van_loan_blocks(const Eigen::MatrixXd& t,
                              const Eigen::MatrixXd& m, double y) {
  const Eigen::Index d = t.rows();
  if (t.rows() != t.cols() || m.rows() != m.cols() || m.rows() != d) {
    throw InvalidInputError(
        "van_loan_integral: T and M must be square with equal dimension");
  }
  if (!(y >= 0.0) || !std::isfinite(y)) {
    throw InvalidInputError("van_loan_integral: y must be finite and >= 0");
  }
  if (y == 0.0) {
    return {Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Zero(d, d)};
  }
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  aug.topLeftCorner(d, d) = t;
  aug.topRightCorner(d, d) = m;
  aug.bottomRightCorner(d, d) = t;
  const Eigen::MatrixXd e = expm(aug * y);
  return {e.topLeftCorner(d, d), e.topRightCorner(d, d)};
}

Eigen::MatrixXd van_loan_integral(const Eigen::MatrixXd& t,
                                  const Eigen::MatrixXd& m, double y) {
  return van_loan_blocks(t, m, y).integral;
}

Eigen::VectorXd green_solve(const Eigen::MatrixXd& t_sub,
                            const Eigen::VectorXd& b) {
  const Eigen::Index d = t_sub.rows();
  if (t_sub.rows() != t_sub.cols() || b.size() != d) {
    throw InvalidInputError("green_solve: dimension mismatch");
  }
  if (!t_sub.allFinite() || !b.allFinite()) {
    throw InvalidInputError("green_solve: non-finite entries");
  }
  const Eigen::MatrixXd neg = -t_sub;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(neg);
  Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite()) {
    throw SingularMatrixError(
        "green_solve: transient block is numerically singular");
  }
  // One step of iterative refinement, then the residual contract check.
  Eigen::VectorXd resid = b - neg * x;
  x += lu.solve(resid);
  resid = b - neg * x;
  const double bnorm = b.norm();
  if (resid.norm() > 1e-10 * bnorm + 1e-300) {
    throw SingularMatrixError(
        "green_solve: residual " + std::to_string(resid.norm()) +
        " exceeds tolerance; transient block is numerically singular");
  }
  return x;
}

}  // namespace cureph
