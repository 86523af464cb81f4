#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "cureph/errors.hpp"
#include "cureph/matrix_core.hpp"
#include "support/quadrature.hpp"

using namespace cureph;

namespace {

// Strictly sub-stochastic sub-intensity block (invertible).
Eigen::MatrixXd random_sub_intensity(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd t(d, d);
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      t(i, j) = unif(rng);
      off += t(i, j);
    }
    t(i, i) = -(off + 0.2 + unif(rng));  // strictly positive exit rate
  }
  return t;
}

}  // namespace

TEST_CASE("expm on trivial inputs") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK((expm(zero) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);

  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
  diag(0, 0) = -1.0;
  diag(1, 1) = -2.0;
  const Eigen::MatrixXd e = expm(diag);
  CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-16);

  Eigen::MatrixXd nilpotent = Eigen::MatrixXd::Zero(2, 2);
  nilpotent(0, 1) = 1.0;
  const Eigen::MatrixXd en = expm(nilpotent);
  CHECK(en(0, 0) == doctest::Approx(1.0));
  CHECK(en(0, 1) == doctest::Approx(1.0));
  CHECK(en(1, 0) == doctest::Approx(0.0));
  CHECK(en(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("expm rejects bad input") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, std::nan(""), 0.0, 1.0;
  CHECK_THROWS_AS(expm(bad), InvalidInputError);
  CHECK_THROWS_AS(expm(Eigen::MatrixXd::Zero(2, 3)), InvalidInputError);
}

TEST_CASE("expm agrees with the truncated power series on small norms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-0.05, 0.05);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = unif(rng);
    Eigen::MatrixXd series = Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(4, 4);
    for (int k = 1; k <= 25; ++k) {
      term = term * a / k;
      series += term;
    }
    CHECK((expm(a) - series).norm() < 1e-13);
  }
}

TEST_CASE("expm inverse identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(5, 5);
    for (int i = 0; i < 25; ++i) a(i / 5, i % 5) = unif(rng);
    a *= 10.0 / std::max(1.0, a.cwiseAbs().colwise().sum().maxCoeff());
    const Eigen::MatrixXd prod = expm(a) * expm(-a);
    CHECK((prod - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-10);
  }
}

TEST_CASE("probability conservation for full intensity matrices") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 4;
    const Eigen::MatrixXd t = random_sub_intensity(d, rng);
    // Append the exit column: rows of the full intensity matrix sum to zero.
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(d + 1, d + 1);
    lambda.topLeftCorner(d, d) = t;
    lambda.topRightCorner(d, 1) = -t.rowwise().sum();
    const Eigen::MatrixXd p = expm(lambda * 2.5);
    for (int i = 0; i <= d; ++i) {
      CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.row(i).minCoeff() >= -1e-14);
    }
  }
}

TEST_CASE("van Loan integral trivial cases") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Eigen::MatrixXd j0 =
      van_loan_integral(Eigen::MatrixXd::Zero(2, 2), m, 2.0);
  CHECK((j0 - 2.0 * m).norm() < 1e-13);

  // Exactly zero at y = 0.
  CHECK(van_loan_integral(m, m, 0.0).norm() == 0.0);

  // Scalar closed form m y exp(-a y).
  Eigen::MatrixXd t1(1, 1), m1(1, 1);
  t1 << -0.7;
  m1 << 1.3;
  for (const double y : {0.5, 2.0, 7.0}) {
    const double expected = 1.3 * y * std::exp(-0.7 * y);
    CHECK(van_loan_integral(t1, m1, y)(0, 0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  CHECK_THROWS_AS(van_loan_integral(t1, m, 1.0), InvalidInputError);
  CHECK_THROWS_AS(van_loan_integral(m, m, -1.0), InvalidInputError);
}

TEST_CASE("van Loan integral matches adaptive quadrature") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 3;
    const Eigen::MatrixXd t = random_sub_intensity(d, rng);
    Eigen::VectorXd u(d), v(d);
    for (int i = 0; i < d; ++i) {
      u[i] = unif(rng);
      v[i] = unif(rng);
    }
    const Eigen::MatrixXd m = u * v.transpose();  // rank one
    const double y = 1.5;
    const Eigen::MatrixXd j = van_loan_integral(t, m, y);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const double oracle = cureph::testing::adaptive_simpson(
            [&](double s) {
              return (expm(t * (y - s)) * m * expm(t * s))(a, b);
            },
            0.0, y, 1e-12);
        CHECK(j(a, b) == doctest::Approx(oracle).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("van Loan derivative identity d/dy J = T J + M exp(T y)") {
  std::mt19937_64 rng(19);
  const Eigen::MatrixXd t = random_sub_intensity(3, rng);
  Eigen::MatrixXd m(3, 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = unif(rng);

  const double y = 1.2, h = 1e-5;
  const Eigen::MatrixXd deriv =
      (van_loan_integral(t, m, y + h) - van_loan_integral(t, m, y - h)) /
      (2.0 * h);
  const Eigen::MatrixXd rhs = t * van_loan_integral(t, m, y) + m * expm(t * y);
  CHECK((deriv - rhs).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("green_solve examples and oracle") {
  Eigen::MatrixXd t1(1, 1);
  t1 << -2.0;
  Eigen::VectorXd b1(1);
  b1 << 1.0;
  CHECK(green_solve(t1, b1)(0) == doctest::Approx(0.5));

  const Eigen::MatrixXd t2 = -Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd b2(2);
  b2 << 3.0, 4.0;
  CHECK((green_solve(t2, b2) - b2).norm() < 1e-14);

  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd t = random_sub_intensity(4, rng);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    const Eigen::VectorXd x = green_solve(t, b);
    const Eigen::VectorXd oracle = (-t).inverse() * b;  // explicit inverse
    CHECK((x - oracle).norm() < 1e-10);
  }
}

TEST_CASE("green_solve flags singular transient blocks") {
  // Absorbing communicating class: zero row makes -T singular.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 2);
  t(0, 0) = -1.0;
  t(0, 1) = 1.0;
  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  CHECK_THROWS_AS(green_solve(t, b), SingularMatrixError);
}
