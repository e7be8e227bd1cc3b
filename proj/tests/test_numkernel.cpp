#include <doctest.h>

#include <cmath>
#include <random>

#include "delayadm/error.hpp"
#include "delayadm/numkernel.hpp"
#include "oracles.hpp"

using namespace delayadm;

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
  CMatrix a = CMatrix::Zero(3, 3);
  a(0, 0) = -1.0;
  a(1, 1) = cplx(0.0, 2.0);
  a(2, 2) = 0.5;
  const CMatrix e = expm(a, 1.5);
  CHECK(std::abs(e(0, 0) - std::exp(-1.5)) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(cplx(0.0, 3.0))) < 1e-14);
  CHECK(std::abs(e(2, 2) - std::exp(0.75)) < 1e-13);
  CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("expm of a nilpotent Jordan block is a polynomial") {
  CMatrix n = CMatrix::Zero(3, 3);
  n(0, 1) = 1.0;
  n(1, 2) = 1.0;
  const CMatrix e = expm(n, 2.0);
  CHECK(std::abs(e(0, 1) - 2.0) < 1e-14);
  CHECK(std::abs(e(0, 2) - 2.0) < 1e-14);
  CHECK(std::abs(e(1, 2) - 2.0) < 1e-14);
  CHECK(std::abs(e(0, 0) - 1.0) < 1e-14);
}

TEST_CASE("expm satisfies the group law on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = oracle::random_complex(4, 4, rng);
    const CMatrix lhs = expm(a, 0.7);
    const CMatrix rhs = expm(a, 0.3) * expm(a, 0.4);
    CHECK((lhs - rhs).norm() <= 1e-12 * lhs.norm());
  }
}

TEST_CASE("expm rejects negative time") { CHECK_THROWS_AS(expm(CMatrix::Identity(2, 2), -1.0), RangeError); }

TEST_CASE("solve recovers a planted solution") {
  std::mt19937_64 rng(3);
  const CMatrix m = oracle::random_complex(6, 6, rng);
  const CVector x = oracle::random_complex(6, 1, rng);
  const CVector b = m * x;
  CHECK((solve(m, b) - x).norm() < 1e-12 * x.norm());
}

TEST_CASE("solve reports singular systems") {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(solve(m, CVector(CVector::Ones(2))), SingularityError);
  CHECK_THROWS_AS(solve(m, CVector(CVector::Ones(3))), DimensionError);
}

TEST_CASE("op_norm agrees with a dense singular value oracle") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 5, 9}) {
    const CMatrix m = oracle::random_complex(n, n + 1, rng);
    CHECK(op_norm(m) == doctest::Approx(oracle::spectral_norm(m)).epsilon(1e-10));
  }
  CHECK(op_norm(CMatrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("weighted_op_norm is the norm of the rescaled matrix") {
  std::mt19937_64 rng(9);
  const CMatrix m = oracle::random_complex(5, 4, rng);
  const std::vector<double> in_w = {0.5, 1.0, 2.0, 0.25};
  const std::vector<double> out_w = {1.0, 0.1, 3.0, 0.5, 2.0};
  CMatrix scaled = m;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) scaled(i, j) *= std::sqrt(out_w[i]) / std::sqrt(in_w[j]);
  }
  const double expect = oracle::spectral_norm(scaled);
  CHECK(weighted_op_norm(m, in_w, out_w) == doctest::Approx(expect).epsilon(1e-10));

  std::vector<SparseColumn> cols(4);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 5; ++i) cols[j].emplace_back(i, m(i, j));
  }
  CHECK(weighted_op_norm(cols, in_w, out_w) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("isolated entries are handled without the power iteration") {
  // A diagonal matrix is all isolated entries; its norm is the largest modulus.
  CMatrix d = CMatrix::Zero(4, 4);
  d(0, 0) = 0.5;
  d(1, 1) = cplx(0.0, -3.0);
  d(2, 2) = 1.0;
  const std::vector<double> w(4, 1.0);
  CHECK(weighted_op_norm(d, w, w) == doctest::Approx(3.0));
}

TEST_CASE("numerical abscissa of dissipative and skew matrices") {
  std::mt19937_64 rng(17);
  const CMatrix g = oracle::random_complex(4, 4, rng);
  CHECK(std::abs(numerical_abscissa(0.5 * (g - g.adjoint()))) < 1e-12);
  CHECK(numerical_abscissa(oracle::random_dissipative(4, rng)) <= 1e-12);
  CMatrix h(2, 2);
  h << 2.0, 1.0, 1.0, 2.0;
  CHECK(hermitian_max_eigenvalue(h) == doctest::Approx(3.0));
}

TEST_CASE("input guards") {
  CHECK_THROWS_AS(require_square(CMatrix::Zero(2, 3), "m"), DimensionError);
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(require_finite(bad, "m"), DomainError);
  CHECK(inf_norm(bad.topRows(1)) == doctest::Approx(1.0));
}

TEST_CASE("expm group law for ‖A‖ ≤ 10 and s, t in [0, 2]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    // Dissipative generators keep the exponentials bounded, so the absolute
    // tolerance is meaningful.
    CMatrix a = oracle::random_dissipative(3, rng);
    a *= (1.0 + trial % 10) / oracle::spectral_norm(a);
    const double s = u(rng);
    const double t = u(rng);
    CHECK(oracle::spectral_norm(expm(a, s) * expm(a, t) - expm(a, s + t)) <= 1e-10);
  }
}

TEST_CASE("op_norm is submultiplicative") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = oracle::random_complex(4, 4, rng);
    const CMatrix b = oracle::random_complex(4, 4, rng);
    CHECK(op_norm(a * b) <= op_norm(a) * op_norm(b) + 1e-8);
  }
}

TEST_CASE("solve and multiply round trip on well-conditioned inputs") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix m = CMatrix::Identity(5, 5) * 4.0 + oracle::random_complex(5, 5, rng) * 0.5;
    const CVector b = oracle::random_complex(5, 1, rng);
    CHECK((m * solve(m, b) - b).norm() <= 1e-10);
  }
}
