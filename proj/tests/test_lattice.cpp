#include <doctest.h>

#include <cmath>

#include "cflow/lattice.hpp"
#include "cflow/rng.hpp"
#include "oracles.hpp"

using namespace cflow;

TEST_CASE("params_to_matrix: cubic and orthorhombic are diagonal") {
  const LatticeMatrix m = params_to_matrix({2, 2, 2, 90, 90, 90});
  CHECK((m - 2.0 * Mat3::Identity()).norm() < 1e-12);

  const LatticeMatrix o = params_to_matrix({1, 2, 3, 90, 90, 90});
  CHECK(std::abs(o(0, 0) - 1) < 1e-12);
  CHECK(std::abs(o(1, 1) - 2) < 1e-12);
  CHECK(std::abs(o(2, 2) - 3) < 1e-12);
  CHECK(std::abs(o(0, 1)) + std::abs(o(0, 2)) + std::abs(o(1, 0)) + std::abs(o(1, 2)) +
            std::abs(o(2, 0)) + std::abs(o(2, 1)) <
        1e-12);
}

TEST_CASE("params_to_matrix: hexagonal rows and Gram matrix") {
  const LatticeParams p{1, 1, 2, 90, 90, 120};
  const LatticeMatrix m = params_to_matrix(p);
  CHECK(std::abs(m(1, 0) + 0.5) < 1e-12);
  CHECK(std::abs(m(1, 1) - std::sqrt(3.0) / 2.0) < 1e-12);
  CHECK(std::abs(m(2, 2) - 2.0) < 1e-12);

  const Mat3 gram = m * m.transpose();
  CHECK(std::abs(gram(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(gram(1, 1) - 1.0) < 1e-10);
  CHECK(std::abs(gram(2, 2) - 4.0) < 1e-10);
  CHECK(std::abs(gram(0, 1) - std::cos(120.0 * M_PI / 180.0)) < 1e-10);
  CHECK(std::abs(gram(0, 2)) < 1e-10);
  CHECK(std::abs(gram(1, 2)) < 1e-10);
}

TEST_CASE("matrix_to_params: diagonal and round trips") {
  const LatticeParams p = matrix_to_params(2.0 * Mat3::Identity());
  CHECK(std::abs(p.a - 2) < 1e-12);
  CHECK(std::abs(p.alpha - 90) < 1e-12);

  Rng rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const LatticeParams q = oracle::random_params(rng);
    const LatticeParams r = matrix_to_params(params_to_matrix(q));
    CHECK(std::abs(r.a - q.a) < 1e-10 * q.a);
    CHECK(std::abs(r.b - q.b) < 1e-10 * q.b);
    CHECK(std::abs(r.c - q.c) < 1e-10 * q.c);
    CHECK(std::abs(r.alpha - q.alpha) < 1e-9);
    CHECK(std::abs(r.beta - q.beta) < 1e-9);
    CHECK(std::abs(r.gamma - q.gamma) < 1e-9);
  }
}

TEST_CASE("matrix_to_params: invariant under rotations") {
  Rng rng(12);
  const LatticeParams p = oracle::random_params(rng);
  const LatticeMatrix m = params_to_matrix(p);
  for (int trial = 0; trial < 100; ++trial) {
    // random rotation via QR of a Gaussian matrix, sign-fixed to det +1
    Mat3 g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = rng.gauss();
    Eigen::HouseholderQR<Mat3> qr(g);
    Mat3 q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1;
    const LatticeParams r = matrix_to_params(m * q.transpose());
    CHECK(std::abs(r.a - p.a) < 1e-9);
    CHECK(std::abs(r.b - p.b) < 1e-9);
    CHECK(std::abs(r.c - p.c) < 1e-9);
    CHECK(std::abs(r.alpha - p.alpha) < 1e-9);
    CHECK(std::abs(r.beta - p.beta) < 1e-9);
    CHECK(std::abs(r.gamma - p.gamma) < 1e-9);
  }
}

TEST_CASE("params_to_matrix: degenerate angles rejected") {
  CHECK_THROWS(params_to_matrix({1, 1, 1, 170, 170, 170}));
  CHECK_THROWS(params_to_matrix({-1, 1, 1, 90, 90, 90}));
  CHECK_THROWS(matrix_to_params(Mat3::Zero()));
}

namespace {

FracCoords two_atoms() {
  FracCoords f(2, 3);
  f << 0.1, 0.2, 0.3, 0.6, 0.7, 0.8;
  return f;
}

bool params_close(const LatticeParams& x, const LatticeParams& y, double tol) {
  return std::abs(x.a - y.a) < tol && std::abs(x.b - y.b) < tol && std::abs(x.c - y.c) < tol &&
         std::abs(x.alpha - y.alpha) < tol && std::abs(x.beta - y.beta) < tol &&
         std::abs(x.gamma - y.gamma) < tol;
}

} // namespace

TEST_CASE("niggli_reduce: reduced cells pass through unchanged") {
  const NiggliResult r = niggli_reduce({2, 2, 2, 90, 90, 90}, two_atoms());
  CHECK(params_close(r.params, {2, 2, 2, 90, 90, 90}, 1e-10));
  CHECK((r.frac_coords - two_atoms()).norm() < 1e-12);
}

TEST_CASE("niggli_reduce: undoes a shear of a reduced cell") {
  const LatticeParams p{3.1, 3.7, 4.3, 80, 85, 88};
  Eigen::Matrix3i u;
  u << 1, 1, 0, 0, 1, 0, 0, 0, 1;
  const LatticeMatrix sheared = u.cast<double>() * params_to_matrix(p);
  const NiggliResult r = niggli_reduce(matrix_to_params(sheared), two_atoms());
  CHECK(params_close(r.params, p, 1e-8));
}

TEST_CASE("niggli_reduce: angle band and idempotence over random cells") {
  Rng rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const LatticeParams p = oracle::random_params(rng);
    const NiggliResult r = niggli_reduce(p, two_atoms());

    const double angles[3] = {r.params.alpha, r.params.beta, r.params.gamma};
    bool all_low = true, all_high = true;
    for (double a : angles) {
      CHECK(a > 60.0 - 0.05);
      CHECK(a < 120.0 + 0.05);
      all_low = all_low && a <= 90.0 + 0.05;
      all_high = all_high && a >= 90.0 - 0.05;
    }
    CHECK((all_low || all_high));

    const NiggliResult again = niggli_reduce(r.params, r.frac_coords);
    CHECK(params_close(again.params, r.params, 1e-8));
  }
}

TEST_CASE("niggli_reduce: invariant under unimodular re-expression") {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const cflow::Crystal c = oracle::random_crystal(rng, 2);
    const NiggliResult base = niggli_reduce(c.lattice, c.frac_coords);
    for (int k = 0; k < 20; ++k) {
      const Eigen::Matrix3i u = oracle::random_unimodular(rng);
      const cflow::Crystal cc = oracle::apply_unimodular(c, u);
      const NiggliResult other = niggli_reduce(cc.lattice, cc.frac_coords);
      CHECK(params_close(other.params, base.params, 1e-8));
    }
  }
}

TEST_CASE("cell_volume matches the matrix determinant") {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const LatticeParams p = oracle::random_params(rng);
    CHECK(std::abs(cell_volume(p) - params_to_matrix(p).determinant()) < 1e-9);
  }
}
