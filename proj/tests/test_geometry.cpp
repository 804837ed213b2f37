#include <doctest.h>

#include <cmath>

#include "cflow/geometry.hpp"
#include "cflow/rng.hpp"
#include "oracles.hpp"

using namespace cflow;

TEST_CASE("torus_exp wraps across the boundary") {
  CHECK(torus_exp(0.9, 0.2) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(torus_exp(0.5, 0.0) == 0.5);
  CHECK(torus_exp(0.25, -0.5) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("torus_log picks the shortest displacement") {
  CHECK(torus_log(0.9, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(torus_log(0.37, 0.37) == 0.0);
  // antipodal tie resolves to +0.5
  CHECK(torus_log(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(torus_log(0.0, 0.5) > 0.0);
}

TEST_CASE("torus exp/log inverse on 1e5 random cases") {
  Rng rng(31);
  for (int trial = 0; trial < 100000; ++trial) {
    const double f0 = rng.uniform();
    const double f1 = rng.uniform();
    const double v = torus_log(f0, f1);
    CHECK(v > -0.5);
    CHECK(v <= 0.5 + 1e-15);
    double d = std::abs(torus_exp(f0, v) - f1);
    d = std::min(d, 1.0 - d);
    REQUIRE(d < 1e-12);
  }
}

TEST_CASE("torus_log matches the shortest-shift oracle") {
  Rng rng(32);
  for (int trial = 0; trial < 100000; ++trial) {
    const double f0 = rng.uniform();
    const double f1 = rng.uniform();
    double gap = std::abs(f1 - f0);
    gap = std::min(gap, 1.0 - gap);
    if (std::abs(gap - 0.5) < 1e-9) continue; // antipodal ties excluded
    REQUIRE(std::abs(torus_log(f0, f1) - oracle::torus_log(f0, f1)) < 1e-12);
  }
}

TEST_CASE("torus_log is shift equivariant") {
  Rng rng(33);
  for (int trial = 0; trial < 10000; ++trial) {
    const double f0 = rng.uniform();
    const double f1 = rng.uniform();
    const double s = rng.uniform();
    double gap = std::abs(f1 - f0);
    gap = std::min(gap, 1.0 - gap);
    if (std::abs(gap - 0.5) < 1e-6) continue;
    const double a = torus_log(f0, f1);
    const double b = torus_log(wrap_unit(f0 + s), wrap_unit(f1 + s));
    REQUIRE(std::abs(a - b) < 1e-12);
  }
}

TEST_CASE("remove_mean_translation") {
  FracCoords one(1, 3);
  one << 0.3, 0.7, 0.2;
  CHECK(remove_mean_translation(one).norm() == 0.0);

  FracCoords balanced(2, 3);
  balanced << 0.2, 0, 0, -0.2, 0, 0;
  CHECK((remove_mean_translation(balanced) - balanced).norm() < 1e-15);

  FracCoords f(2, 3);
  f << 0.3, 0, 0, 0.1, 0, 0;
  const FracCoords r = remove_mean_translation(f);
  CHECK(r(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r(1, 0) == doctest::Approx(-0.1).epsilon(1e-12));

  // idempotent + linear, and column means vanish
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    FracCoords x(5, 3), y(5, 3);
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 3; ++k) {
        x(i, k) = rng.uniform(-1, 1);
        y(i, k) = rng.uniform(-1, 1);
      }
    const FracCoords px = remove_mean_translation(x);
    CHECK(px.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK((remove_mean_translation(px) - px).cwiseAbs().maxCoeff() < 1e-14);
    const FracCoords lin =
        remove_mean_translation(2.0 * x + 3.0 * y) -
        (2.0 * remove_mean_translation(x) + 3.0 * remove_mean_translation(y));
    CHECK(lin.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("angle map: values and round trips") {
  CHECK(angle_to_unconstrained(90.0) == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
  CHECK(unconstrained_to_angle(angle_to_unconstrained(75.0)) == doctest::Approx(75.0).epsilon(1e-11));
  CHECK(unconstrained_to_angle(0.0) == doctest::Approx(120.0).epsilon(1e-12));
  CHECK_THROWS(angle_to_unconstrained(59.0));
  CHECK_THROWS(angle_to_unconstrained(121.0));
  // exactly-60 inputs are nudged, not rejected
  CHECK(std::isfinite(angle_to_unconstrained(60.0)));

  for (int i = 1; i < 10000; ++i) {
    const double eta = 60.0 + 60.0 * i / 10000.0;
    REQUIRE(std::abs(unconstrained_to_angle(angle_to_unconstrained(eta)) - eta) < 1e-9);
  }
}

namespace {

Crystal pair_crystal(double f00, double f10, const LatticeParams& lat) {
  FracCoords f(2, 3);
  f << f00, 0.25, 0.5, f10, 0.75, 0.5;
  return make_crystal({"Na", "Cl"}, f, lat);
}

} // namespace

TEST_CASE("geodesic_point endpoints and boundary crossing") {
  const Crystal c0 = pair_crystal(0.9, 0.2, {4, 4, 4, 90, 90, 90});
  const Crystal c1 = pair_crystal(0.1, 0.4, {5, 5, 5, 80, 95, 100});

  const Crystal at0 = geodesic_point(c0, c1, 0.0);
  CHECK((at0.frac_coords - c0.frac_coords).norm() == 0.0);
  CHECK(at0.lattice.a == c0.lattice.a);

  const Crystal at1 = geodesic_point(c0, c1, 1.0);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 3; ++k) {
      double d = std::abs(at1.frac_coords(i, k) - c1.frac_coords(i, k));
      d = std::min(d, 1.0 - d);
      CHECK(d < 1e-9);
    }
  CHECK(std::abs(at1.lattice.a - c1.lattice.a) < 1e-9);
  CHECK(std::abs(at1.lattice.alpha - c1.lattice.alpha) < 1e-9);

  // midpoint across the periodic boundary: 0.9 -> 0.1 passes through 0.0
  const Crystal mid = geodesic_point(c0, c1, 0.5);
  CHECK(mid.frac_coords(0, 0) == doctest::Approx(0.0).epsilon(1e-12));

  Crystal mismatched = c1;
  mismatched.species = {"Cl", "Na"};
  CHECK_THROWS(geodesic_point(c0, mismatched, 0.5));
}

TEST_CASE("conditional_target: zeros and the derived two-atom case") {
  const Crystal c1 = pair_crystal(0.3, 0.6, {4, 4, 4, 90, 90, 90});
  const TangentVector at_end = conditional_target(c1, c1, 0.5);
  CHECK(at_end.coord_tangent.norm() < 1e-12);
  CHECK(at_end.length_tangent.norm() < 1e-12);
  CHECK(at_end.angle_tangent.norm() < 1e-12);

  FracCoords single(1, 3);
  single << 0.2, 0.4, 0.9;
  const Crystal s1 = make_crystal({"Fe"}, single, {3, 3, 3, 90, 90, 90});
  FracCoords single0(1, 3);
  single0 << 0.6, 0.1, 0.2;
  const Crystal s0 = make_crystal({"Fe"}, single0, {3, 3, 3, 90, 90, 90});
  CHECK(conditional_target(s0, s1, 0.25).coord_tangent.norm() < 1e-12);

  // two atoms: target along the geodesic equals the mean-removed wrapped
  // displacement at every t
  const Crystal c0 = pair_crystal(0.3, 0.1, {4, 4, 4, 90, 90, 90});
  const Crystal cb = pair_crystal(0.5, 0.3, {4, 4, 4, 90, 90, 90});
  const FracCoords expected = remove_mean_translation(torus_log(c0.frac_coords, cb.frac_coords));
  for (double t : {0.0, 0.25, 0.5}) {
    const Crystal ct = geodesic_point(c0, cb, t);
    const TangentVector u = conditional_target(ct, cb, t);
    CHECK((u.coord_tangent - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS(conditional_target(c0, cb, 1.0));
}

TEST_CASE("conditional_target: coordinate component is translation invariant") {
  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const Crystal c1 = oracle::random_crystal(rng, 4);
    Crystal c0 = c1;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 3; ++k)
        c0.frac_coords(i, k) = wrap_unit(c1.frac_coords(i, k) + rng.uniform(-0.3, 0.3));
    const double t = rng.uniform(0.0, 0.9);
    const Crystal ct = geodesic_point(c0, c1, t);

    const Vec3 shift(rng.uniform(), rng.uniform(), rng.uniform());
    Crystal ct_s = ct, c1_s = c1;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 3; ++k) {
        ct_s.frac_coords(i, k) = wrap_unit(ct.frac_coords(i, k) + shift(k));
        c1_s.frac_coords(i, k) = wrap_unit(c1.frac_coords(i, k) + shift(k));
      }
    const TangentVector a = conditional_target(ct, c1, t);
    const TangentVector b = conditional_target(ct_s, c1_s, t);
    CHECK((a.coord_tangent - b.coord_tangent).cwiseAbs().maxCoeff() < 1e-10);
  }
}
