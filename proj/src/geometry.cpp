#include "cflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace cflow {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

void check_same_composition(const Crystal& a, const Crystal& b, const char* where) {
  if (a.species != b.species)
    throw std::invalid_argument(std::string(where) + ": species lists differ");
}
} // namespace

double torus_exp(double f, double v) { return wrap_unit(f + v); }

FracCoords torus_exp(const FracCoords& f, const FracCoords& v) {
  FracCoords out = f + v;
  wrap_coords(out);
  return out;
}

double torus_log(double f0, double f1) {
  const double w = kTwoPi * (f1 - f0);
  return std::atan2(std::sin(w), std::cos(w)) / kTwoPi;
}

FracCoords torus_log(const FracCoords& f0, const FracCoords& f1) {
  FracCoords out(f0.rows(), 3);
  for (Eigen::Index i = 0; i < f0.rows(); ++i)
    for (int k = 0; k < 3; ++k) out(i, k) = torus_log(f0(i, k), f1(i, k));
  return out;
}

FracCoords remove_mean_translation(const FracCoords& log_field) {
  if (log_field.rows() < 1)
    throw std::invalid_argument("remove_mean_translation: empty field");
  FracCoords out = log_field;
  const Eigen::RowVector3d mean = log_field.colwise().mean();
  out.rowwise() -= mean;
  return out;
}

double angle_to_unconstrained(double eta_deg) {
  if (eta_deg < 60.0 || eta_deg > 120.0)
    throw std::invalid_argument("angle_to_unconstrained: angle outside [60, 120]");
  if (eta_deg == 60.0) eta_deg = 60.0 + 1e-9; // logit singular at the lower edge
  const double u = (eta_deg - 60.0) / 120.0;
  return std::log(u / (1.0 - u));
}

double unconstrained_to_angle(double u) {
  const double s = 1.0 / (1.0 + std::exp(-u));
  return 120.0 * s + 60.0;
}

Vec3 angles_to_unconstrained(const Vec3& angles_deg) {
  return {angle_to_unconstrained(angles_deg(0)), angle_to_unconstrained(angles_deg(1)),
          angle_to_unconstrained(angles_deg(2))};
}

Vec3 unconstrained_to_angles(const Vec3& u) {
  return {unconstrained_to_angle(u(0)), unconstrained_to_angle(u(1)),
          unconstrained_to_angle(u(2))};
}

Crystal geodesic_point(const Crystal& c0, const Crystal& c1, double t) {
  check_same_composition(c0, c1, "geodesic_point");
  if (t == 0.0) return c0;

  Crystal out = c0;
  out.frac_coords = torus_exp(c0.frac_coords, t * torus_log(c0.frac_coords, c1.frac_coords));

  const Vec3 len0 = c0.lattice.lengths(), len1 = c1.lattice.lengths();
  const Vec3 len = len0 + t * (len1 - len0);
  const Vec3 u0 = angles_to_unconstrained(c0.lattice.angles());
  const Vec3 u1 = angles_to_unconstrained(c1.lattice.angles());
  const Vec3 ang = unconstrained_to_angles(u0 + t * (u1 - u0));

  out.lattice = LatticeParams{len(0), len(1), len(2), ang(0), ang(1), ang(2)};
  return out;
}

TangentVector conditional_target(const Crystal& c_t, const Crystal& c1, double t) {
  check_same_composition(c_t, c1, "conditional_target");
  if (!(t >= 0.0 && t < 1.0))
    throw std::invalid_argument("conditional_target: t must lie in [0, 1)");
  const double scale = -1.0 / (1.0 - t);

  TangentVector u;
  u.coord_tangent = remove_mean_translation(scale * torus_log(c1.frac_coords, c_t.frac_coords));
  u.length_tangent = scale * (c_t.lattice.lengths() - c1.lattice.lengths());
  u.angle_tangent = scale * (angles_to_unconstrained(c_t.lattice.angles()) -
                             angles_to_unconstrained(c1.lattice.angles()));
  return u;
}

} // namespace cflow
