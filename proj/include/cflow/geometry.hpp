#pragma once

#include "cflow/crystal.hpp"

namespace cflow {

// Tangent at a crystal: per-atom torus components plus the six cell
// components. Angle components live in unconstrained (logit) space.
struct TangentVector {
  FracCoords coord_tangent;  // n x 3
  Vec3 length_tangent = Vec3::Zero();
  Vec3 angle_tangent = Vec3::Zero();
};

// exp_f(v) = f + v mod 1, element-wise.
double torus_exp(double f, double v);
FracCoords torus_exp(const FracCoords& f, const FracCoords& v);

// log_{f0}(f1): signed shortest displacement in (-0.5, 0.5]; the antipodal
// tie resolves to +0.5 (atan2 convention).
double torus_log(double f0, double f1);
FracCoords torus_log(const FracCoords& f0, const FracCoords& f1);

// Subtract the per-column mean: projects a coordinate tangent field onto the
// translation-free subspace.
FracCoords remove_mean_translation(const FracCoords& log_field);

// Diffeomorphism between the angle interval and the real line:
// angle_to_unconstrained(eta) = logit((eta - 60) / 120). Inputs at exactly 60
// are nudged by 1e-9; the inverse maps all of R into (60, 180).
double angle_to_unconstrained(double eta_deg);
double unconstrained_to_angle(double u);
Vec3 angles_to_unconstrained(const Vec3& angles_deg);
Vec3 unconstrained_to_angles(const Vec3& u);

// Point at time t on the geodesic from c0 to c1: torus geodesics for
// coordinates, linear lengths, linear angles in unconstrained space.
// Species must match position-wise and are carried through unchanged.
Crystal geodesic_point(const Crystal& c0, const Crystal& c1, double t);

// Conditional velocity target -1/(1-t) * log_{c1}(c_t), coordinate component
// mean-removed. Constant in t along the geodesic (endpoint form).
TangentVector conditional_target(const Crystal& c_t, const Crystal& c1, double t);

} // namespace cflow
