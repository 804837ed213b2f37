#pragma once

#include <Eigen/Dense>

namespace cflow {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using FracCoords = Eigen::Matrix<double, Eigen::Dynamic, 3>; // one atom per row

// Cell lengths in Angstrom, internal angles in degrees.
// Canonical (reduced) cells keep angles inside [60, 120]; the type itself
// admits anything in (0, 180) so pre-reduction inputs can be represented.
struct LatticeParams {
  double a = 1.0, b = 1.0, c = 1.0;
  double alpha = 90.0, beta = 90.0, gamma = 90.0;

  Vec3 lengths() const { return {a, b, c}; }
  Vec3 angles() const { return {alpha, beta, gamma}; }
};

// Row-basis cell matrix: row i is the i-th lattice vector in Cartesian
// coordinates (Angstrom). Determinant > 0 for a valid cell.
using LatticeMatrix = Mat3;

bool lattice_params_valid(const LatticeParams& p);

// Gram determinant factor 1 - cos^2 a - cos^2 b - cos^2 g + 2 cos a cos b cos g.
// Must be > 0 for the three angles to close a 3D cell.
double angle_gram_factor(double alpha_deg, double beta_deg, double gamma_deg);

// Fixed orientation: a along +x, b in the xy-plane with positive y component.
LatticeMatrix params_to_matrix(const LatticeParams& p);
LatticeParams matrix_to_params(const LatticeMatrix& m);

double cell_volume(const LatticeParams& p);

struct NiggliResult {
  LatticeParams params;
  FracCoords frac_coords;   // re-expressed in the reduced basis, wrapped to [0,1)
  Eigen::Matrix3i transform; // reduced row basis = transform * original row basis
  int iterations = 0;
};

// Metric-tensor Niggli reduction (iterative, tolerance-guarded).
// Throws std::runtime_error if the iteration cap is exceeded.
NiggliResult niggli_reduce(const LatticeParams& p, const FracCoords& frac);

} // namespace cflow
