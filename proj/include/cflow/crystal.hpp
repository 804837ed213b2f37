#pragma once

#include <map>
#include <string>
#include <vector>

#include "cflow/lattice.hpp"

namespace cflow {

// Element counts keyed by atomic number; values are strictly positive.
using Composition = std::map<int, int>;

// An n-atom periodic crystal: species symbols, fractional coordinates on the
// unit torus (one atom per row, entries wrapped to [0,1)), and cell parameters.
struct Crystal {
  std::vector<std::string> species;
  FracCoords frac_coords;
  LatticeParams lattice;

  int n_atoms() const { return static_cast<int>(species.size()); }
};

double wrap_unit(double x);          // x mod 1 in [0,1)
void wrap_coords(FracCoords& f);

// Validating constructor: checks species symbols, shape, wraps coordinates.
Crystal make_crystal(std::vector<std::string> species, FracCoords frac, LatticeParams lattice);

std::vector<int> atomic_numbers(const Crystal& c);

Eigen::Matrix<double, Eigen::Dynamic, 3> frac_to_cart(const Crystal& c);
FracCoords cart_to_frac(const Eigen::Matrix<double, Eigen::Dynamic, 3>& cart,
                        const LatticeParams& lattice);

// Minimum Cartesian distance between atom i and the periodic images of atom j,
// searched over the 3x3x3 translation block. For i == j the zero translation
// is excluded (distance to the atom's own nearest image).
double min_image_distance(const Crystal& c, int i, int j);

// True iff every pair (periodic self-images included) is farther than 0.5 A.
bool structural_validity(const Crystal& c);

Composition composition(const Crystal& c);
int n_ary(const Crystal& c);

// "Na1 Cl1"-style key, elements in atomic-number order.
std::string composition_key(const Composition& comp);
// Species list expanded from a composition in atomic-number order.
std::vector<std::string> composition_species(const Composition& comp);

// Niggli-reduce the cell and re-express the coordinates.
Crystal niggli_reduce(const Crystal& c);

} // namespace cflow
