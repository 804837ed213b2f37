#include "cflow/crystal.hpp"

#include <cmath>
#include <stdexcept>

#include "cflow/elements.hpp"

namespace cflow {

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;
  return r;
}

void wrap_coords(FracCoords& f) {
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (int k = 0; k < 3; ++k) f(i, k) = wrap_unit(f(i, k));
}

Crystal make_crystal(std::vector<std::string> species, FracCoords frac, LatticeParams lattice) {
  if (species.empty()) throw std::invalid_argument("make_crystal: empty species list");
  if (frac.rows() != static_cast<Eigen::Index>(species.size()))
    throw std::invalid_argument("make_crystal: species/coordinate count mismatch");
  for (const auto& s : species)
    if (!is_known_element(s)) throw std::invalid_argument("make_crystal: unknown element " + s);
  wrap_coords(frac);
  return Crystal{std::move(species), std::move(frac), lattice};
}

std::vector<int> atomic_numbers(const Crystal& c) {
  std::vector<int> z;
  z.reserve(c.species.size());
  for (const auto& s : c.species) z.push_back(*z_from_symbol(s));
  return z;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> frac_to_cart(const Crystal& c) {
  return c.frac_coords * params_to_matrix(c.lattice);
}

FracCoords cart_to_frac(const Eigen::Matrix<double, Eigen::Dynamic, 3>& cart,
                        const LatticeParams& lattice) {
  const LatticeMatrix m = params_to_matrix(lattice);
  FracCoords f = cart * m.inverse();
  wrap_coords(f);
  return f;
}

double min_image_distance(const Crystal& c, int i, int j) {
  const int n = c.n_atoms();
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::invalid_argument("min_image_distance: atom index out of range");
  const LatticeMatrix m = params_to_matrix(c.lattice);
  const Vec3 fi = c.frac_coords.row(i);
  const Vec3 fj = c.frac_coords.row(j);
  double best = std::numeric_limits<double>::infinity();
  for (int tx = -1; tx <= 1; ++tx)
    for (int ty = -1; ty <= 1; ++ty)
      for (int tz = -1; tz <= 1; ++tz) {
        if (i == j && tx == 0 && ty == 0 && tz == 0) continue;
        const Vec3 df = fj - fi + Vec3(tx, ty, tz);
        const double d = (m.transpose() * df).norm();
        best = std::min(best, d);
      }
  return best;
}

bool structural_validity(const Crystal& c) {
  constexpr double kMinDistance = 0.5;
  const int n = c.n_atoms();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (min_image_distance(c, i, j) <= kMinDistance) return false;
  return true;
}

Composition composition(const Crystal& c) {
  Composition comp;
  for (const auto& s : c.species) comp[*z_from_symbol(s)]++;
  return comp;
}

int n_ary(const Crystal& c) { return static_cast<int>(composition(c).size()); }

std::string composition_key(const Composition& comp) {
  std::string key;
  for (const auto& [z, count] : comp) {
    if (!key.empty()) key += ' ';
    key += element_by_z(z).symbol;
    key += std::to_string(count);
  }
  return key;
}

std::vector<std::string> composition_species(const Composition& comp) {
  std::vector<std::string> species;
  for (const auto& [z, count] : comp)
    for (int k = 0; k < count; ++k) species.emplace_back(element_by_z(z).symbol);
  return species;
}

Crystal niggli_reduce(const Crystal& c) {
  NiggliResult r = niggli_reduce(c.lattice, c.frac_coords);
  Crystal out = c;
  out.lattice = r.params;
  out.frac_coords = std::move(r.frac_coords);
  return out;
}

} // namespace cflow
