#include "cflow/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace cflow {

namespace {

Crystal rocksalt(const std::string& cation, const std::string& anion, double a) {
  FracCoords f(8, 3);
  f << 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.5, // cation fcc
      0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.5;  // anion fcc
  return make_crystal({cation, cation, cation, cation, anion, anion, anion, anion}, f,
                      {a, a, a, 90, 90, 90});
}

Crystal cscl_type(const std::string& cation, const std::string& anion, double a) {
  FracCoords f(2, 3);
  f << 0.0, 0.0, 0.0, 0.5, 0.5, 0.5;
  return make_crystal({cation, anion}, f, {a, a, a, 90, 90, 90});
}

} // namespace

SyntheticFamily make_synthetic_family(const SyntheticFamilyConfig& config) {
  SyntheticFamily family;
  family.templates = {
      rocksalt("Na", "Cl", 5.64), rocksalt("Li", "F", 4.03),  rocksalt("K", "Br", 6.60),
      rocksalt("Mg", "O", 4.21),  rocksalt("Ca", "O", 4.81),  cscl_type("Cs", "Cl", 4.11),
      cscl_type("Cs", "Br", 4.29), cscl_type("Cs", "I", 4.57),
  };

  Rng rng(config.seed);
  auto perturb = [&](const Crystal& base) {
    Crystal c = base;
    for (Eigen::Index i = 0; i < c.frac_coords.rows(); ++i)
      for (int k = 0; k < 3; ++k)
        c.frac_coords(i, k) = wrap_unit(c.frac_coords(i, k) + rng.gauss(0.0, config.coord_sigma));
    double len[3];
    for (double& l : len)
      l = c.lattice.a * (1.0 + rng.gauss(0.0, config.length_sigma_rel));
    std::sort(std::begin(len), std::end(len)); // keep a <= b <= c, Niggli-style
    c.lattice.a = len[0];
    c.lattice.b = len[1];
    c.lattice.c = len[2];
    double* angles[3] = {&c.lattice.alpha, &c.lattice.beta, &c.lattice.gamma};
    for (double* a : angles)
      *a = std::clamp(90.0 + rng.gauss(0.0, config.angle_sigma_deg), 62.0, 118.0);
    return c;
  };

  family.train.reserve(static_cast<size_t>(config.n_train));
  family.test.reserve(static_cast<size_t>(config.n_test));
  for (int i = 0; i < config.n_train; ++i)
    family.train.push_back(perturb(family.templates[rng.uniform_index(family.templates.size())]));
  for (int i = 0; i < config.n_test; ++i)
    family.test.push_back(perturb(family.templates[rng.uniform_index(family.templates.size())]));
  return family;
}

} // namespace cflow
