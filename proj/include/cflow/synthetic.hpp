#pragma once

#include <vector>

#include "cflow/crystal.hpp"
#include "cflow/rng.hpp"

namespace cflow {

// Perturbed rock-salt / CsCl-type family: a small desk-scale dataset whose
// ideal structures are known, so template match rates are measurable.
struct SyntheticFamilyConfig {
  int n_train = 2000;
  int n_test = 500;
  uint64_t seed = 7;
  double coord_sigma = 0.02;      // fractional units
  double length_sigma_rel = 0.03; // relative to the template edge
  double angle_sigma_deg = 2.0;
};

struct SyntheticFamily {
  std::vector<Crystal> train;
  std::vector<Crystal> test;
  std::vector<Crystal> templates; // unperturbed reference structures
};

SyntheticFamily make_synthetic_family(const SyntheticFamilyConfig& config);

} // namespace cflow
