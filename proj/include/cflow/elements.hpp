#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cflow {

// Static per-element data for Z = 1..103.
struct ElementInfo {
  int z = 0;
  const char* symbol = "";
  double atomic_mass = 0.0;     // amu
  double covalent_radius = 0.0; // Angstrom
  std::vector<int> oxidation_states;
};

inline constexpr int kMaxZ = 103;

const ElementInfo& element_by_z(int z);                       // throws on z outside 1..103
std::optional<int> z_from_symbol(std::string_view symbol);    // nullopt if unknown
bool is_known_element(std::string_view symbol);

} // namespace cflow
