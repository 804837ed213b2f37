#include "cflow/elements.hpp"

#include <array>
#include <stdexcept>
#include <unordered_map>

namespace cflow {

namespace {

// Masses: standard atomic weights (conventional values for radioelements).
// Radii: Cordero et al. single-bond covalent radii, Angstrom.
// Oxidation states: common states only; noble gases carry {0} so that
// charge-neutrality search treats them as neutral fillers.
const std::array<ElementInfo, kMaxZ> kTable = {{
    {1, "H", 1.008, 0.31, {-1, 1}},
    {2, "He", 4.0026, 0.28, {0}},
    {3, "Li", 6.94, 1.28, {1}},
    {4, "Be", 9.0122, 0.96, {2}},
    {5, "B", 10.81, 0.84, {3}},
    {6, "C", 12.011, 0.76, {-4, 2, 4}},
    {7, "N", 14.007, 0.71, {-3, 3, 5}},
    {8, "O", 15.999, 0.66, {-2}},
    {9, "F", 18.998, 0.57, {-1}},
    {10, "Ne", 20.180, 0.58, {0}},
    {11, "Na", 22.990, 1.66, {1}},
    {12, "Mg", 24.305, 1.41, {2}},
    {13, "Al", 26.982, 1.21, {3}},
    {14, "Si", 28.085, 1.11, {-4, 4}},
    {15, "P", 30.974, 1.07, {-3, 3, 5}},
    {16, "S", 32.06, 1.05, {-2, 4, 6}},
    {17, "Cl", 35.45, 1.02, {-1, 1, 3, 5, 7}},
    {18, "Ar", 39.948, 1.06, {0}},
    {19, "K", 39.098, 2.03, {1}},
    {20, "Ca", 40.078, 1.76, {2}},
    {21, "Sc", 44.956, 1.70, {3}},
    {22, "Ti", 47.867, 1.60, {2, 3, 4}},
    {23, "V", 50.942, 1.53, {2, 3, 4, 5}},
    {24, "Cr", 51.996, 1.39, {2, 3, 6}},
    {25, "Mn", 54.938, 1.39, {2, 3, 4, 7}},
    {26, "Fe", 55.845, 1.32, {2, 3}},
    {27, "Co", 58.933, 1.26, {2, 3}},
    {28, "Ni", 58.693, 1.24, {2, 3}},
    {29, "Cu", 63.546, 1.32, {1, 2}},
    {30, "Zn", 65.38, 1.22, {2}},
    {31, "Ga", 69.723, 1.22, {3}},
    {32, "Ge", 72.630, 1.20, {-4, 2, 4}},
    {33, "As", 74.922, 1.19, {-3, 3, 5}},
    {34, "Se", 78.971, 1.20, {-2, 4, 6}},
    {35, "Br", 79.904, 1.20, {-1, 1, 3, 5}},
    {36, "Kr", 83.798, 1.16, {0}},
    {37, "Rb", 85.468, 2.20, {1}},
    {38, "Sr", 87.62, 1.95, {2}},
    {39, "Y", 88.906, 1.90, {3}},
    {40, "Zr", 91.224, 1.75, {4}},
    {41, "Nb", 92.906, 1.64, {3, 5}},
    {42, "Mo", 95.95, 1.54, {2, 3, 4, 6}},
    {43, "Tc", 98.0, 1.47, {4, 7}},
    {44, "Ru", 101.07, 1.46, {2, 3, 4}},
    {45, "Rh", 102.91, 1.42, {3}},
    {46, "Pd", 106.42, 1.39, {2, 4}},
    {47, "Ag", 107.87, 1.45, {1}},
    {48, "Cd", 112.41, 1.44, {2}},
    {49, "In", 114.82, 1.42, {1, 3}},
    {50, "Sn", 118.71, 1.39, {2, 4}},
    {51, "Sb", 121.76, 1.39, {-3, 3, 5}},
    {52, "Te", 127.60, 1.38, {-2, 4, 6}},
    {53, "I", 126.90, 1.39, {-1, 1, 5, 7}},
    {54, "Xe", 131.29, 1.40, {0}},
    {55, "Cs", 132.91, 2.44, {1}},
    {56, "Ba", 137.33, 2.15, {2}},
    {57, "La", 138.91, 2.07, {3}},
    {58, "Ce", 140.12, 2.04, {3, 4}},
    {59, "Pr", 140.91, 2.03, {3}},
    {60, "Nd", 144.24, 2.01, {3}},
    {61, "Pm", 145.0, 1.99, {3}},
    {62, "Sm", 150.36, 1.98, {2, 3}},
    {63, "Eu", 151.96, 1.98, {2, 3}},
    {64, "Gd", 157.25, 1.96, {3}},
    {65, "Tb", 158.93, 1.94, {3, 4}},
    {66, "Dy", 162.50, 1.92, {3}},
    {67, "Ho", 164.93, 1.92, {3}},
    {68, "Er", 167.26, 1.89, {3}},
    {69, "Tm", 168.93, 1.90, {2, 3}},
    {70, "Yb", 173.05, 1.87, {2, 3}},
    {71, "Lu", 174.97, 1.87, {3}},
    {72, "Hf", 178.49, 1.75, {4}},
    {73, "Ta", 180.95, 1.70, {5}},
    {74, "W", 183.84, 1.62, {4, 6}},
    {75, "Re", 186.21, 1.51, {4, 7}},
    {76, "Os", 190.23, 1.44, {4}},
    {77, "Ir", 192.22, 1.41, {3, 4}},
    {78, "Pt", 195.08, 1.36, {2, 4}},
    {79, "Au", 196.97, 1.36, {1, 3}},
    {80, "Hg", 200.59, 1.32, {1, 2}},
    {81, "Tl", 204.38, 1.45, {1, 3}},
    {82, "Pb", 207.2, 1.46, {2, 4}},
    {83, "Bi", 208.98, 1.48, {3, 5}},
    {84, "Po", 209.0, 1.40, {-2, 2, 4}},
    {85, "At", 210.0, 1.50, {-1, 1}},
    {86, "Rn", 222.0, 1.50, {0}},
    {87, "Fr", 223.0, 2.60, {1}},
    {88, "Ra", 226.0, 2.21, {2}},
    {89, "Ac", 227.0, 2.15, {3}},
    {90, "Th", 232.04, 2.06, {4}},
    {91, "Pa", 231.04, 2.00, {4, 5}},
    {92, "U", 238.03, 1.96, {3, 4, 5, 6}},
    {93, "Np", 237.0, 1.90, {3, 4, 5, 6}},
    {94, "Pu", 244.0, 1.87, {3, 4, 5, 6}},
    {95, "Am", 243.0, 1.80, {3}},
    {96, "Cm", 247.0, 1.69, {3}},
    {97, "Bk", 247.0, 1.68, {3, 4}},
    {98, "Cf", 251.0, 1.68, {3}},
    {99, "Es", 252.0, 1.65, {3}},
    {100, "Fm", 257.0, 1.67, {3}},
    {101, "Md", 258.0, 1.73, {2, 3}},
    {102, "No", 259.0, 1.76, {2, 3}},
    {103, "Lr", 266.0, 1.61, {3}},
}};

const std::unordered_map<std::string_view, int>& symbol_index() {
  static const std::unordered_map<std::string_view, int> index = [] {
    std::unordered_map<std::string_view, int> m;
    for (const auto& e : kTable) m.emplace(e.symbol, e.z);
    return m;
  }();
  return index;
}

} // namespace

const ElementInfo& element_by_z(int z) {
  if (z < 1 || z > kMaxZ)
    throw std::invalid_argument("element_by_z: atomic number out of range: " + std::to_string(z));
  return kTable[static_cast<size_t>(z - 1)];
}

std::optional<int> z_from_symbol(std::string_view symbol) {
  const auto& idx = symbol_index();
  auto it = idx.find(symbol);
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

bool is_known_element(std::string_view symbol) { return z_from_symbol(symbol).has_value(); }

} // namespace cflow
