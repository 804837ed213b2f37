#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cflow/crystal.hpp"

namespace cflow {

// Structured failure for all text-format readers (JSONL, CIF, CSV).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Doubles are emitted with 12 significant digits.
std::string format_double(double x, int sig_digits = 12);

// One-line JSON record:
// {"species": [...], "frac_coords": [[...],...], "lattice": {"a":..,...}}
std::string crystal_to_json_line(const Crystal& c);
Crystal crystal_from_json_line(const std::string& line);

// Optional per-record composition key used by external sample files.
struct CrystalRecord {
  Crystal crystal;
  std::optional<std::string> composition_key;
};
CrystalRecord crystal_record_from_json_line(const std::string& line);

std::vector<Crystal> read_crystal_jsonl(const std::string& path);
void write_crystal_jsonl(const std::string& path, const std::vector<Crystal>& crystals);

} // namespace cflow
