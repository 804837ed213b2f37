#include "cflow/crystal_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace cflow {

std::string format_double(double x, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, x);
  return buf;
}

namespace {

void append_coord_row(std::string& out, const FracCoords& f, Eigen::Index i) {
  out += '[';
  for (int k = 0; k < 3; ++k) {
    if (k) out += ',';
    out += format_double(f(i, k));
  }
  out += ']';
}

Crystal crystal_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("crystal record: not a JSON object");
  for (const char* key : {"species", "frac_coords", "lattice"})
    if (!j.contains(key)) throw ParseError(std::string("crystal record: missing field ") + key);

  std::vector<std::string> species = j.at("species").get<std::vector<std::string>>();
  const auto& coords = j.at("frac_coords");
  if (!coords.is_array() || coords.size() != species.size())
    throw ParseError("crystal record: frac_coords shape mismatch");
  FracCoords f(static_cast<Eigen::Index>(species.size()), 3);
  for (size_t i = 0; i < coords.size(); ++i) {
    const auto& row = coords[i];
    if (!row.is_array() || row.size() != 3)
      throw ParseError("crystal record: frac_coords row must have 3 entries");
    for (int k = 0; k < 3; ++k) f(static_cast<Eigen::Index>(i), k) = row[k].get<double>();
  }
  const auto& lat = j.at("lattice");
  LatticeParams p;
  p.a = lat.at("a").get<double>();
  p.b = lat.at("b").get<double>();
  p.c = lat.at("c").get<double>();
  p.alpha = lat.at("alpha").get<double>();
  p.beta = lat.at("beta").get<double>();
  p.gamma = lat.at("gamma").get<double>();
  return make_crystal(std::move(species), std::move(f), p);
}

} // namespace

std::string crystal_to_json_line(const Crystal& c) {
  std::string out = "{\"species\": [";
  for (size_t i = 0; i < c.species.size(); ++i) {
    if (i) out += ',';
    out += '"';
    out += c.species[i];
    out += '"';
  }
  out += "], \"frac_coords\": [";
  for (Eigen::Index i = 0; i < c.frac_coords.rows(); ++i) {
    if (i) out += ',';
    append_coord_row(out, c.frac_coords, i);
  }
  out += "], \"lattice\": {";
  const char* names[6] = {"a", "b", "c", "alpha", "beta", "gamma"};
  const double vals[6] = {c.lattice.a,     c.lattice.b,    c.lattice.c,
                          c.lattice.alpha, c.lattice.beta, c.lattice.gamma};
  for (int k = 0; k < 6; ++k) {
    if (k) out += ", ";
    out += '"';
    out += names[k];
    out += "\": ";
    out += format_double(vals[k]);
  }
  out += "}}";
  return out;
}

Crystal crystal_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("crystal record: invalid JSON");
  return crystal_from_json(j);
}

CrystalRecord crystal_record_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("crystal record: invalid JSON");
  CrystalRecord rec{crystal_from_json(j), std::nullopt};
  if (j.contains("composition_key")) rec.composition_key = j.at("composition_key").get<std::string>();
  return rec;
}

std::vector<Crystal> read_crystal_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<Crystal> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(crystal_from_json_line(line));
  }
  return out;
}

void write_crystal_jsonl(const std::string& path, const std::vector<Crystal>& crystals) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  for (const auto& c : crystals) out << crystal_to_json_line(c) << '\n';
}

} // namespace cflow
