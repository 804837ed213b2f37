#include "cflow/base_dist.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cflow/crystal_io.hpp"
#include "cflow/elements.hpp"
#include "cflow/geometry.hpp"

namespace cflow {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::unknown_species: return "unknown_species";
    case RejectReason::nonpositive_length: return "nonpositive_length";
    case RejectReason::angle_out_of_range: return "angle_out_of_range";
    case RejectReason::degenerate_cell: return "degenerate_cell";
    case RejectReason::empty_crystal: return "empty_crystal";
    case RejectReason::nonfinite_value: return "nonfinite_value";
  }
  return "unknown";
}

std::optional<RejectReason> reject_invalid(const Crystal& c) {
  if (c.species.empty()) return RejectReason::empty_crystal;
  for (const auto& s : c.species)
    if (!is_known_element(s)) return RejectReason::unknown_species;
  for (Eigen::Index i = 0; i < c.frac_coords.rows(); ++i)
    for (int k = 0; k < 3; ++k)
      if (!std::isfinite(c.frac_coords(i, k))) return RejectReason::nonfinite_value;
  for (double len : {c.lattice.a, c.lattice.b, c.lattice.c}) {
    if (!std::isfinite(len)) return RejectReason::nonfinite_value;
    if (len <= 0.0) return RejectReason::nonpositive_length;
  }
  for (double ang : {c.lattice.alpha, c.lattice.beta, c.lattice.gamma}) {
    if (!std::isfinite(ang)) return RejectReason::nonfinite_value;
    if (!(ang > 0.0 && ang < 180.0)) return RejectReason::angle_out_of_range;
  }
  if (!(angle_gram_factor(c.lattice.alpha, c.lattice.beta, c.lattice.gamma) > 0.0))
    return RejectReason::degenerate_cell;
  return std::nullopt;
}

Crystal add_noise(const Crystal& c, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: negative sigma");
  if (sigma == 0.0) return c;
  Crystal out = c;
  for (Eigen::Index i = 0; i < out.frac_coords.rows(); ++i)
    for (int k = 0; k < 3; ++k)
      out.frac_coords(i, k) = wrap_unit(out.frac_coords(i, k) + rng.gauss(0.0, sigma));
  out.lattice.a += rng.gauss(0.0, sigma);
  out.lattice.b += rng.gauss(0.0, sigma);
  out.lattice.c += rng.gauss(0.0, sigma);
  const Vec3 u = angles_to_unconstrained(out.lattice.angles());
  out.lattice.alpha = unconstrained_to_angle(u(0) + rng.gauss(0.0, sigma));
  out.lattice.beta = unconstrained_to_angle(u(1) + rng.gauss(0.0, sigma));
  out.lattice.gamma = unconstrained_to_angle(u(2) + rng.gauss(0.0, sigma));
  return out;
}

Crystal sample_base(const BaseSampler& sampler, const Composition& comp, Rng& rng) {
  if (comp.empty()) throw std::invalid_argument("sample_base: empty composition");
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Crystal c = sampler.sample(comp, rng);
    const bool lengths_ok = c.lattice.a > 0 && c.lattice.b > 0 && c.lattice.c > 0;
    auto angle_ok = [](double a) { return a >= 60.0 && a <= 120.0; };
    const bool angles_ok =
        angle_ok(c.lattice.alpha) && angle_ok(c.lattice.beta) && angle_ok(c.lattice.gamma) &&
        angle_gram_factor(c.lattice.alpha, c.lattice.beta, c.lattice.gamma) > 0.0;
    if (lengths_ok && angles_ok) return c;
  }
  throw std::runtime_error("sample_base: 100 consecutive out-of-range draws");
}

namespace {

size_t draw_from_hist(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  for (size_t i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0.0) return i;
  }
  return probs.size() - 1;
}

void normalize(std::vector<double>& h) {
  double total = 0.0;
  for (double v : h) total += v;
  if (total <= 0.0) throw std::runtime_error("histogram with zero mass");
  for (double& v : h) v /= total;
}

} // namespace

QuantizedEmpiricalBase fit_quantized_base(const std::vector<Crystal>& dataset, double smoothing) {
  if (dataset.empty()) throw std::invalid_argument("fit_quantized_base: empty dataset");
  if (smoothing < 0.0) throw std::invalid_argument("fit_quantized_base: negative smoothing");

  QuantizedEmpiricalBase base;
  base.smoothing_ = smoothing;
  for (int k = 0; k < 3; ++k) base.coord_hist_[k].assign(100, smoothing);
  for (int k = 0; k < 3; ++k) base.angle_hist_[k].assign(61, smoothing);

  std::array<std::unordered_map<long, double>, 3> length_counts;
  for (const Crystal& c : dataset) {
    for (Eigen::Index i = 0; i < c.frac_coords.rows(); ++i)
      for (int k = 0; k < 3; ++k) {
        const long bin = std::lround(c.frac_coords(i, k) * 100.0) % 100;
        base.coord_hist_[k][static_cast<size_t>(bin)] += 1.0;
      }
    const Vec3 len = c.lattice.lengths();
    for (int k = 0; k < 3; ++k) length_counts[k][std::lround(len(k) * 10.0)] += 1.0;
    const Vec3 ang = c.lattice.angles();
    for (int k = 0; k < 3; ++k) {
      const long bin = std::clamp(std::lround(ang(k)) - 60l, 0l, 60l);
      base.angle_hist_[k][static_cast<size_t>(bin)] += 1.0;
    }
    base.compositions_.push_back(composition(c));
  }

  for (int k = 0; k < 3; ++k) {
    long lo = length_counts[k].begin()->first, hi = lo;
    for (const auto& [bin, cnt] : length_counts[k]) {
      lo = std::min(lo, bin);
      hi = std::max(hi, bin);
    }
    base.length_min_bin_[k] = static_cast<int>(lo);
    base.length_hist_[k].assign(static_cast<size_t>(hi - lo + 1), smoothing);
    for (const auto& [bin, cnt] : length_counts[k])
      base.length_hist_[k][static_cast<size_t>(bin - lo)] += cnt;
  }

  for (int k = 0; k < 3; ++k) {
    normalize(base.coord_hist_[k]);
    normalize(base.length_hist_[k]);
    normalize(base.angle_hist_[k]);
  }
  return base;
}

Crystal QuantizedEmpiricalBase::sample(const Composition& comp, Rng& rng) const {
  std::vector<std::string> species = composition_species(comp);
  const int n = static_cast<int>(species.size());
  FracCoords f(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k)
      f(i, k) = static_cast<double>(draw_from_hist(coord_hist_[k], rng)) / 100.0;
  LatticeParams lat;
  double* lengths[3] = {&lat.a, &lat.b, &lat.c};
  for (int k = 0; k < 3; ++k) {
    // per-value redraw: the grid may include the 0.0 A bin
    double value = 0.0;
    for (int attempt = 0; attempt < 100 && value <= 0.0; ++attempt)
      value = static_cast<double>(length_min_bin_[k] +
                                  static_cast<long>(draw_from_hist(length_hist_[k], rng))) /
              10.0;
    *lengths[k] = value;
  }
  double* angles[3] = {&lat.alpha, &lat.beta, &lat.gamma};
  for (int k = 0; k < 3; ++k)
    *angles[k] = static_cast<double>(60 + draw_from_hist(angle_hist_[k], rng));
  return Crystal{std::move(species), std::move(f), lat};
}

Composition QuantizedEmpiricalBase::sample_composition(Rng& rng) const {
  return compositions_[rng.uniform_index(compositions_.size())];
}

UninformedBase fit_uninformed_base(const std::vector<Crystal>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("fit_uninformed_base: empty dataset");
  UninformedBase base;
  Vec3 sum_log = Vec3::Zero(), sum_log2 = Vec3::Zero();
  Vec3 sum_u = Vec3::Zero(), sum_u2 = Vec3::Zero();
  for (const Crystal& c : dataset) {
    const Vec3 len = c.lattice.lengths();
    const Vec3 u = angles_to_unconstrained(c.lattice.angles());
    for (int k = 0; k < 3; ++k) {
      const double lg = std::log(len(k));
      sum_log(k) += lg;
      sum_log2(k) += lg * lg;
      sum_u(k) += u(k);
      sum_u2(k) += u(k) * u(k);
    }
    base.compositions_.push_back(composition(c));
  }
  const double n = static_cast<double>(dataset.size());
  for (int k = 0; k < 3; ++k) {
    base.log_length_mean_(k) = sum_log(k) / n;
    base.log_length_std_(k) =
        std::sqrt(std::max(sum_log2(k) / n - base.log_length_mean_(k) * base.log_length_mean_(k), 0.0)) +
        1e-6;
    base.angle_u_mean_(k) = sum_u(k) / n;
    base.angle_u_std_(k) =
        std::sqrt(std::max(sum_u2(k) / n - base.angle_u_mean_(k) * base.angle_u_mean_(k), 0.0)) + 1e-6;
  }
  return base;
}

Crystal UninformedBase::sample(const Composition& comp, Rng& rng) const {
  std::vector<std::string> species = composition_species(comp);
  const int n = static_cast<int>(species.size());
  FracCoords f(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) f(i, k) = rng.uniform();
  LatticeParams lat;
  lat.a = std::exp(rng.gauss(log_length_mean_(0), log_length_std_(0)));
  lat.b = std::exp(rng.gauss(log_length_mean_(1), log_length_std_(1)));
  lat.c = std::exp(rng.gauss(log_length_mean_(2), log_length_std_(2)));
  double* angles[3] = {&lat.alpha, &lat.beta, &lat.gamma};
  for (int k = 0; k < 3; ++k) {
    // per-value redraw: u > 0 maps above 120 degrees
    double u = rng.gauss(angle_u_mean_(k), angle_u_std_(k));
    for (int attempt = 0; attempt < 100 && u > 0.0; ++attempt)
      u = rng.gauss(angle_u_mean_(k), angle_u_std_(k));
    *angles[k] = unconstrained_to_angle(u);
  }
  return Crystal{std::move(species), std::move(f), lat};
}

Composition UninformedBase::sample_composition(Rng& rng) const {
  return compositions_[rng.uniform_index(compositions_.size())];
}

ExternalSampleSource load_external_samples(const std::string& path,
                                           const ExternalSampleSource::Meta& meta) {
  ExternalSampleSource src;
  src.meta_ = meta;
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      CrystalRecord rec = crystal_record_from_json_line(line);
      if (reject_invalid(rec.crystal)) {
        src.rejected_++;
        continue;
      }
      const Composition comp = composition(rec.crystal);
      const std::string key = rec.composition_key.value_or(composition_key(comp));
      src.by_composition_[key].push_back(std::move(rec.crystal));
      src.compositions_.push_back(comp);
      src.total_++;
    } catch (const ParseError&) {
      src.rejected_++;
    } catch (const std::invalid_argument&) {
      src.rejected_++;
    }
  }
  if (src.total_ == 0) throw ParseError("external sample file has no valid records: " + path);
  return src;
}

Crystal ExternalSampleSource::sample(const Composition& comp, Rng& rng) const {
  const auto it = by_composition_.find(composition_key(comp));
  if (it == by_composition_.end() || it->second.empty())
    throw std::runtime_error("external source has no samples for composition " +
                             composition_key(comp));
  return it->second[rng.uniform_index(it->second.size())];
}

Composition ExternalSampleSource::sample_composition(Rng& rng) const {
  return compositions_[rng.uniform_index(compositions_.size())];
}

std::string ExternalSampleSource::describe() const {
  return "external(" + meta_.generator + ", tau=" + format_double(meta_.temperature, 6) +
         ", P=" + format_double(meta_.nucleus_p, 6) + ")";
}

std::unique_ptr<BaseSampler> make_base_sampler(const std::string& kind,
                                               const std::vector<Crystal>& dataset) {
  if (kind == "quantized")
    return std::make_unique<QuantizedEmpiricalBase>(fit_quantized_base(dataset));
  if (kind == "uninformed")
    return std::make_unique<UninformedBase>(fit_uninformed_base(dataset));
  if (kind.rfind("external:", 0) == 0)
    return std::make_unique<ExternalSampleSource>(load_external_samples(kind.substr(9)));
  throw std::invalid_argument("unknown base kind: " + kind +
                              " (expected quantized | uninformed | external:<path>)");
}

} // namespace cflow
