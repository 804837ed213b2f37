#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cflow/crystal.hpp"
#include "cflow/rng.hpp"

namespace cflow {

enum class RejectReason {
  unknown_species,
  nonpositive_length,
  angle_out_of_range,
  degenerate_cell,
  empty_crystal,
  nonfinite_value,
};

const char* to_string(RejectReason r);

// nullopt = accepted. Checks the crystal invariants plus positive lengths and
// angles inside (0, 180) that close a valid cell.
std::optional<RejectReason> reject_invalid(const Crystal& c);

// Zero-mean Gaussian noise on coordinates (wrapped), lengths (Angstrom) and
// angles (in unconstrained space). sigma = 0 is the identity.
Crystal add_noise(const Crystal& c, double sigma, Rng& rng);

// Initial-crystal source conditioned on a composition.
class BaseSampler {
 public:
  virtual ~BaseSampler() = default;
  virtual Crystal sample(const Composition& comp, Rng& rng) const = 0;
  virtual Composition sample_composition(Rng& rng) const = 0;
  virtual bool quantized_support() const = 0;
  virtual std::string describe() const = 0;
};

// Draws a valid crystal for the composition, re-drawing per-value out-of-range
// lengths/angles; throws after 100 consecutive failures.
Crystal sample_base(const BaseSampler& sampler, const Composition& comp, Rng& rng);

// Per-axis coordinate histograms on the 0.01 grid, per-parameter length
// histograms on the 0.1 A grid, per-angle integer-degree histograms on
// [60, 120], and the empirical composition distribution. Finite quantized
// support mirrors a fixed-precision text representation of crystals.
class QuantizedEmpiricalBase : public BaseSampler {
 public:
  Crystal sample(const Composition& comp, Rng& rng) const override;
  Composition sample_composition(Rng& rng) const override;
  bool quantized_support() const override { return true; }
  std::string describe() const override { return "quantized"; }

  double smoothing() const { return smoothing_; }

  // Bin probabilities exposed for tests and serialization.
  const std::array<std::vector<double>, 3>& coord_hist() const { return coord_hist_; }
  const std::array<std::vector<double>, 3>& length_hist() const { return length_hist_; }
  const std::array<std::vector<double>, 3>& angle_hist() const { return angle_hist_; }
  int length_min_bin(int k) const { return length_min_bin_[k]; }

  friend QuantizedEmpiricalBase fit_quantized_base(const std::vector<Crystal>& dataset,
                                                   double smoothing);

 private:
  std::array<std::vector<double>, 3> coord_hist_;  // 100 bins each
  std::array<std::vector<double>, 3> length_hist_; // offset by length_min_bin_
  std::array<int, 3> length_min_bin_ = {0, 0, 0};
  std::array<std::vector<double>, 3> angle_hist_;  // 61 bins, 60..120 deg
  std::vector<Composition> compositions_;
  double smoothing_ = 0.0;
};

QuantizedEmpiricalBase fit_quantized_base(const std::vector<Crystal>& dataset,
                                          double smoothing = 0.1);

// Continuous, composition-agnostic geometry: coordinates uniform on the torus,
// lengths log-normal and angles Gaussian in unconstrained space, fit to data.
class UninformedBase : public BaseSampler {
 public:
  Crystal sample(const Composition& comp, Rng& rng) const override;
  Composition sample_composition(Rng& rng) const override;
  bool quantized_support() const override { return false; }
  std::string describe() const override { return "uninformed"; }

  friend UninformedBase fit_uninformed_base(const std::vector<Crystal>& dataset);

 private:
  Vec3 log_length_mean_ = Vec3::Zero(), log_length_std_ = Vec3::Ones();
  Vec3 angle_u_mean_ = Vec3::Zero(), angle_u_std_ = Vec3::Ones();
  std::vector<Composition> compositions_;
};

UninformedBase fit_uninformed_base(const std::vector<Crystal>& dataset);

// Samples drawn from a JSONL file of pre-generated crystals keyed by
// composition; stands in for any external generator whose output was dumped
// to disk. Sampling metadata travels along as provenance only.
class ExternalSampleSource : public BaseSampler {
 public:
  struct Meta {
    double temperature = 1.0;
    double nucleus_p = 1.0;
    std::string generator = "external";
  };

  Crystal sample(const Composition& comp, Rng& rng) const override;
  Composition sample_composition(Rng& rng) const override;
  bool quantized_support() const override { return false; }
  std::string describe() const override;

  size_t size() const { return total_; }
  size_t rejected() const { return rejected_; }
  const Meta& meta() const { return meta_; }

  friend ExternalSampleSource load_external_samples(const std::string& path,
                                                    const ExternalSampleSource::Meta& meta);

 private:
  std::unordered_map<std::string, std::vector<Crystal>> by_composition_;
  std::vector<Composition> compositions_;
  Meta meta_;
  size_t total_ = 0;
  size_t rejected_ = 0;
};

ExternalSampleSource load_external_samples(const std::string& path,
                                           const ExternalSampleSource::Meta& meta = {});

// Factory for the CLI's --base flag: "quantized" | "uninformed" | "external:<path>".
std::unique_ptr<BaseSampler> make_base_sampler(const std::string& kind,
                                               const std::vector<Crystal>& dataset);

} // namespace cflow
