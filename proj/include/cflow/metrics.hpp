#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cflow/crystal.hpp"

namespace cflow::metrics {

// True iff some assignment of one common oxidation state per element makes
// the total charge zero. Single-element compositions count as valid.
bool compositional_validity(const Crystal& c);

// Density in g/cm^3 (atomic masses over the cell volume).
double density(const Crystal& c);

inline constexpr int kRdfBins = 64;
inline constexpr double kRdfCutoff = 8.0; // Angstrom

// 64-bin radial distribution histogram up to 8 A on the Niggli-reduced cell,
// L2-normalized. Invariant under atom permutation, global translation, and
// the choice of equivalent unit cell (inputs are snapped to a fine grid after
// reduction so equivalent cells bin identically).
Eigen::VectorXd structure_fingerprint(const Crystal& c);

// Element fractions over Z=1..103 plus mean/std of atomic number (scaled).
Eigen::VectorXd composition_fingerprint(const Crystal& c);

struct CoverageResult {
  double recall = 0.0;
  double precision = 0.0;
};
CoverageResult coverage(const std::vector<Crystal>& generated,
                        const std::vector<Crystal>& reference, double d_struct_thresh,
                        double d_comp_thresh, int threads = 1);

// Thresholds such that one half of the set covers the other at >= 99%.
struct CoverageThresholds {
  double d_struct = 0.0;
  double d_comp = 0.0;
};
CoverageThresholds calibrate_coverage_thresholds(const std::vector<Crystal>& reference,
                                                 int threads = 1);

// Exact 1-Wasserstein distance between two empirical distributions
// (sorted-sample / quantile formula; sizes may differ).
double wasserstein_1d(std::vector<double> samples_a, std::vector<double> samples_b);

// Soft-sphere pair potential sum((r_i+r_j)/d)^12 over periodic images within
// the 3x3x3 block, with covalent radii. NOT a DFT or ML potential: a toy
// stand-in that only supports relative comparisons inside this project.
double toy_energy(const Crystal& c);

struct RelaxResult {
  Crystal relaxed;
  double delta_energy = 0.0; // E_initial - E_final >= 0
  int steps = 0;
  std::vector<double> energy_trace;
};
// Gradient descent with backtracking on coordinates and lengths (angles
// fixed); stops at gradient norm < 1e-6 or max_steps.
RelaxResult toy_relax(const Crystal& c, int max_steps = 200);

struct MatchResult {
  bool matched = false;
  double rmsd = 0.0; // Angstrom, meaningful when matched
};
// Niggli-reduce both, require equal compositions, lengths within relative
// ltol and angles within angle_tol, then the best species-blocked assignment
// under an optimal global torus translation; match iff the RMS displacement
// normalized by (V/n)^(1/3) is <= stol.
MatchResult structure_match(const Crystal& a, const Crystal& b, double ltol = 0.2,
                            double stol = 0.3, double angle_tol = 5.0);

struct EquivalenceClasses {
  std::vector<int> class_of;       // per sample
  std::vector<int> representatives; // first sample of each class
  double uniqueness_rate = 0.0;    // classes / samples
  double novelty_rate = 0.0;       // novel classes / classes
  std::vector<bool> class_novel;
};
EquivalenceClasses uniqueness_and_novelty(const std::vector<Crystal>& generated,
                                          const std::vector<Crystal>& training_set,
                                          double ltol = 0.2, double stol = 0.3,
                                          double angle_tol = 5.0, int threads = 1);

struct MetricsConfig {
  std::optional<double> d_struct_thresh; // calibrated from the test set if unset
  std::optional<double> d_comp_thresh;
  double ltol = 0.2;
  double stol = 0.3;
  double angle_tol = 5.0;
  int relax_max_steps = 200;
  // proxy stability: toy delta-energy per atom below this and n_ary >= 2.
  // Toy-potential threshold, NOT a DFT e_hull.
  double proxy_stability_threshold = 0.1;
  int threads = 1;
};

struct SampleRecord {
  int index = 0;
  std::string composition_key;
  int n_atoms = 0;
  int n_ary = 0;
  bool structural_valid = false;
  bool compositional_valid = false;
  double density = 0.0;
  double delta_energy_per_atom = 0.0;
  int relax_steps = 0;
  bool matched_relaxed = false;
  double rmsd_to_relaxed = 0.0;
  int class_id = -1;
  bool class_representative = false;
  bool novel = false;
  bool proxy_stable = false;
};

struct MetricsReport {
  size_t n_generated = 0;
  double structural_validity_rate = 0.0;
  double compositional_validity_rate = 0.0;
  double coverage_recall = 0.0;
  double coverage_precision = 0.0;
  double wdist_density = 0.0;
  double wdist_nel = 0.0;
  std::vector<size_t> nary_histogram; // index = n_ary, entry 0 unused
  double match_rate = 0.0;            // generated vs own toy-relaxed state
  double mean_rmsd = 0.0;             // over matched pairs
  double mean_delta_energy = 0.0;     // per atom, toy units
  double mean_relax_steps = 0.0;
  double uniqueness_rate = 0.0;
  double novelty_rate = 0.0;
  double proxy_sun_rate = 0.0; // proxy-stable + unique + novel, NOT DFT S.U.N.
  double d_struct_thresh = 0.0;
  double d_comp_thresh = 0.0;
  std::vector<SampleRecord> per_sample;
};

MetricsReport evaluate(const std::vector<Crystal>& generated, const std::vector<Crystal>& test_set,
                       const std::vector<Crystal>& training_set, const MetricsConfig& config = {});

std::string report_to_json(const MetricsReport& report);
std::string sample_record_to_json(const SampleRecord& rec);

} // namespace cflow::metrics
