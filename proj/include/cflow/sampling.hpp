#pragma once

#include <string>
#include <vector>

#include "cflow/base_dist.hpp"
#include "cflow/velocity_net.hpp"

namespace cflow::sample {

struct SampleConfig {
  int n_steps = 50;           // desk-scale default; 250 for full runs
  double anneal_scale = 1.0;  // >= 1; velocity ramp endpoint
  double noise_sigma = 0.0;
  uint64_t seed = 0;
  int threads = 1;
};

// Velocity scaling ramp: identity at t=0, anneal_scale at t=1.
TangentVector anti_anneal(const TangentVector& v, double t, double anneal_scale);

// N forward-Euler steps of the learned field from c0 (angles integrate in
// unconstrained space and are mapped back at the end). Throws on a
// non-finite state, reporting the step index.
Crystal euler_integrate(const net::VelocityNet& net, const Crystal& c0,
                        const SampleConfig& config);

struct GenerationStats {
  size_t requested = 0;
  size_t produced = 0;
  size_t base_rejections = 0;    // invalid base draws (redrawn)
  size_t output_rejections = 0;  // non-positive lengths after integration (redrawn)
  size_t nonfinite_aborts = 0;
  double wall_seconds = 0.0;
  int steps_per_sample = 0;
};

struct GenerationResult {
  std::vector<Crystal> crystals;
  GenerationStats stats;
};

// Draw compositions and base samples, integrate each, and collect results in
// submission order. Uses one independent random stream per sample slot.
GenerationResult generate(const net::VelocityNet& net, const BaseSampler& base, int n_samples,
                          const SampleConfig& config);

} // namespace cflow::sample
