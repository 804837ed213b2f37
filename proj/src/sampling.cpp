#include "cflow/sampling.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cflow/parallel.hpp"

namespace cflow::sample {

TangentVector anti_anneal(const TangentVector& v, double t, double anneal_scale) {
  if (anneal_scale < 1.0) throw std::invalid_argument("anti_anneal: scale must be >= 1");
  const double factor = 1.0 + (anneal_scale - 1.0) * t;
  TangentVector out;
  out.coord_tangent = factor * v.coord_tangent;
  out.length_tangent = factor * v.length_tangent;
  out.angle_tangent = factor * v.angle_tangent;
  return out;
}

Crystal euler_integrate(const net::VelocityNet& net, const Crystal& c0,
                        const SampleConfig& config) {
  if (config.n_steps < 1) throw std::invalid_argument("euler_integrate: n_steps must be >= 1");
  if (reject_invalid(c0))
    throw std::invalid_argument("euler_integrate: initial crystal rejected: " +
                                std::string(to_string(*reject_invalid(c0))));

  net::FieldInput state = net::field_input_from_crystal(c0, 0.0);
  const double dt = 1.0 / config.n_steps;

  for (int step = 0; step < config.n_steps; ++step) {
    state.t = step * dt;
    const TangentVector v = anti_anneal(net.forward(state), state.t, config.anneal_scale);

    state.frac += dt * v.coord_tangent;
    wrap_coords(state.frac);
    state.lengths += dt * v.length_tangent;
    state.angles_unconstrained += dt * v.angle_tangent;

    const bool finite = state.frac.allFinite() && state.lengths.allFinite() &&
                        state.angles_unconstrained.allFinite();
    if (!finite)
      throw std::runtime_error("euler_integrate: non-finite state at step " +
                               std::to_string(step));
  }

  Crystal out = c0;
  out.frac_coords = state.frac;
  const Vec3 angles = unconstrained_to_angles(state.angles_unconstrained);
  out.lattice = LatticeParams{state.lengths(0), state.lengths(1), state.lengths(2),
                              angles(0), angles(1), angles(2)};
  return out;
}

GenerationResult generate(const net::VelocityNet& net, const BaseSampler& base, int n_samples,
                          const SampleConfig& config) {
  GenerationResult result;
  result.stats.requested = static_cast<size_t>(n_samples);
  result.stats.steps_per_sample = config.n_steps;
  if (n_samples <= 0) return result;

  const auto t0 = std::chrono::steady_clock::now();
  result.crystals.resize(static_cast<size_t>(n_samples));
  std::vector<char> produced(static_cast<size_t>(n_samples), 0);
  std::vector<GenerationStats> slot_stats(static_cast<size_t>(n_samples));

  auto angles_in_domain = [](const Crystal& c) {
    for (double a : {c.lattice.alpha, c.lattice.beta, c.lattice.gamma})
      if (a < 60.0 || a > 120.0) return false;
    return true;
  };

  parallel_for(static_cast<size_t>(n_samples), config.threads, [&](size_t slot) {
    Rng rng = Rng::substream(config.seed, slot);
    GenerationStats& stats = slot_stats[slot];
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const Composition comp = base.sample_composition(rng);
      Crystal c0 = base.sample(comp, rng);
      bool ok = !reject_invalid(c0) && angles_in_domain(c0);
      if (ok && config.noise_sigma > 0.0) {
        c0 = add_noise(c0, config.noise_sigma, rng);
        ok = !reject_invalid(c0) && angles_in_domain(c0);
      }
      if (!ok) {
        stats.base_rejections++;
        continue;
      }
      Crystal generated;
      try {
        generated = euler_integrate(net, c0, config);
      } catch (const std::runtime_error&) {
        stats.nonfinite_aborts++;
        continue;
      }
      if (generated.lattice.a <= 0.0 || generated.lattice.b <= 0.0 ||
          generated.lattice.c <= 0.0) {
        stats.output_rejections++;
        continue;
      }
      result.crystals[slot] = std::move(generated);
      produced[slot] = 1;
      break;
    }
  });

  // compact in submission order; tally per-slot stats deterministically
  std::vector<Crystal> kept;
  kept.reserve(static_cast<size_t>(n_samples));
  for (size_t slot = 0; slot < static_cast<size_t>(n_samples); ++slot) {
    result.stats.base_rejections += slot_stats[slot].base_rejections;
    result.stats.output_rejections += slot_stats[slot].output_rejections;
    result.stats.nonfinite_aborts += slot_stats[slot].nonfinite_aborts;
    if (produced[slot]) kept.push_back(std::move(result.crystals[slot]));
  }
  result.crystals = std::move(kept);
  result.stats.produced = result.crystals.size();
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

} // namespace cflow::sample
