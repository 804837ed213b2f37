#pragma once

#include <string>
#include <vector>

#include "cflow/base_dist.hpp"
#include "cflow/velocity_net.hpp"

namespace cflow::train {

struct CrystalPair {
  Crystal c0; // base sample, atoms reordered to match c1
  Crystal c1; // data sample
};

struct PairDataset {
  std::vector<CrystalPair> pairs;
  std::string base_kind;
  size_t draws_total = 0;
  size_t draws_rejected = 0;

  double rejected_fraction() const {
    return draws_total == 0 ? 0.0 : static_cast<double>(draws_rejected) / draws_total;
  }
};

// Permutation aligning c0's atoms onto same-species atoms of c1:
// result[i] is the c0 index paired with c1 atom i. Within each species the
// assignment minimizes summed squared torus distance.
std::vector<int> atom_alignment(const Crystal& c0, const Crystal& c1);

Crystal apply_alignment(const Crystal& c0, const std::vector<int>& perm);

// Draw n_pairs (c0, c1) with matching compositions; c1 sampled from the
// dataset with replacement, c0 from the base conditioned on c1's formula.
// Invalid draws (rejected crystals, angles outside [60,120] after noise) are
// counted and redrawn; more than 1000 consecutive rejections aborts.
PairDataset build_pair_dataset(const std::vector<Crystal>& dataset, const BaseSampler& base,
                               int n_pairs, Rng& rng, double noise_sigma = 0.0);

void write_pair_jsonl(const std::string& path, const PairDataset& ds);
PairDataset read_pair_jsonl(const std::string& path);

struct TrainConfig {
  double lambda_coord = 200.0;
  double lambda_lattice = 1.0;
  int batch_size = 64;
  int epochs = 20;
  double learning_rate = 3e-4;
  double weight_decay = 0.0;
  uint64_t seed = 0;
  int early_stop_patience = 5;
  double val_fraction = 0.1;
  int threads = 1;
};

// Endpoint-form targets for a pair: mean-removed log_{f1}(f0) and the
// 6-vector (l0 - l1) with angles in unconstrained space.
struct PairTargets {
  FracCoords coord; // n x 3
  ad::RowVecX lattice; // 1 x 6
};
PairTargets pair_targets(const CrystalPair& pair);

double rfm_loss(const net::VelocityNet& net, const CrystalPair& pair, double t,
                double lambda_coord = 200.0, double lambda_lattice = 1.0);

// Loss plus parameter gradients accumulated into grads (scaled by `scale`).
double rfm_loss_grad(const net::VelocityNet& net, const CrystalPair& pair, double t,
                     double lambda_coord, double lambda_lattice, ad::GradStore& grads,
                     double scale = 1.0);

// Standardization statistics from the pair dataset (inputs over both
// endpoints, outputs over the conditional targets).
net::Standardization compute_standardization(const PairDataset& ds);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double initial_train_loss = 0.0;
  double best_val_loss = 0.0;
  int best_epoch = -1;
};

// AdamW with decoupled weight decay; early stopping on the validation split;
// the net is left holding the best-validation parameters.
TrainResult train(net::VelocityNet& net, const PairDataset& ds, const TrainConfig& config);

} // namespace cflow::train
