#pragma once

#include <string>
#include <vector>

#include "cflow/geometry.hpp"
#include "cflow/rng.hpp"
#include "cflow/tape.hpp"

namespace cflow::net {

struct Hyperparams {
  int hidden_dim = 64;
  int time_embed_dim = 32; // must be even
  int n_layers = 3;
  int n_freq = 10;
};

// Paper-scale preset (large); the defaults above are the desk-scale preset.
Hyperparams paper_scale_hyperparams();

// z-scoring of the 6 lattice inputs (lengths + unconstrained angles) and
// de-standardization of predicted tangents. Stds are strictly positive.
struct Standardization {
  ad::RowVecX lattice_in_mean = ad::RowVecX::Zero(6);
  ad::RowVecX lattice_in_std = ad::RowVecX::Ones(6);
  double coord_out_mean = 0.0;
  double coord_out_std = 1.0;
  ad::RowVecX lattice_out_mean = ad::RowVecX::Zero(6);
  ad::RowVecX lattice_out_std = ad::RowVecX::Ones(6);
};

// (sin(2 pi k x), cos(2 pi k x)) for k = 0..n_freq; period 1 in x.
Eigen::RowVectorXd sinusoidal_embedding(double x, int n_freq);
// Half-period variant used for the time input so t=0 and t=1 differ.
Eigen::RowVectorXd time_embedding(double t, int dim);

// Network state evaluated by the velocity field: coordinates on the torus,
// lengths in Angstrom, angles already mapped to unconstrained space.
struct FieldInput {
  std::vector<int> atomic_numbers;
  FracCoords frac;
  Vec3 lengths;
  Vec3 angles_unconstrained;
  double t = 0.0;
};

FieldInput field_input_from_crystal(const Crystal& c, double t);

// Permutation-equivariant, translation-invariant message-passing field.
// Messages see only wrapped coordinate differences, the shared lattice
// vector, and the time embedding; node states start from a species table.
class VelocityNet {
 public:
  static VelocityNet init(const Hyperparams& hp, Rng& rng);

  const Hyperparams& hyperparams() const { return hp_; }
  const Standardization& standardization() const { return std_; }
  void set_standardization(Standardization s);

  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  struct Prediction {
    ad::Var coord;   // n x 3
    ad::Var lattice; // 1 x 6 (length tangents + unconstrained angle tangents)
  };
  // Records the forward pass on the caller's tape (for training losses).
  Prediction build_forward(ad::Tape& tape, const FieldInput& in) const;

  TangentVector forward(const FieldInput& in) const;
  TangentVector forward(const Crystal& c, double t) const;

  // Named parameter slots, for checkpoints and diagnostics.
  const std::vector<std::string>& slot_names() const { return slot_names_; }

  std::string to_checkpoint_json(const std::string& config_hash) const;
  static VelocityNet from_checkpoint_json(const std::string& text);

 private:
  VelocityNet() = default;

  struct LayerSlots {
    int msg_w1, msg_b1, msg_w2, msg_b2;
    int upd_w1, upd_b1, upd_w2, upd_b2;
    int ln_gamma, ln_beta;
  };

  int message_input_dim() const;

  Hyperparams hp_;
  Standardization std_;
  ad::ParamStore params_;
  std::vector<std::string> slot_names_;
  int embed_slot_ = -1;
  std::vector<LayerSlots> layers_;
  int coord_w1_ = -1, coord_b1_ = -1, coord_w2_ = -1, coord_b2_ = -1;
  int lat_w1_ = -1, lat_b1_ = -1, lat_w2_ = -1, lat_b2_ = -1;
};

void save_checkpoint(const VelocityNet& net, const std::string& path,
                     const std::string& config_hash);
VelocityNet load_checkpoint(const std::string& path);

} // namespace cflow::net
