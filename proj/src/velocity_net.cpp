#include "cflow/velocity_net.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cflow/crystal_io.hpp"
#include "cflow/elements.hpp"

namespace cflow::net {

Hyperparams paper_scale_hyperparams() { return Hyperparams{512, 256, 6, 10}; }

Eigen::RowVectorXd sinusoidal_embedding(double x, int n_freq) {
  Eigen::RowVectorXd emb(2 * (n_freq + 1));
  for (int k = 0; k <= n_freq; ++k) {
    emb(2 * k) = std::sin(2.0 * M_PI * k * x);
    emb(2 * k + 1) = std::cos(2.0 * M_PI * k * x);
  }
  return emb;
}

Eigen::RowVectorXd time_embedding(double t, int dim) {
  Eigen::RowVectorXd emb(dim);
  for (int k = 0; k < dim / 2; ++k) {
    emb(2 * k) = std::sin(M_PI * k * t);
    emb(2 * k + 1) = std::cos(M_PI * k * t);
  }
  return emb;
}

FieldInput field_input_from_crystal(const Crystal& c, double t) {
  FieldInput in;
  in.atomic_numbers = atomic_numbers(c);
  in.frac = c.frac_coords;
  in.lengths = c.lattice.lengths();
  in.angles_unconstrained = angles_to_unconstrained(c.lattice.angles());
  in.t = t;
  return in;
}

int VelocityNet::message_input_dim() const {
  return 2 * hp_.hidden_dim + 6 + 3 * 2 * (hp_.n_freq + 1) + hp_.time_embed_dim;
}

VelocityNet VelocityNet::init(const Hyperparams& hp, Rng& rng) {
  if (hp.time_embed_dim % 2 != 0)
    throw std::invalid_argument("VelocityNet: time_embed_dim must be even");
  VelocityNet net;
  net.hp_ = hp;

  auto uniform_fan_in = [&rng](int rows, int cols) {
    const double bound = std::sqrt(3.0 / rows);
    ad::MatX w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
    return w;
  };
  auto add = [&net](const std::string& name, ad::MatX w) {
    net.slot_names_.push_back(name);
    return net.params_.add(std::move(w));
  };

  const int h = hp.hidden_dim;
  net.embed_slot_ = add("embed", uniform_fan_in(kMaxZ + 1, h));

  const int msg_in = net.message_input_dim();
  for (int layer = 0; layer < hp.n_layers; ++layer) {
    const std::string prefix = "layer" + std::to_string(layer) + ".";
    LayerSlots s{};
    s.msg_w1 = add(prefix + "msg.w1", uniform_fan_in(msg_in, h));
    s.msg_b1 = add(prefix + "msg.b1", ad::MatX::Zero(1, h));
    s.msg_w2 = add(prefix + "msg.w2", uniform_fan_in(h, h));
    s.msg_b2 = add(prefix + "msg.b2", ad::MatX::Zero(1, h));
    s.upd_w1 = add(prefix + "upd.w1", uniform_fan_in(2 * h, h));
    s.upd_b1 = add(prefix + "upd.b1", ad::MatX::Zero(1, h));
    s.upd_w2 = add(prefix + "upd.w2", uniform_fan_in(h, h));
    s.upd_b2 = add(prefix + "upd.b2", ad::MatX::Zero(1, h));
    s.ln_gamma = add(prefix + "ln.gamma", ad::MatX::Ones(1, h));
    s.ln_beta = add(prefix + "ln.beta", ad::MatX::Zero(1, h));
    net.layers_.push_back(s);
  }

  net.coord_w1_ = add("coord.w1", uniform_fan_in(h, h));
  net.coord_b1_ = add("coord.b1", ad::MatX::Zero(1, h));
  // zero-initialized heads: the initial field is identically zero
  net.coord_w2_ = add("coord.w2", ad::MatX::Zero(h, 3));
  net.coord_b2_ = add("coord.b2", ad::MatX::Zero(1, 3));
  net.lat_w1_ = add("lattice.w1", uniform_fan_in(h, h));
  net.lat_b1_ = add("lattice.b1", ad::MatX::Zero(1, h));
  net.lat_w2_ = add("lattice.w2", ad::MatX::Zero(h, 6));
  net.lat_b2_ = add("lattice.b2", ad::MatX::Zero(1, 6));
  return net;
}

void VelocityNet::set_standardization(Standardization s) {
  for (int k = 0; k < 6; ++k) {
    if (!(s.lattice_in_std(k) > 0.0) || !(s.lattice_out_std(k) > 0.0))
      throw std::invalid_argument("Standardization: stds must be strictly positive");
  }
  if (!(s.coord_out_std > 0.0))
    throw std::invalid_argument("Standardization: stds must be strictly positive");
  std_ = std::move(s);
}

VelocityNet::Prediction VelocityNet::build_forward(ad::Tape& tape, const FieldInput& in) const {
  const int n = static_cast<int>(in.atomic_numbers.size());
  if (n < 1) throw std::invalid_argument("VelocityNet: empty crystal");
  if (in.frac.rows() != n) throw std::invalid_argument("VelocityNet: coordinate shape mismatch");

  // z-scored lattice input (lengths + unconstrained angles)
  ad::RowVecX lat6(6);
  lat6 << in.lengths(0), in.lengths(1), in.lengths(2), in.angles_unconstrained(0),
      in.angles_unconstrained(1), in.angles_unconstrained(2);
  lat6 = ((lat6 - std_.lattice_in_mean).array() / std_.lattice_in_std.array()).matrix();

  // fully-connected directed edge list, source-major
  const int n_edges = n * n;
  std::vector<int> idx_i(n_edges), idx_j(n_edges), zeros(n_edges, 0);
  const int emb_cols = 2 * (hp_.n_freq + 1);
  ad::MatX edge_emb(n_edges, 3 * emb_cols);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int e = i * n + j;
      idx_i[e] = i;
      idx_j[e] = j;
      for (int axis = 0; axis < 3; ++axis) {
        const double d = wrap_unit(in.frac(j, axis) - in.frac(i, axis));
        edge_emb.block(e, axis * emb_cols, 1, emb_cols) = sinusoidal_embedding(d, hp_.n_freq);
      }
    }

  const ad::Var lat_const = tape.constant(lat6);
  const ad::Var time_const = tape.constant(time_embedding(in.t, hp_.time_embed_dim));
  const ad::Var edge_const = tape.constant(std::move(edge_emb));
  const ad::Var lat_rep = tape.gather_rows(lat_const, zeros);
  const ad::Var time_rep = tape.gather_rows(time_const, zeros);

  std::vector<int> species_rows(in.atomic_numbers.begin(), in.atomic_numbers.end());
  ad::Var hidden = tape.gather_rows(tape.param(embed_slot_), species_rows);

  auto linear = [&](ad::Var x, int w, int b) {
    return tape.add_rowvec(tape.matmul(x, tape.param(w)), tape.param(b));
  };

  for (const LayerSlots& s : layers_) {
    const ad::Var hi = tape.gather_rows(hidden, idx_i);
    const ad::Var hj = tape.gather_rows(hidden, idx_j);
    const ad::Var msg_in = tape.hcat({hi, hj, lat_rep, edge_const, time_rep});
    const ad::Var msg =
        tape.silu(linear(tape.silu(linear(msg_in, s.msg_w1, s.msg_b1)), s.msg_w2, s.msg_b2));
    const ad::Var agg = tape.segment_sum(msg, n);
    const ad::Var upd = linear(tape.silu(linear(tape.hcat({hidden, agg}), s.upd_w1, s.upd_b1)),
                               s.upd_w2, s.upd_b2);
    hidden = tape.layer_norm(tape.add(hidden, upd), tape.param(s.ln_gamma), tape.param(s.ln_beta));
  }

  ad::Var coord_raw =
      linear(tape.silu(linear(hidden, coord_w1_, coord_b1_)), coord_w2_, coord_b2_);
  ad::Var lat_raw =
      linear(tape.silu(linear(tape.mean_rows(hidden), lat_w1_, lat_b1_)), lat_w2_, lat_b2_);

  ad::RowVecX coord_scale = ad::RowVecX::Constant(3, std_.coord_out_std);
  ad::RowVecX coord_shift = ad::RowVecX::Constant(3, std_.coord_out_mean);
  Prediction out;
  out.coord = tape.affine_cols(coord_raw, std::move(coord_scale), std::move(coord_shift));
  out.lattice = tape.affine_cols(lat_raw, std_.lattice_out_std, std_.lattice_out_mean);
  return out;
}

TangentVector VelocityNet::forward(const FieldInput& in) const {
  ad::Tape tape(&params_);
  const Prediction pred = build_forward(tape, in);
  TangentVector v;
  v.coord_tangent = tape.value(pred.coord);
  const ad::MatX& lat = tape.value(pred.lattice);
  v.length_tangent = Vec3(lat(0, 0), lat(0, 1), lat(0, 2));
  v.angle_tangent = Vec3(lat(0, 3), lat(0, 4), lat(0, 5));
  return v;
}

TangentVector VelocityNet::forward(const Crystal& c, double t) const {
  return forward(field_input_from_crystal(c, t));
}

namespace {

nlohmann::json rowvec_to_json(const ad::RowVecX& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ad::RowVecX rowvec_from_json(const nlohmann::json& arr) {
  ad::RowVecX v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

} // namespace

std::string VelocityNet::to_checkpoint_json(const std::string& config_hash) const {
  nlohmann::json j;
  j["format"] = "cflow-checkpoint-1";
  j["config_hash"] = config_hash;
  j["hyperparams"] = {{"hidden_dim", hp_.hidden_dim},
                      {"time_embed_dim", hp_.time_embed_dim},
                      {"n_layers", hp_.n_layers},
                      {"n_freq", hp_.n_freq}};
  j["standardization"] = {{"lattice_in_mean", rowvec_to_json(std_.lattice_in_mean)},
                          {"lattice_in_std", rowvec_to_json(std_.lattice_in_std)},
                          {"coord_out_mean", std_.coord_out_mean},
                          {"coord_out_std", std_.coord_out_std},
                          {"lattice_out_mean", rowvec_to_json(std_.lattice_out_mean)},
                          {"lattice_out_std", rowvec_to_json(std_.lattice_out_std)}};
  nlohmann::json weights = nlohmann::json::object();
  for (size_t i = 0; i < params_.tensors.size(); ++i) {
    const ad::MatX& t = params_.tensors[i];
    nlohmann::json entry;
    entry["rows"] = t.rows();
    entry["cols"] = t.cols();
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
    entry["data"] = std::move(data);
    weights[slot_names_[i]] = std::move(entry);
  }
  j["weights"] = std::move(weights);
  return j.dump();
}

VelocityNet VelocityNet::from_checkpoint_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("format") || j["format"] != "cflow-checkpoint-1")
    throw ParseError("checkpoint: unrecognized container format");

  Hyperparams hp;
  hp.hidden_dim = j["hyperparams"]["hidden_dim"].get<int>();
  hp.time_embed_dim = j["hyperparams"]["time_embed_dim"].get<int>();
  hp.n_layers = j["hyperparams"]["n_layers"].get<int>();
  hp.n_freq = j["hyperparams"]["n_freq"].get<int>();

  Rng rng(0); // layout only; weights overwritten below
  VelocityNet net = init(hp, rng);

  const auto& s = j["standardization"];
  Standardization std_s;
  std_s.lattice_in_mean = rowvec_from_json(s["lattice_in_mean"]);
  std_s.lattice_in_std = rowvec_from_json(s["lattice_in_std"]);
  std_s.coord_out_mean = s["coord_out_mean"].get<double>();
  std_s.coord_out_std = s["coord_out_std"].get<double>();
  std_s.lattice_out_mean = rowvec_from_json(s["lattice_out_mean"]);
  std_s.lattice_out_std = rowvec_from_json(s["lattice_out_std"]);
  net.set_standardization(std_s);

  const auto& weights = j["weights"];
  for (size_t i = 0; i < net.slot_names_.size(); ++i) {
    const auto it = weights.find(net.slot_names_[i]);
    if (it == weights.end()) throw ParseError("checkpoint: missing weight " + net.slot_names_[i]);
    const Eigen::Index rows = (*it)["rows"].get<Eigen::Index>();
    const Eigen::Index cols = (*it)["cols"].get<Eigen::Index>();
    ad::MatX& t = net.params_.tensors[i];
    if (rows != t.rows() || cols != t.cols())
      throw ParseError("checkpoint: shape mismatch for " + net.slot_names_[i]);
    const auto& data = (*it)["data"];
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw ParseError("checkpoint: bad data length for " + net.slot_names_[i]);
    size_t at = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) t(r, c) = data[at++].get<double>();
  }
  return net;
}

void save_checkpoint(const VelocityNet& net, const std::string& path,
                     const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << net.to_checkpoint_json(config_hash) << '\n';
}

VelocityNet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return VelocityNet::from_checkpoint_json(text);
}

} // namespace cflow::net
