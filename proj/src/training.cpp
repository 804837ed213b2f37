#include "cflow/training.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "cflow/crystal_io.hpp"
#include "cflow/hungarian.hpp"
#include "cflow/parallel.hpp"

namespace cflow::train {

std::vector<int> atom_alignment(const Crystal& c0, const Crystal& c1) {
  if (composition(c0) != composition(c1))
    throw std::invalid_argument("atom_alignment: compositions differ");
  const int n = c0.n_atoms();
  std::vector<int> perm(static_cast<size_t>(n), -1);

  std::map<std::string, std::vector<int>> blocks0, blocks1;
  for (int i = 0; i < n; ++i) {
    blocks0[c0.species[static_cast<size_t>(i)]].push_back(i);
    blocks1[c1.species[static_cast<size_t>(i)]].push_back(i);
  }

  for (const auto& [symbol, idx0] : blocks0) {
    const std::vector<int>& idx1 = blocks1.at(symbol);
    const int m = static_cast<int>(idx0.size());
    Eigen::MatrixXd cost(m, m);
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) {
        double d2 = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
          const double d = torus_log(c0.frac_coords(idx0[static_cast<size_t>(k)], axis),
                                     c1.frac_coords(idx1[static_cast<size_t>(l)], axis));
          d2 += d * d;
        }
        cost(k, l) = d2;
      }
    const std::vector<int> assign = hungarian_assignment(cost);
    for (int k = 0; k < m; ++k)
      perm[static_cast<size_t>(idx1[static_cast<size_t>(assign[static_cast<size_t>(k)])])] =
          idx0[static_cast<size_t>(k)];
  }
  return perm;
}

Crystal apply_alignment(const Crystal& c0, const std::vector<int>& perm) {
  Crystal out = c0;
  for (size_t i = 0; i < perm.size(); ++i) {
    out.species[i] = c0.species[static_cast<size_t>(perm[i])];
    out.frac_coords.row(static_cast<Eigen::Index>(i)) = c0.frac_coords.row(perm[i]);
  }
  return out;
}

namespace {

bool angles_in_flow_domain(const Crystal& c) {
  for (double a : {c.lattice.alpha, c.lattice.beta, c.lattice.gamma})
    if (a < 60.0 || a > 120.0) return false;
  return true;
}

} // namespace

PairDataset build_pair_dataset(const std::vector<Crystal>& dataset, const BaseSampler& base,
                               int n_pairs, Rng& rng, double noise_sigma) {
  if (dataset.empty()) throw std::invalid_argument("build_pair_dataset: empty dataset");
  if (n_pairs < 1) throw std::invalid_argument("build_pair_dataset: n_pairs must be >= 1");

  PairDataset out;
  out.base_kind = base.describe();
  out.pairs.reserve(static_cast<size_t>(n_pairs));

  int consecutive_rejections = 0;
  while (out.pairs.size() < static_cast<size_t>(n_pairs)) {
    const Crystal& c1 = dataset[rng.uniform_index(dataset.size())];
    const Composition comp = composition(c1);

    out.draws_total++;
    Crystal c0 = base.sample(comp, rng);
    bool ok = !reject_invalid(c0) && angles_in_flow_domain(c0);
    if (ok && noise_sigma > 0.0) {
      c0 = add_noise(c0, noise_sigma, rng);
      ok = !reject_invalid(c0) && angles_in_flow_domain(c0);
    }
    if (!ok) {
      out.draws_rejected++;
      if (++consecutive_rejections > 1000)
        throw std::runtime_error("build_pair_dataset: base sampler rejected 1000 times in a row");
      continue;
    }
    consecutive_rejections = 0;

    const std::vector<int> perm = atom_alignment(c0, c1);
    out.pairs.push_back(CrystalPair{apply_alignment(c0, perm), c1});
  }
  return out;
}

void write_pair_jsonl(const std::string& path, const PairDataset& ds) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  for (const auto& p : ds.pairs)
    out << "{\"c0\": " << crystal_to_json_line(p.c0) << ", \"c1\": " << crystal_to_json_line(p.c1)
        << "}\n";
}

PairDataset read_pair_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  PairDataset ds;
  ds.base_kind = "file";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("c0") || !j.contains("c1"))
      throw ParseError("pair record: expected {\"c0\": ..., \"c1\": ...}");
    ds.pairs.push_back(CrystalPair{crystal_from_json_line(j["c0"].dump()),
                                   crystal_from_json_line(j["c1"].dump())});
  }
  return ds;
}

PairTargets pair_targets(const CrystalPair& pair) {
  PairTargets t;
  t.coord = remove_mean_translation(torus_log(pair.c1.frac_coords, pair.c0.frac_coords));
  const Vec3 dlen = pair.c0.lattice.lengths() - pair.c1.lattice.lengths();
  const Vec3 dang = angles_to_unconstrained(pair.c0.lattice.angles()) -
                    angles_to_unconstrained(pair.c1.lattice.angles());
  t.lattice.resize(6);
  t.lattice << dlen(0), dlen(1), dlen(2), dang(0), dang(1), dang(2);
  return t;
}

namespace {

ad::Var build_loss(const net::VelocityNet& net, ad::Tape& tape, const CrystalPair& pair, double t,
                   double lambda_coord, double lambda_lattice) {
  const Crystal c_t = geodesic_point(pair.c0, pair.c1, t);
  const net::VelocityNet::Prediction pred =
      net.build_forward(tape, net::field_input_from_crystal(c_t, t));
  const PairTargets targets = pair_targets(pair);

  const ad::Var res_coord = tape.add(pred.coord, tape.constant(targets.coord));
  const ad::Var res_lattice = tape.add(pred.lattice, tape.constant(targets.lattice));
  const double n = static_cast<double>(pair.c1.n_atoms());
  return tape.axpby(lambda_coord / (3.0 * n), tape.sum_sq(res_coord), lambda_lattice / 6.0,
                    tape.sum_sq(res_lattice));
}

} // namespace

double rfm_loss(const net::VelocityNet& net, const CrystalPair& pair, double t,
                double lambda_coord, double lambda_lattice) {
  ad::Tape tape(&net.params());
  return tape.value(build_loss(net, tape, pair, t, lambda_coord, lambda_lattice))(0, 0);
}

double rfm_loss_grad(const net::VelocityNet& net, const CrystalPair& pair, double t,
                     double lambda_coord, double lambda_lattice, ad::GradStore& grads,
                     double scale) {
  ad::Tape tape(&net.params());
  ad::Var loss = build_loss(net, tape, pair, t, lambda_coord, lambda_lattice);
  if (scale != 1.0) loss = tape.scale(loss, scale);
  tape.backward(loss, grads);
  return tape.value(loss)(0, 0) / (scale == 0.0 ? 1.0 : scale);
}

net::Standardization compute_standardization(const PairDataset& ds) {
  net::Standardization s;
  ad::RowVecX in_sum = ad::RowVecX::Zero(6), in_sum2 = ad::RowVecX::Zero(6);
  ad::RowVecX out_sum = ad::RowVecX::Zero(6), out_sum2 = ad::RowVecX::Zero(6);
  double coord_sum = 0.0, coord_sum2 = 0.0;
  size_t n_in = 0, n_coord = 0;

  auto lat6 = [](const Crystal& c) {
    ad::RowVecX v(6);
    const Vec3 len = c.lattice.lengths();
    const Vec3 u = angles_to_unconstrained(c.lattice.angles());
    v << len(0), len(1), len(2), u(0), u(1), u(2);
    return v;
  };

  for (const auto& pair : ds.pairs) {
    for (const Crystal* c : {&pair.c0, &pair.c1}) {
      const ad::RowVecX v = lat6(*c);
      in_sum += v;
      in_sum2 += v.cwiseProduct(v);
      n_in++;
    }
    const PairTargets t = pair_targets(pair);
    // velocity targets carry the opposite sign of the endpoint difference
    out_sum -= t.lattice;
    out_sum2 += t.lattice.cwiseProduct(t.lattice);
    for (Eigen::Index i = 0; i < t.coord.rows(); ++i)
      for (int k = 0; k < 3; ++k) {
        coord_sum -= t.coord(i, k);
        coord_sum2 += t.coord(i, k) * t.coord(i, k);
        n_coord++;
      }
  }

  const double floor = 1e-6;
  const double ni = static_cast<double>(std::max<size_t>(n_in, 1));
  const double np = static_cast<double>(ds.pairs.size());
  const double nc = static_cast<double>(std::max<size_t>(n_coord, 1));
  s.lattice_in_mean = in_sum / ni;
  s.lattice_out_mean = out_sum / np;
  s.coord_out_mean = coord_sum / nc;
  for (int k = 0; k < 6; ++k) {
    s.lattice_in_std(k) = std::sqrt(
        std::max(in_sum2(k) / ni - s.lattice_in_mean(k) * s.lattice_in_mean(k), 0.0));
    s.lattice_in_std(k) = std::max(s.lattice_in_std(k), floor);
    s.lattice_out_std(k) = std::sqrt(
        std::max(out_sum2(k) / np - s.lattice_out_mean(k) * s.lattice_out_mean(k), 0.0));
    s.lattice_out_std(k) = std::max(s.lattice_out_std(k), floor);
  }
  s.coord_out_std = std::sqrt(
      std::max(coord_sum2 / nc - s.coord_out_mean * s.coord_out_mean, 0.0));
  s.coord_out_std = std::max(s.coord_out_std, floor);
  return s;
}

namespace {

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct AdamW {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay;
  std::vector<ad::MatX> m, v;
  long step_count = 0;

  AdamW(const ad::ParamStore& params, double lr_, double wd) : lr(lr_), weight_decay(wd) {
    for (const auto& t : params.tensors) {
      m.push_back(ad::MatX::Zero(t.rows(), t.cols()));
      v.push_back(ad::MatX::Zero(t.rows(), t.cols()));
    }
  }

  void update(ad::ParamStore& params, const ad::GradStore& grads) {
    step_count++;
    const double bc1 = 1.0 - std::pow(beta1, step_count);
    const double bc2 = 1.0 - std::pow(beta2, step_count);
    for (size_t i = 0; i < params.tensors.size(); ++i) {
      const ad::MatX& g = grads.tensors[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g.cwiseProduct(g);
      ad::MatX& p = params.tensors[i];
      p.array() -= lr * ((m[i].array() / bc1) / ((v[i].array() / bc2).sqrt() + eps) +
                         weight_decay * p.array());
    }
  }
};

} // namespace

TrainResult train(net::VelocityNet& net, const PairDataset& ds, const TrainConfig& config) {
  if (ds.pairs.empty()) throw std::invalid_argument("train: empty pair dataset");
  net.set_standardization(compute_standardization(ds));

  // seed-stable validation split on the serialized record
  std::vector<size_t> train_idx, val_idx;
  for (size_t i = 0; i < ds.pairs.size(); ++i) {
    const uint64_t h = fnv1a(crystal_to_json_line(ds.pairs[i].c0) +
                             crystal_to_json_line(ds.pairs[i].c1)) ^
                       config.seed;
    const double u = static_cast<double>(h % 1000000) / 1000000.0;
    (u < config.val_fraction ? val_idx : train_idx).push_back(i);
  }
  if (train_idx.empty()) train_idx.push_back(0);
  if (val_idx.empty()) val_idx.push_back(ds.pairs.size() - 1);

  const int threads = std::max(1, config.threads);
  constexpr double kTMax = 1.0 - 1e-4;

  auto mean_loss = [&](const std::vector<size_t>& idx, uint64_t salt) {
    std::vector<double> losses(idx.size(), 0.0);
    parallel_for(idx.size(), threads, [&](size_t k) {
      Rng r = Rng::substream(config.seed ^ salt, idx[k]);
      const double t = r.uniform() * kTMax;
      losses[k] = rfm_loss(net, ds.pairs[idx[k]], t, config.lambda_coord, config.lambda_lattice);
    });
    double total = 0.0;
    for (double l : losses) total += l;
    return total / static_cast<double>(losses.size());
  };

  TrainResult result;
  result.initial_train_loss = mean_loss(train_idx, 0xA11CE);

  AdamW opt(net.params(), config.learning_rate, config.weight_decay);
  std::vector<ad::GradStore> thread_grads(static_cast<size_t>(threads));
  for (auto& g : thread_grads) g.init_like(net.params());
  ad::GradStore batch_grads;
  batch_grads.init_like(net.params());

  ad::ParamStore best_params = net.params();
  net::Standardization best_std = net.standardization();
  result.best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  Rng shuffle_rng(config.seed ^ 0x5eedULL);
  std::vector<size_t> order = train_idx;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t epoch_items = 0;

    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      const size_t batch = stop - start;
      const double inv_batch = 1.0 / static_cast<double>(batch);

      for (auto& g : thread_grads) g.zero();
      std::vector<double> item_loss(batch, 0.0);
      const size_t chunk = (batch + threads - 1) / static_cast<size_t>(threads);
      parallel_for(batch, threads, [&](size_t b) {
        const size_t idx = order[start + b];
        Rng r = Rng::substream(config.seed ^ 0x7777ULL,
                               (static_cast<uint64_t>(epoch) << 32) ^ idx);
        const double t = r.uniform() * kTMax;
        const size_t worker = std::min(b / chunk, static_cast<size_t>(threads) - 1);
        item_loss[b] = rfm_loss_grad(net, ds.pairs[idx], t, config.lambda_coord,
                                     config.lambda_lattice, thread_grads[worker], inv_batch);
      });

      batch_grads.zero();
      for (const auto& g : thread_grads) batch_grads.add(g);

      double batch_loss = 0.0;
      for (double l : item_loss) batch_loss += l;
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch starting at " + std::to_string(start));
      epoch_loss += batch_loss;
      epoch_items += batch;

      opt.update(net.params(), batch_grads);
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(epoch_items);
    stats.val_loss = mean_loss(val_idx, 0xB0B);
    result.history.push_back(stats);

    if (stats.val_loss < result.best_val_loss) {
      result.best_val_loss = stats.val_loss;
      result.best_epoch = epoch;
      best_params = net.params();
      best_std = net.standardization();
      epochs_since_best = 0;
    } else if (++epochs_since_best >= config.early_stop_patience) {
      break;
    }
  }

  net.params() = best_params;
  net.set_standardization(best_std);
  return result;
}

} // namespace cflow::train
