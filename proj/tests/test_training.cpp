#include <doctest.h>

#include <cmath>

#include "cflow/hungarian.hpp"
#include "cflow/synthetic.hpp"
#include "cflow/training.hpp"
#include "oracles.hpp"

using namespace cflow;
using train::CrystalPair;
using train::PairDataset;
using train::TrainConfig;

TEST_CASE("hungarian_assignment on small matrices") {
  Eigen::MatrixXd cost(2, 2);
  cost << 1, 2, 2, 1;
  CHECK(hungarian_assignment(cost) == std::vector<int>{0, 1});
  cost << 5, 1, 1, 5;
  CHECK(hungarian_assignment(cost) == std::vector<int>{1, 0});

  // brute force oracle on random 5x5
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd c(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) c(i, j) = rng.uniform();
    const std::vector<int> got = hungarian_assignment(c);
    double got_cost = 0.0;
    for (int i = 0; i < 5; ++i) got_cost += c(i, got[static_cast<size_t>(i)]);

    std::vector<int> perm = {0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      double cur = 0.0;
      for (int i = 0; i < 5; ++i) cur += c(i, perm[static_cast<size_t>(i)]);
      best = std::min(best, cur);
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(got_cost == doctest::Approx(best).epsilon(1e-12));
  }
}

namespace {

Crystal two_atom(const std::string& s0, const std::string& s1, double x0, double x1,
                 const LatticeParams& lat) {
  FracCoords f(2, 3);
  f << x0, 0.2, 0.2, x1, 0.2, 0.2;
  return make_crystal({s0, s1}, f, lat);
}

} // namespace

TEST_CASE("atom_alignment: identity, transposition, species blocks") {
  const LatticeParams lat{4, 4, 4, 90, 90, 90};
  const Crystal c = two_atom("Fe", "Fe", 0.1, 0.6, lat);
  CHECK(train::atom_alignment(c, c) == std::vector<int>{0, 1});

  const Crystal swapped = two_atom("Fe", "Fe", 0.6, 0.1, lat);
  CHECK(train::atom_alignment(swapped, c) == std::vector<int>{1, 0});

  Rng rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    Crystal c1 = oracle::random_crystal(rng, 6);
    Crystal c0 = c1;
    std::vector<int> shuffle_perm(6);
    for (int i = 0; i < 6; ++i) shuffle_perm[static_cast<size_t>(i)] = i;
    rng.shuffle(shuffle_perm);
    for (int i = 0; i < 6; ++i) {
      c0.species[static_cast<size_t>(i)] = c1.species[static_cast<size_t>(shuffle_perm[i])];
      c0.frac_coords.row(i) = c1.frac_coords.row(shuffle_perm[i]);
    }
    const std::vector<int> perm = train::atom_alignment(c0, c1);
    for (int i = 0; i < 6; ++i)
      REQUIRE(c0.species[static_cast<size_t>(perm[static_cast<size_t>(i)])] ==
              c1.species[static_cast<size_t>(i)]);
    const Crystal aligned = train::apply_alignment(c0, perm);
    CHECK(aligned.species == c1.species);
    CHECK((aligned.frac_coords - c1.frac_coords).cwiseAbs().maxCoeff() < 1e-12);
  }

  Crystal other = c;
  other.species = {"Fe", "O"};
  CHECK_THROWS(train::atom_alignment(c, other));
}

TEST_CASE("build_pair_dataset: contract, determinism, rejection accounting") {
  Rng rng(73);
  std::vector<Crystal> dataset;
  for (int i = 0; i < 2; ++i) dataset.push_back(oracle::random_crystal(rng, 3));
  const QuantizedEmpiricalBase base = fit_quantized_base(dataset);

  Rng build_rng(99);
  const PairDataset ds = train::build_pair_dataset(dataset, base, 5, build_rng);
  CHECK(ds.pairs.size() == 5);
  for (const auto& p : ds.pairs) {
    CHECK(p.c0.species == p.c1.species); // aligned position-wise
    CHECK(composition(p.c0) == composition(p.c1));
  }

  Rng rerun_rng(99);
  const PairDataset ds2 = train::build_pair_dataset(dataset, base, 5, rerun_rng);
  for (size_t i = 0; i < 5; ++i) {
    CHECK((ds.pairs[i].c0.frac_coords - ds2.pairs[i].c0.frac_coords).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ds.pairs[i].c1.frac_coords - ds2.pairs[i].c1.frac_coords).cwiseAbs().maxCoeff() == 0.0);
  }

  // mock sampler with a 10% invalid-draw rate
  struct FlakySampler : BaseSampler {
    const QuantizedEmpiricalBase* inner;
    Crystal sample(const Composition& comp, Rng& r) const override {
      Crystal c = inner->sample(comp, r);
      if (r.uniform() < 0.1) c.lattice.a = -1.0;
      return c;
    }
    Composition sample_composition(Rng& r) const override {
      return inner->sample_composition(r);
    }
    bool quantized_support() const override { return true; }
    std::string describe() const override { return "flaky"; }
  };
  FlakySampler flaky;
  flaky.inner = &base;
  Rng flaky_rng(100);
  const PairDataset fd = train::build_pair_dataset(dataset, flaky, 10000, flaky_rng);
  CHECK(fd.rejected_fraction() == doctest::Approx(0.10).epsilon(0.1));

  CHECK_THROWS(train::build_pair_dataset({}, base, 1, rng));
}

TEST_CASE("rfm_loss: zero at the optimum and hand-computed value") {
  Rng rng(74);
  net::VelocityNet net = net::VelocityNet::init(net::Hyperparams{8, 4, 2, 2}, rng);

  // identical endpoints: targets vanish and the zero field is optimal
  const Crystal c = oracle::random_crystal(rng, 3);
  CHECK(train::rfm_loss(net, {c, c}, 0.3) == doctest::Approx(0.0).epsilon(1e-15));

  // zero predictions against a fixed two-atom pair, identity standardization:
  // coord targets (-0.2, +0.2) on x, length targets -1 each =>
  // 200/6 * 0.08 + 1/6 * 3
  const LatticeParams lat0{4, 4, 4, 90, 90, 90}, lat1{5, 5, 5, 90, 90, 90};
  const CrystalPair pair{two_atom("Fe", "Fe", 0.1, 0.6, lat0),
                         two_atom("Fe", "Fe", 0.3, 0.4, lat1)};
  const double expected = 200.0 / 6.0 * 0.08 + 1.0 / 6.0 * 3.0;
  CHECK(train::rfm_loss(net, pair, 0.25) == doctest::Approx(expected).epsilon(1e-10));

  // doubling lambda_f doubles exactly the coordinate term
  const double base_loss = train::rfm_loss(net, pair, 0.25, 200.0, 1.0);
  const double doubled = train::rfm_loss(net, pair, 0.25, 400.0, 1.0);
  CHECK(doubled - base_loss == doctest::Approx(200.0 / 6.0 * 0.08).epsilon(1e-10));
}

TEST_CASE("rfm_loss: invariant under joint permutation and joint translation") {
  Rng rng(75);
  net::VelocityNet net = net::VelocityNet::init(net::Hyperparams{8, 4, 2, 2}, rng);
  Eigen::VectorXd flat = net.params().to_vector();
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = rng.uniform(-0.3, 0.3);
  net.params().from_vector(flat);

  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4;
    const Crystal c1 = oracle::random_crystal(rng, n);
    Crystal c0 = c1;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k)
        c0.frac_coords(i, k) = wrap_unit(c1.frac_coords(i, k) + rng.uniform(-0.3, 0.3));
    const double t = rng.uniform(0.0, 0.9);
    const double loss = train::rfm_loss(net, {c0, c1}, t);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    rng.shuffle(perm);
    Crystal p0 = c0, p1 = c1;
    for (int i = 0; i < n; ++i) {
      p0.species[static_cast<size_t>(i)] = c0.species[static_cast<size_t>(perm[i])];
      p0.frac_coords.row(i) = c0.frac_coords.row(perm[i]);
      p1.species[static_cast<size_t>(i)] = c1.species[static_cast<size_t>(perm[i])];
      p1.frac_coords.row(i) = c1.frac_coords.row(perm[i]);
    }
    REQUIRE(std::abs(train::rfm_loss(net, {p0, p1}, t) - loss) < 1e-9);

    const Vec3 s(rng.uniform(), rng.uniform(), rng.uniform());
    Crystal s0 = c0, s1 = c1;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k) {
        s0.frac_coords(i, k) = wrap_unit(c0.frac_coords(i, k) + s(k));
        s1.frac_coords(i, k) = wrap_unit(c1.frac_coords(i, k) + s(k));
      }
    REQUIRE(std::abs(train::rfm_loss(net, {s0, s1}, t) - loss) < 1e-9);
  }
}

TEST_CASE("pair JSONL round trip") {
  Rng rng(76);
  std::vector<Crystal> dataset;
  for (int i = 0; i < 4; ++i) dataset.push_back(oracle::random_crystal(rng, 2));
  const QuantizedEmpiricalBase base = fit_quantized_base(dataset);
  const PairDataset ds = train::build_pair_dataset(dataset, base, 6, rng);
  train::write_pair_jsonl("pairs_test.jsonl", ds);
  const PairDataset back = train::read_pair_jsonl("pairs_test.jsonl");
  REQUIRE(back.pairs.size() == ds.pairs.size());
  for (size_t i = 0; i < ds.pairs.size(); ++i) {
    CHECK(back.pairs[i].c0.species == ds.pairs[i].c0.species);
    CHECK((back.pairs[i].c1.frac_coords - ds.pairs[i].c1.frac_coords).cwiseAbs().maxCoeff() <
          1e-11);
  }
}

namespace {

PairDataset synthetic_pairs(int n_pairs, uint64_t seed, bool degenerate = false) {
  SyntheticFamilyConfig cfg;
  cfg.n_train = 256;
  cfg.n_test = 10;
  cfg.seed = seed;
  const SyntheticFamily family = make_synthetic_family(cfg);
  Rng rng(seed ^ 0xF00D);
  if (degenerate) {
    PairDataset ds;
    ds.base_kind = "identity";
    for (int i = 0; i < n_pairs; ++i) {
      const Crystal& c = family.train[rng.uniform_index(family.train.size())];
      ds.pairs.push_back(CrystalPair{c, c});
    }
    return ds;
  }
  const QuantizedEmpiricalBase base = fit_quantized_base(family.train);
  return train::build_pair_dataset(family.train, base, n_pairs, rng);
}

} // namespace

TEST_CASE("train: learning rate 0 leaves parameters unchanged") {
  PairDataset ds = synthetic_pairs(64, 81);
  Rng rng(82);
  net::VelocityNet net = net::VelocityNet::init(net::Hyperparams{16, 8, 2, 4}, rng);

  TrainConfig config;
  config.learning_rate = 0.0;
  config.epochs = 3;
  config.batch_size = 16;
  config.early_stop_patience = 10;
  config.seed = 5;

  const Eigen::VectorXd before = net.params().to_vector();
  const train::TrainResult result = train::train(net, ds, config);
  const Eigen::VectorXd after = net.params().to_vector();
  REQUIRE(before.size() == after.size());
  for (Eigen::Index i = 0; i < before.size(); ++i) REQUIRE(before(i) == after(i));
  // validation loss is evaluated at fixed t values: flat across epochs
  for (size_t e = 1; e < result.history.size(); ++e)
    CHECK(result.history[e].val_loss == result.history[0].val_loss);
}

TEST_CASE("train: degenerate transport stays at the zero-field optimum") {
  PairDataset ds = synthetic_pairs(128, 83, /*degenerate=*/true);
  Rng rng(84);
  net::VelocityNet net = net::VelocityNet::init(net::Hyperparams{16, 8, 2, 4}, rng);

  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 32;
  config.seed = 6;
  const train::TrainResult result = train::train(net, ds, config);
  CHECK(result.history.back().train_loss < 1e-3);
  CHECK(result.best_val_loss < 1e-3);
}

TEST_CASE("train: fixed seed reproduces the loss history bit-identically") {
  PairDataset ds = synthetic_pairs(96, 85);
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 24;
  config.seed = 7;
  config.learning_rate = 1e-3;

  auto run = [&]() {
    Rng rng(86);
    net::VelocityNet net = net::VelocityNet::init(net::Hyperparams{16, 8, 2, 4}, rng);
    return train::train(net, ds, config);
  };
  const train::TrainResult a = run();
  const train::TrainResult b = run();
  REQUIRE(a.history.size() == b.history.size());
  for (size_t e = 0; e < a.history.size(); ++e) {
    REQUIRE(a.history[e].train_loss == b.history[e].train_loss);
    REQUIRE(a.history[e].val_loss == b.history[e].val_loss);
  }
}

TEST_CASE("train: 20 epochs halve the loss on 512 synthetic samples") {
  PairDataset ds = synthetic_pairs(512, 87);
  Rng rng(88);
  net::VelocityNet net = net::VelocityNet::init(net::Hyperparams{32, 16, 2, 6}, rng);

  TrainConfig config;
  config.epochs = 20;
  config.batch_size = 32;
  config.seed = 8;
  config.learning_rate = 1e-3;
  config.early_stop_patience = 20;
  config.threads = 2;

  const train::TrainResult result = train::train(net, ds, config);
  double best_train = result.history[0].train_loss;
  for (const auto& e : result.history) best_train = std::min(best_train, e.train_loss);
  CHECK(best_train <= 0.5 * result.initial_train_loss);
  // best-so-far validation loss is monotone by construction
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : result.history) {
    const double prev = best;
    best = std::min(best, e.val_loss);
    CHECK(best <= prev);
  }
}
