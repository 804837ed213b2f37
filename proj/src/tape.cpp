#include "cflow/tape.hpp"

#include <stdexcept>

namespace cflow::ad {

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const auto& t : tensors) n += static_cast<size_t>(t.size());
  return n;
}

Eigen::VectorXd ParamStore::to_vector() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(total_size()));
  Eigen::Index at = 0;
  for (const auto& t : tensors) {
    flat.segment(at, t.size()) = Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    at += t.size();
  }
  return flat;
}

void ParamStore::from_vector(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(total_size()))
    throw std::invalid_argument("ParamStore::from_vector: size mismatch");
  Eigen::Index at = 0;
  for (auto& t : tensors) {
    Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) = flat.segment(at, t.size());
    at += t.size();
  }
}

void GradStore::init_like(const ParamStore& params) {
  tensors.clear();
  tensors.reserve(params.tensors.size());
  for (const auto& t : params.tensors) tensors.push_back(MatX::Zero(t.rows(), t.cols()));
}

void GradStore::zero() {
  for (auto& t : tensors) t.setZero();
}

void GradStore::add(const GradStore& other, double scale) {
  for (size_t i = 0; i < tensors.size(); ++i) tensors[i] += scale * other.tensors[i];
}

Eigen::VectorXd GradStore::to_vector() const {
  size_t n = 0;
  for (const auto& t : tensors) n += static_cast<size_t>(t.size());
  Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
  Eigen::Index at = 0;
  for (const auto& t : tensors) {
    flat.segment(at, t.size()) = Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    at += t.size();
  }
  return flat;
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(MatX value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(int slot) {
  Node n;
  n.op = Op::kParam;
  n.param_slot = slot;
  n.value = params_->tensors[static_cast<size_t>(slot)];
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatmul;
  n.inputs = {a.id, b.id};
  n.value = nodes_[a.id].value * nodes_[b.id].value;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a.id, b.id};
  n.value = nodes_[a.id].value + nodes_[b.id].value;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  Node n;
  n.op = Op::kSub;
  n.inputs = {a.id, b.id};
  n.value = nodes_[a.id].value - nodes_[b.id].value;
  return push(std::move(n));
}

Var Tape::add_rowvec(Var x, Var bias) {
  Node n;
  n.op = Op::kAddRowvec;
  n.inputs = {x.id, bias.id};
  n.value = nodes_[x.id].value;
  n.value.rowwise() += nodes_[bias.id].value.row(0);
  return push(std::move(n));
}

Var Tape::scale(Var x, double s) {
  Node n;
  n.op = Op::kScale;
  n.inputs = {x.id};
  n.s0 = s;
  n.value = s * nodes_[x.id].value;
  return push(std::move(n));
}

Var Tape::affine_cols(Var x, RowVecX col_scale, RowVecX col_shift) {
  Node n;
  n.op = Op::kAffineCols;
  n.inputs = {x.id};
  n.row0 = std::move(col_scale);
  n.row1 = std::move(col_shift);
  n.value = nodes_[x.id].value.array().rowwise() * n.row0.array();
  n.value.rowwise() += n.row1;
  return push(std::move(n));
}

Var Tape::silu(Var x) {
  Node n;
  n.op = Op::kSilu;
  n.inputs = {x.id};
  const MatX& v = nodes_[x.id].value;
  n.aux0 = (1.0 + (-v.array()).exp()).inverse().matrix(); // sigmoid
  n.value = v.cwiseProduct(n.aux0);
  return push(std::move(n));
}

Var Tape::gather_rows(Var x, std::vector<int> rows) {
  Node n;
  n.op = Op::kGatherRows;
  n.inputs = {x.id};
  n.index = std::move(rows);
  const MatX& v = nodes_[x.id].value;
  n.value.resize(static_cast<Eigen::Index>(n.index.size()), v.cols());
  for (size_t r = 0; r < n.index.size(); ++r)
    n.value.row(static_cast<Eigen::Index>(r)) = v.row(n.index[r]);
  return push(std::move(n));
}

Var Tape::hcat(const std::vector<Var>& xs) {
  Node n;
  n.op = Op::kHcat;
  Eigen::Index cols = 0;
  const Eigen::Index rows = nodes_[xs[0].id].value.rows();
  for (Var x : xs) {
    n.inputs.push_back(x.id);
    cols += nodes_[x.id].value.cols();
  }
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var x : xs) {
    const MatX& v = nodes_[x.id].value;
    n.value.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  return push(std::move(n));
}

Var Tape::segment_sum(Var x, int group_rows) {
  Node n;
  n.op = Op::kSegmentSum;
  n.inputs = {x.id};
  n.group = group_rows;
  const MatX& v = nodes_[x.id].value;
  const Eigen::Index groups = v.rows() / group_rows;
  n.value = MatX::Zero(groups, v.cols());
  for (Eigen::Index g = 0; g < groups; ++g)
    for (int r = 0; r < group_rows; ++r) n.value.row(g) += v.row(g * group_rows + r);
  return push(std::move(n));
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  Node n;
  n.op = Op::kLayerNorm;
  n.inputs = {x.id, gamma.id, beta.id};
  const MatX& v = nodes_[x.id].value;
  const Eigen::Index rows = v.rows(), cols = v.cols();
  n.aux0.resize(rows, cols); // normalized values
  n.aux1.resize(rows, 1);    // inverse stds
  n.value.resize(rows, cols);
  const RowVecX g = nodes_[gamma.id].value.row(0);
  const RowVecX b = nodes_[beta.id].value.row(0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = v.row(r).mean();
    const double var = (v.row(r).array() - mean).square().mean();
    const double inv_std = 1.0 / std::sqrt(var + eps);
    n.aux1(r, 0) = inv_std;
    n.aux0.row(r) = (v.row(r).array() - mean) * inv_std;
    n.value.row(r) = n.aux0.row(r).cwiseProduct(g) + b;
  }
  return push(std::move(n));
}

Var Tape::mean_rows(Var x) {
  Node n;
  n.op = Op::kMeanRows;
  n.inputs = {x.id};
  n.value = nodes_[x.id].value.colwise().mean();
  return push(std::move(n));
}

Var Tape::remove_col_mean(Var x) {
  Node n;
  n.op = Op::kRemoveColMean;
  n.inputs = {x.id};
  n.value = nodes_[x.id].value;
  n.value.rowwise() -= nodes_[x.id].value.colwise().mean();
  return push(std::move(n));
}

Var Tape::sum_sq(Var x) {
  Node n;
  n.op = Op::kSumSq;
  n.inputs = {x.id};
  n.value = MatX::Constant(1, 1, nodes_[x.id].value.squaredNorm());
  return push(std::move(n));
}

Var Tape::axpby(double ca, Var a, double cb, Var b) {
  Node n;
  n.op = Op::kAxpby;
  n.inputs = {a.id, b.id};
  n.s0 = ca;
  n.s1 = cb;
  n.value = ca * nodes_[a.id].value + cb * nodes_[b.id].value;
  return push(std::move(n));
}

void Tape::backward(Var loss, GradStore& grads) {
  if (nodes_[loss.id].value.size() != 1)
    throw std::invalid_argument("Tape::backward: loss must be scalar");
  for (auto& n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
  nodes_[loss.id].grad(0, 0) = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.size() == 0 || n.grad.isZero(0.0)) {
      if (n.op != Op::kParam) continue;
    }
    const MatX& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam:
        grads.tensors[static_cast<size_t>(n.param_slot)] += g;
        break;
      case Op::kMatmul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        a.grad.noalias() += g * b.value.transpose();
        b.grad.noalias() += a.value.transpose() * g;
        break;
      }
      case Op::kAdd:
        nodes_[n.inputs[0]].grad += g;
        nodes_[n.inputs[1]].grad += g;
        break;
      case Op::kSub:
        nodes_[n.inputs[0]].grad += g;
        nodes_[n.inputs[1]].grad -= g;
        break;
      case Op::kAddRowvec:
        nodes_[n.inputs[0]].grad += g;
        nodes_[n.inputs[1]].grad.row(0) += g.colwise().sum();
        break;
      case Op::kScale:
        nodes_[n.inputs[0]].grad += n.s0 * g;
        break;
      case Op::kAffineCols:
        nodes_[n.inputs[0]].grad += (g.array().rowwise() * n.row0.array()).matrix();
        break;
      case Op::kSilu: {
        Node& x = nodes_[n.inputs[0]];
        // d silu = sigmoid * (1 + x * (1 - sigmoid))
        x.grad.array() +=
            g.array() * n.aux0.array() * (1.0 + x.value.array() * (1.0 - n.aux0.array()));
        break;
      }
      case Op::kGatherRows: {
        Node& x = nodes_[n.inputs[0]];
        for (size_t r = 0; r < n.index.size(); ++r)
          x.grad.row(n.index[r]) += g.row(static_cast<Eigen::Index>(r));
        break;
      }
      case Op::kHcat: {
        Eigen::Index at = 0;
        for (int input : n.inputs) {
          Node& x = nodes_[input];
          x.grad += g.middleCols(at, x.value.cols());
          at += x.value.cols();
        }
        break;
      }
      case Op::kSegmentSum: {
        Node& x = nodes_[n.inputs[0]];
        for (Eigen::Index r = 0; r < x.value.rows(); ++r) x.grad.row(r) += g.row(r / n.group);
        break;
      }
      case Op::kLayerNorm: {
        Node& x = nodes_[n.inputs[0]];
        Node& gamma = nodes_[n.inputs[1]];
        Node& beta = nodes_[n.inputs[2]];
        const RowVecX gv = gamma.value.row(0);
        for (Eigen::Index r = 0; r < x.value.rows(); ++r) {
          const RowVecX d = g.row(r).cwiseProduct(gv);
          const double mean_d = d.mean();
          const double mean_dx = d.cwiseProduct(n.aux0.row(r)).mean();
          x.grad.row(r) +=
              n.aux1(r, 0) * (d.array() - mean_d - n.aux0.row(r).array() * mean_dx).matrix();
        }
        gamma.grad.row(0) += g.cwiseProduct(n.aux0).colwise().sum();
        beta.grad.row(0) += g.colwise().sum();
        break;
      }
      case Op::kMeanRows: {
        Node& x = nodes_[n.inputs[0]];
        x.grad.rowwise() += g.row(0) / static_cast<double>(x.value.rows());
        break;
      }
      case Op::kRemoveColMean: {
        Node& x = nodes_[n.inputs[0]];
        MatX pg = g;
        pg.rowwise() -= g.colwise().mean();
        x.grad += pg;
        break;
      }
      case Op::kSumSq:
        nodes_[n.inputs[0]].grad += 2.0 * g(0, 0) * nodes_[n.inputs[0]].value;
        break;
      case Op::kAxpby:
        nodes_[n.inputs[0]].grad += n.s0 * g;
        nodes_[n.inputs[1]].grad += n.s1 * g;
        break;
    }
  }
}

} // namespace cflow::ad
