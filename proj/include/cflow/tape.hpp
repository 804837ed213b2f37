#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cflow::ad {

using MatX = Eigen::MatrixXd;
using RowVecX = Eigen::RowVectorXd;

// Named parameter tensors shared by all tapes; gradients accumulate into a
// parallel GradStore so one tape per batch item can run concurrently.
struct ParamStore {
  std::vector<MatX> tensors;

  int add(MatX t) {
    tensors.push_back(std::move(t));
    return static_cast<int>(tensors.size()) - 1;
  }
  size_t total_size() const;
  Eigen::VectorXd to_vector() const;
  void from_vector(const Eigen::VectorXd& flat);
};

struct GradStore {
  std::vector<MatX> tensors;

  void init_like(const ParamStore& params);
  void zero();
  void add(const GradStore& other, double scale = 1.0);
  Eigen::VectorXd to_vector() const;
};

struct Var {
  int id = -1;
};

// Eagerly-evaluated reverse-mode tape over dense matrices. One tape per
// loss evaluation; backward() runs the recorded ops in reverse.
class Tape {
 public:
  explicit Tape(const ParamStore* params) : params_(params) {}

  Var constant(MatX value);
  Var param(int slot);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);              // same shape
  Var sub(Var a, Var b);
  Var add_rowvec(Var x, Var bias);    // bias 1xC broadcast over rows
  Var scale(Var x, double s);
  // x * diag(col_scale) + ones * col_shift, with constant coefficients
  Var affine_cols(Var x, RowVecX col_scale, RowVecX col_shift);
  Var silu(Var x);
  Var gather_rows(Var x, std::vector<int> rows);
  Var hcat(const std::vector<Var>& xs);
  Var segment_sum(Var x, int group_rows); // sums consecutive blocks of rows
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var mean_rows(Var x);               // 1xC
  Var remove_col_mean(Var x);         // subtract per-column mean
  Var sum_sq(Var x);                  // 1x1 scalar
  Var axpby(double ca, Var a, double cb, Var b); // ca*a + cb*b, same shape

  const MatX& value(Var v) const { return nodes_[v.id].value; }

  // Seeds d(loss)=1 and accumulates parameter gradients.
  void backward(Var loss, GradStore& grads);

 private:
  enum class Op {
    kConstant,
    kParam,
    kMatmul,
    kAdd,
    kSub,
    kAddRowvec,
    kScale,
    kAffineCols,
    kSilu,
    kGatherRows,
    kHcat,
    kSegmentSum,
    kLayerNorm,
    kMeanRows,
    kRemoveColMean,
    kSumSq,
    kAxpby,
  };

  struct Node {
    Op op;
    MatX value;
    MatX grad;
    std::vector<int> inputs;
    int param_slot = -1;
    double s0 = 0.0, s1 = 0.0;
    std::vector<int> index;
    RowVecX row0, row1;
    int group = 0;
    MatX aux0, aux1; // layer_norm: normalized values / inverse stds
  };

  Var push(Node n);

  const ParamStore* params_;
  std::vector<Node> nodes_;
};

} // namespace cflow::ad
