#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kantor/rng.hpp"

namespace kantor::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Named trainable parameter with its gradient accumulator.
struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;

  Tensor() = default;
  Tensor(std::string n, int rows, int cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

/// Uniform init in +-1/sqrt(fan_in).
inline void init_uniform(Tensor& t, int fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(double(fan_in));
  for (Eigen::Index r = 0; r < t.value.rows(); ++r)
    for (Eigen::Index c = 0; c < t.value.cols(); ++c)
      t.value(r, c) = rng.uniform(-bound, bound);
}

/// Row-wise affine map X*W + b.
struct Affine {
  Tensor W;  // in x out
  Tensor b;  // 1 x out
  Matrix cached_input;

  Affine() = default;
  Affine(const std::string& prefix, int in, int out)
      : W(prefix + ".W", in, out), b(prefix + ".b", 1, out) {}

  void init(Rng& rng) { init_uniform(W, int(W.value.rows()), rng); }

  Matrix forward(const Matrix& x, bool cache) {
    if (cache) cached_input = x;
    return (x * W.value).rowwise() + b.value.row(0);
  }
  Matrix forward_const(const Matrix& x) const {
    return (x * W.value).rowwise() + b.value.row(0);
  }

  Matrix backward(const Matrix& d_out) {
    W.grad.noalias() += cached_input.transpose() * d_out;
    b.grad.row(0) += d_out.colwise().sum();
    return d_out * W.value.transpose();
  }
};

/// Per-feature batch normalization over all rows of the batch, with running
/// statistics for inference.
struct BatchNorm {
  Tensor gamma;  // 1 x features
  Tensor beta;   // 1 x features
  Matrix running_mean;  // 1 x features
  Matrix running_var;   // 1 x features
  double momentum = 0.9;
  double eps = 1e-5;

  Matrix cached_xhat;
  RowVector cached_inv_std;

  BatchNorm() = default;
  BatchNorm(const std::string& prefix, int features)
      : gamma(prefix + ".gamma", 1, features),
        beta(prefix + ".beta", 1, features),
        running_mean(Matrix::Zero(1, features)),
        running_var(Matrix::Ones(1, features)) {
    gamma.value.setOnes();
  }

  Matrix forward_train(const Matrix& x, bool update_running) {
    RowVector mu = x.colwise().mean();
    Matrix centered = x.rowwise() - mu;
    RowVector var = centered.array().square().colwise().mean().matrix();
    cached_inv_std = (var.array() + eps).rsqrt().matrix();
    cached_xhat = (centered.array().rowwise() * cached_inv_std.array()).matrix();
    if (update_running) {
      running_mean.row(0) =
          momentum * running_mean.row(0) + (1.0 - momentum) * mu;
      running_var.row(0) =
          momentum * running_var.row(0) + (1.0 - momentum) * var;
    }
    Matrix out =
        (cached_xhat.array().rowwise() * gamma.value.row(0).array()).matrix();
    out.rowwise() += beta.value.row(0);
    return out;
  }

  Matrix forward_eval(const Matrix& x) const {
    RowVector inv_std = (running_var.row(0).array() + eps).rsqrt().matrix();
    Matrix xhat = x.rowwise() - running_mean.row(0);
    xhat = (xhat.array().rowwise() * inv_std.array()).matrix();
    Matrix out =
        (xhat.array().rowwise() * gamma.value.row(0).array()).matrix();
    out.rowwise() += beta.value.row(0);
    return out;
  }

  Matrix backward(const Matrix& d_out) {
    const double n = double(d_out.rows());
    gamma.grad.row(0) +=
        (d_out.array() * cached_xhat.array()).colwise().sum().matrix();
    beta.grad.row(0) += d_out.colwise().sum();

    Matrix d_xhat =
        (d_out.array().rowwise() * gamma.value.row(0).array()).matrix();
    RowVector sum_dxhat = d_xhat.colwise().sum();
    RowVector sum_dxhat_xhat =
        (d_xhat.array() * cached_xhat.array()).colwise().sum().matrix();
    Matrix dx = d_xhat * n;
    dx.rowwise() -= sum_dxhat;
    dx -= (cached_xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    dx /= n;
    dx = (dx.array().rowwise() * cached_inv_std.array()).matrix();
    return dx;
  }
};

/// Inverted dropout; identity when rate is 0 or at inference.
struct Dropout {
  double rate = 0.0;
  Matrix mask;

  Matrix forward_train(const Matrix& x, Rng& rng) {
    if (rate <= 0.0) return x;
    mask.resize(x.rows(), x.cols());
    double keep = 1.0 - rate;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        mask(r, c) = rng.next_double() < keep ? 1.0 / keep : 0.0;
    return x.cwiseProduct(mask);
  }

  Matrix backward(const Matrix& d_out) const {
    if (rate <= 0.0) return d_out;
    return d_out.cwiseProduct(mask);
  }
};

/// Single-direction tanh recurrence over contiguous piece spans.
struct RnnCell {
  Tensor Wx;  // in x hidden
  Tensor Wh;  // hidden x hidden
  Tensor b;   // 1 x hidden
  bool reverse = false;

  Matrix cached_input;
  Matrix cached_states;

  RnnCell() = default;
  RnnCell(const std::string& prefix, int in, int hidden, bool rev)
      : Wx(prefix + ".Wx", in, hidden), Wh(prefix + ".Wh", hidden, hidden),
        b(prefix + ".b", 1, hidden), reverse(rev) {}

  void init(Rng& rng) {
    init_uniform(Wx, int(Wx.value.rows()), rng);
    init_uniform(Wh, int(Wh.value.rows()), rng);
  }

  /// `offsets` delimits the pieces in the row-concatenated batch; the
  /// recurrence never crosses a piece boundary.
  Matrix forward(const Matrix& x, const std::vector<int>& offsets,
                 bool cache) {
    const int hidden = int(Wx.value.cols());
    Matrix states(x.rows(), hidden);
    for (size_t p = 0; p + 1 < offsets.size(); ++p) {
      int lo = offsets[p], hi = offsets[p + 1];
      RowVector h = RowVector::Zero(hidden);
      for (int i = 0; i < hi - lo; ++i) {
        int row = reverse ? hi - 1 - i : lo + i;
        h = (x.row(row) * Wx.value + h * Wh.value + b.value.row(0))
                .array()
                .tanh()
                .matrix();
        states.row(row) = h;
      }
    }
    if (cache) {
      cached_input = x;
      cached_states = states;
    }
    return states;
  }

  Matrix backward(const Matrix& d_out, const std::vector<int>& offsets) {
    const int hidden = int(Wx.value.cols());
    Matrix dx = Matrix::Zero(cached_input.rows(), cached_input.cols());
    for (size_t p = 0; p + 1 < offsets.size(); ++p) {
      int lo = offsets[p], hi = offsets[p + 1];
      RowVector carry = RowVector::Zero(hidden);
      for (int i = hi - lo; i-- > 0;) {
        int row = reverse ? hi - 1 - i : lo + i;
        int prev_row = reverse ? row + 1 : row - 1;
        bool has_prev = reverse ? (row + 1 < hi) : (row - 1 >= lo);
        RowVector dh = d_out.row(row) + carry;
        RowVector dz =
            (dh.array() * (1.0 - cached_states.row(row).array().square()))
                .matrix();
        Wx.grad.noalias() += cached_input.row(row).transpose() * dz;
        if (has_prev)
          Wh.grad.noalias() += cached_states.row(prev_row).transpose() * dz;
        b.grad.row(0) += dz;
        dx.row(row) = dz * Wx.value.transpose();
        carry = dz * Wh.value.transpose();
      }
    }
    return dx;
  }
};

/// Token embedding table.
struct Embedding {
  Tensor table;  // vocab x dim
  std::vector<int> cached_ids;

  Embedding() = default;
  Embedding(const std::string& name, int vocab_size, int dim)
      : table(name, vocab_size, dim) {}

  void init(Rng& rng) { init_uniform(table, int(table.value.cols()), rng); }

  Matrix forward(const std::vector<int>& ids, bool cache) {
    if (cache) cached_ids = ids;
    Matrix out(Eigen::Index(ids.size()), table.value.cols());
    for (size_t i = 0; i < ids.size(); ++i)
      out.row(Eigen::Index(i)) = table.value.row(ids[i]);
    return out;
  }
  Matrix forward_const(const std::vector<int>& ids) const {
    Matrix out(Eigen::Index(ids.size()), table.value.cols());
    for (size_t i = 0; i < ids.size(); ++i)
      out.row(Eigen::Index(i)) = table.value.row(ids[i]);
    return out;
  }

  void backward(const Matrix& d_out) { backward_ids(cached_ids, d_out); }

  void backward_ids(const std::vector<int>& ids, const Matrix& d_out) {
    for (size_t i = 0; i < ids.size(); ++i)
      table.grad.row(ids[i]) += d_out.row(Eigen::Index(i));
  }
};

/// Row-wise softmax.
inline Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    RowVector row = logits.row(r);
    double m = row.maxCoeff();
    RowVector e = (row.array() - m).exp().matrix();
    out.row(r) = e / e.sum();
  }
  return out;
}

/// Mean cross-entropy over rows plus the logits gradient (already divided by
/// the row count).
inline double softmax_xent(const Matrix& logits,
                           const std::vector<int>& targets, Matrix& d_logits) {
  Matrix probs = softmax(logits);
  const double n = double(logits.rows());
  double loss = 0.0;
  d_logits = probs;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double p = std::max(probs(r, targets[size_t(r)]), 1e-300);
    loss -= std::log(p);
    d_logits(r, targets[size_t(r)]) -= 1.0;
  }
  d_logits /= n;
  return loss / n;
}

}  // namespace kantor::nn
