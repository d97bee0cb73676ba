// Copyright 2026 The mupt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mupt/core/tensor.hpp"

namespace mupt {

class Tape;

/// Handle to a tensor recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode gradient tape.
///
/// Every op appends a node holding its forward value and a closure that,
/// given the gradient of the node's output, accumulates into the gradients
/// of its inputs. Nodes that do not depend on a parameter carry no closure
/// work at backward time.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of a node, zero-initialized on first access.
  Tensor& grad(std::size_t id);
  std::size_t size() const { return nodes_.size(); }

  // Backpropagates from a scalar (single-element) node.
  void backward(Var loss);
  // Gradient of a node after backward(); zeros if the loss does not depend on it.
  Tensor grad_of(Var v) const;

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    Backward backward;
    Tensor grad;
    bool has_grad = false;
  };
  std::vector<Node> nodes_;
};

/// Exact reverse-mode gradients of a scalar loss for each listed parameter.
std::vector<Tensor> reverse_grad(Var loss, std::span<const Var> params);

/// Keep-pattern for masked softmax. A mask with fewer rows than the input is
/// repeated over the leading rows (e.g. one n x n pattern for C channels).
struct RowMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;

  static RowMask off_diagonal(std::size_t n);
};

// Elementwise ops on equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
// a[..., j] + bias[j]
Var add_bias(Var a, Var bias);
Var sum(Var a);
// 3-D [B x n x m] summed over the leading axis -> [n x m]
Var sum_leading(Var a);

/// op(a) * op(b) over the last two axes. Accepts 2-D x 2-D, 3-D x 3-D (batched),
/// and 2-D x 3-D or 3-D x 2-D where the 2-D operand is shared by every batch.
Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);

/// Softmax over the last axis; masked-out entries are exactly 0.
Var softmax_rows(Var x, const RowMask* mask = nullptr);
/// Row-wise gain * x / sqrt(mean(x^2) + eps) over the last axis.
Var rms_norm_rows(Var x, Var gain, double eps);
/// rows of `table` selected by ids -> [ids.size() x table.cols]
Var gather_rows(Var table, std::span<const int> ids);
/// Relative-position bias: out[c, i, j] = p[c, bucket(i - j)], where the signed
/// distance is clipped to [-K/2, K/2 - 1] and shifted by K/2.
Var relative_position_bias(Var p, std::size_t n);
std::size_t relative_bucket(long distance, std::size_t buckets);
/// Sum over listed positions of -log softmax(logits[pos])[target], divided by
/// `normalizer` (the number of positions when normalizer <= 0).
Var masked_cross_entropy(Var logits, std::span<const int> targets, std::span<const int> positions,
                         double normalizer = 0.0);

/// Value-level helpers built on the same kernels.
Tensor softmax_rows(const Tensor& x, const RowMask* mask = nullptr);
Tensor rms_norm(const Tensor& x, const Tensor& gain, double eps);

}  // namespace mupt
