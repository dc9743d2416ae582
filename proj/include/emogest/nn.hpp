// emogest/nn.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "emogest/autodiff.hpp"
#include "emogest/tensor.hpp"

namespace emogest {
namespace nn {

struct ParamRef {
  std::string name;
  ad::Var* var;
};

class Module {
 public:
  virtual ~Module() = default;
  virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) = 0;
  std::vector<ParamRef> params(const std::string& prefix = "") {
    std::vector<ParamRef> out;
    collect_params(prefix, out);
    return out;
  }
};

class Linear : public Module {
 public:
  Linear() = default;
  Linear(int in_dim, int out_dim, Rng& rng);
  ad::Var forward(const ad::Var& x) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  ad::Var weight;  // in x out
  ad::Var bias;    // 1 x out
};

class LayerNorm : public Module {
 public:
  LayerNorm() = default;
  explicit LayerNorm(int dim);
  ad::Var forward(const ad::Var& x) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  ad::Var gamma;
  ad::Var beta;
};

class MultiHeadAttention : public Module {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(int d_model, int heads, Rng& rng);
  // Positional terms are added to the attention inputs before the q/k
  // projections (values stay position-free). Pass undefined Vars to skip.
  ad::Var forward(const ad::Var& q_in, const ad::Var& kv_in, const ad::Var& q_pos,
                  const ad::Var& k_pos) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  int d_model = 0;
  int heads = 0;
  Linear wq, wk, wv, wo;
};

class FeedForward : public Module {
 public:
  FeedForward() = default;
  FeedForward(int d_model, int d_ff, Rng& rng);
  ad::Var forward(const ad::Var& x) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  Linear fc1, fc2;
};

// Pre-LN self-attention block.
class EncoderBlock : public Module {
 public:
  EncoderBlock() = default;
  EncoderBlock(int d_model, int heads, int d_ff, Rng& rng);
  ad::Var forward(const ad::Var& x, const ad::Var& pos) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ff;
};

// Pre-LN block with self-attention, cross-attention to a memory sequence,
// and a feed-forward.
class CrossBlock : public Module {
 public:
  CrossBlock() = default;
  CrossBlock(int d_model, int heads, int d_ff, Rng& rng);
  ad::Var forward(const ad::Var& x, const ad::Var& memory, const ad::Var& q_pos,
                  const ad::Var& mem_pos) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  LayerNorm ln1, ln2, ln3;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ff;
};

// Stack of self-attention blocks with U-Net style skips: outputs of the
// first half are concatenated into the mirrored second-half inputs and
// projected back to d_model. Positional embeddings are injected into every
// attention layer.
class UNetEncoderStack : public Module {
 public:
  UNetEncoderStack() = default;
  UNetEncoderStack(int layers, int d_model, int heads, int d_ff, Rng& rng);
  ad::Var forward(const ad::Var& x, const ad::Var& pos) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  std::vector<EncoderBlock> blocks;
  std::vector<Linear> skip_proj;  // 2*d_model -> d_model
  LayerNorm final_ln;
};

// Same skip wiring over CrossBlocks (used by the motion prior decoder).
class UNetCrossStack : public Module {
 public:
  UNetCrossStack() = default;
  UNetCrossStack(int layers, int d_model, int heads, int d_ff, Rng& rng);
  ad::Var forward(const ad::Var& x, const ad::Var& memory, const ad::Var& q_pos,
                  const ad::Var& mem_pos) const;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  std::vector<CrossBlock> blocks;
  std::vector<Linear> skip_proj;
  LayerNorm final_ln;
};

// Decoupled weight decay Adam.
class AdamW {
 public:
  AdamW(std::vector<ParamRef> params, double lr, double weight_decay = 0.0,
        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step();
  void zero_grad();
  double grad_norm() const;
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  std::vector<ParamRef> params_;
  std::vector<Tensor> m_, v_;
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  long step_count_ = 0;
};

// Learned parameter initializers.
ad::Var make_param(int rows, int cols, Rng& rng, double std);
// Standard sinusoidal timestep embedding, returned as a 1 x dim row.
Tensor sinusoidal_embedding(double t, int dim);

}  // namespace nn
}  // namespace emogest
