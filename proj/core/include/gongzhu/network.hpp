// Copyright 2026 The Gongzhu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gongzhu/encoding.hpp"

namespace gongzhu {

inline constexpr int kPolicySize = kNumCards;
inline constexpr int kOutputSize = kPolicySize + 1;

struct NetConfig {
  int depth = 16;  // linear layers, input projection and output head included
  int width = 512;
  int skip = 2;    // hidden layers per residual block
  double lambda = 0.01;
  // The value head's raw output is multiplied by this, so initial weights already span
  // the range of game points.
  double value_scale = 100.0;

  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

struct PolicyValue {
  std::array<double, kPolicySize> logits{};
  double value = 0.0;  // final team differential from the encoded seat's side
};

struct TrainingSample {
  InputVector input{};
  std::array<float, kPolicySize> target_policy{};
  float target_value = 0.0f;
  std::uint64_t legal_mask = 0;  // bit k set when card index k is legal
};

// Softmax restricted to the legal entries: illegal logits are zeroed by the mask and
// dropped from the normalisation, so they carry no probability and no gradient.
// Throws GongzhuError on an empty mask.
std::array<double, kPolicySize> masked_policy(std::span<const double, kPolicySize> logits,
                                              std::uint64_t legal_mask);

// Fully connected policy-value network with residual skips:
//   h = relu(W0 x + b0); every `skip` hidden layers h = relu(W h' + b + h_block_in);
//   out = W_last h + b_last (52 logits + 1 raw value).
template <typename Scalar>
class PolicyValueNet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  PolicyValueNet(const NetConfig& config, std::uint64_t seed);

  const NetConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  PolicyValue forward(const InputVector& input) const;
  // Columns are samples; returns kOutputSize x batch with the value row already scaled.
  Matrix forward_batch(const Matrix& inputs) const;

  // Mean loss over the batch: KL(target || masked policy) + lambda * |target - value|.
  // Throws GongzhuError if a target policy is not a distribution over legal moves.
  Scalar loss(std::span<const TrainingSample> batch) const;
  // Same loss; fills `grads` (same shapes as layers()) with its gradient.
  Scalar loss_and_gradient(std::span<const TrainingSample> batch, std::vector<Layer>& grads) const;

  std::size_t parameter_count() const;
  Scalar& parameter(std::size_t index);

  // Throws ModelError if any weight is NaN or infinite.
  void check_finite() const;

  template <typename Other>
  PolicyValueNet<Other> cast() const;

 private:
  template <typename>
  friend class PolicyValueNet;

  Matrix run(const Matrix& inputs, std::vector<Matrix>* activations) const;
  Scalar loss_impl(std::span<const TrainingSample> batch, std::vector<Layer>* grads) const;
  bool closes_block(std::size_t layer) const;

  NetConfig config_;
  std::vector<Layer> layers_;
};

using Network = PolicyValueNet<float>;

// Adam with per-parameter moments.
class AdamOptimizer {
 public:
  struct Options {
    double learning_rate = 0.001;
    double beta1 = 0.3;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  AdamOptimizer() : AdamOptimizer(Options{}) {}
  explicit AdamOptimizer(Options options) : options_(options) {}

  const Options& options() const { return options_; }
  void step(Network& net, const std::vector<Network::Layer>& grads);

 private:
  Options options_;
  std::vector<Network::Layer> m_, v_;
  long steps_ = 0;
};

struct TrainMetrics {
  double loss = 0.0;
  double kl = 0.0;
  double value_loss = 0.0;  // lambda-weighted
  int updates = 0;
};

// KL and weighted value terms of the mean loss, reported separately.
TrainMetrics evaluate_loss(const Network& net, std::span<const TrainingSample> batch);

// `passes` shuffled epochs of minibatch Adam over the samples. Returns metrics measured
// on the samples after the update.
TrainMetrics train_step(Network& net, AdamOptimizer& optimizer,
                        std::span<const TrainingSample> samples, int passes, int minibatch,
                        Rng& rng);

// Checkpoint: "GZPV" magic, u32 version, u32 depth/width/skip, f64 lambda/value_scale,
// then per layer u32 rows, u32 cols and row-major f32 weights followed by f32 biases.
void save_network(const Network& net, std::ostream& out);
Network load_network(std::istream& in);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

extern template class PolicyValueNet<float>;
extern template class PolicyValueNet<double>;

}  // namespace gongzhu
