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

#include "gongzhu/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "gongzhu/errors.hpp"

namespace gongzhu {
namespace {

constexpr char kMagic[4] = {'G', 'Z', 'P', 'V'};
constexpr std::uint32_t kVersion = 1;

void check_target(const TrainingSample& s) {
  double sum = 0.0;
  for (int k = 0; k < kPolicySize; ++k) {
    double t = s.target_policy[static_cast<std::size_t>(k)];
    if (t < 0.0 || (t > 0.0 && !((s.legal_mask >> k) & 1))) {
      throw GongzhuError("target policy puts mass on an illegal move");
    }
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-4) throw GongzhuError("target policy is not normalized");
}

}  // namespace

void NetConfig::validate() const {
  if (depth < 2) throw GongzhuError("network depth must be at least 2");
  if (width < 1 || skip < 1) throw GongzhuError("network width and skip must be positive");
  if (!(lambda > 0.0)) throw GongzhuError("lambda must be positive");
  if (!(value_scale > 0.0)) throw GongzhuError("value scale must be positive");
}

std::array<double, kPolicySize> masked_policy(std::span<const double, kPolicySize> logits,
                                              std::uint64_t legal_mask) {
  if (legal_mask == 0) throw GongzhuError("masked policy needs at least one legal move");
  std::array<double, kPolicySize> out{};
  double top = -INFINITY;
  for (int k = 0; k < kPolicySize; ++k) {
    if ((legal_mask >> k) & 1) top = std::max(top, logits[static_cast<std::size_t>(k)]);
  }
  double sum = 0.0;
  for (int k = 0; k < kPolicySize; ++k) {
    if ((legal_mask >> k) & 1) {
      out[static_cast<std::size_t>(k)] = std::exp(logits[static_cast<std::size_t>(k)] - top);
      sum += out[static_cast<std::size_t>(k)];
    }
  }
  for (double& p : out) p /= sum;
  return out;
}

template <typename Scalar>
PolicyValueNet<Scalar>::PolicyValueNet(const NetConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  auto make = [&](int out, int in, double gain) {
    Layer l;
    double bound = std::sqrt(gain / in);
    std::uniform_real_distribution<double> u(-bound, bound);
    l.weight = Matrix(out, in);
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = static_cast<Scalar>(u(rng));
    l.bias = Vector::Zero(out);
    return l;
  };
  layers_.push_back(make(config_.width, kInputSize, 6.0));
  for (int k = 1; k < config_.depth - 1; ++k) {
    // Layers closing a residual block start small so the skip dominates at init.
    double gain = closes_block(static_cast<std::size_t>(k)) ? 1.0 : 6.0;
    layers_.push_back(make(config_.width, config_.width, gain));
  }
  layers_.push_back(make(kOutputSize, config_.width, 1.0));
}

template <typename Scalar>
bool PolicyValueNet<Scalar>::closes_block(std::size_t layer) const {
  // Hidden layers are 1 .. depth-2, grouped into blocks of `skip`.
  if (layer == 0 || static_cast<int>(layer) >= config_.depth - 1) return false;
  return static_cast<int>(layer) % config_.skip == 0;
}

template <typename Scalar>
typename PolicyValueNet<Scalar>::Matrix PolicyValueNet<Scalar>::run(
    const Matrix& inputs, std::vector<Matrix>* activations) const {
  // activations[k] holds the post-activation output of layer k (k < depth - 1).
  Matrix h = ((layers_[0].weight * inputs).colwise() + layers_[0].bias).cwiseMax(Scalar(0));
  Matrix block_in = h;
  if (activations) activations->assign(1, h);
  for (std::size_t k = 1; k + 1 < layers_.size(); ++k) {
    Matrix z = (layers_[k].weight * h).colwise() + layers_[k].bias;
    if (closes_block(k)) {
      h = (z + block_in).cwiseMax(Scalar(0));
      block_in = h;
    } else {
      h = z.cwiseMax(Scalar(0));
    }
    if (activations) activations->push_back(h);
  }
  Matrix out = (layers_.back().weight * h).colwise() + layers_.back().bias;
  out.row(kPolicySize) *= static_cast<Scalar>(config_.value_scale);
  return out;
}

template <typename Scalar>
typename PolicyValueNet<Scalar>::Matrix PolicyValueNet<Scalar>::forward_batch(
    const Matrix& inputs) const {
  return run(inputs, nullptr);
}

template <typename Scalar>
PolicyValue PolicyValueNet<Scalar>::forward(const InputVector& input) const {
  Matrix x(kInputSize, 1);
  for (int k = 0; k < kInputSize; ++k) x(k, 0) = static_cast<Scalar>(input[static_cast<std::size_t>(k)]);
  Matrix out = run(x, nullptr);
  PolicyValue pv;
  for (int k = 0; k < kPolicySize; ++k) pv.logits[static_cast<std::size_t>(k)] = static_cast<double>(out(k, 0));
  pv.value = static_cast<double>(out(kPolicySize, 0));
  return pv;
}

template <typename Scalar>
Scalar PolicyValueNet<Scalar>::loss(std::span<const TrainingSample> batch) const {
  return loss_impl(batch, nullptr);
}

template <typename Scalar>
Scalar PolicyValueNet<Scalar>::loss_and_gradient(std::span<const TrainingSample> batch,
                                                 std::vector<Layer>& grads) const {
  return loss_impl(batch, &grads);
}

template <typename Scalar>
Scalar PolicyValueNet<Scalar>::loss_impl(std::span<const TrainingSample> batch,
                                         std::vector<Layer>* grads) const {
  if (batch.empty()) throw GongzhuError("loss needs a non-empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  Matrix x(kInputSize, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    check_target(batch[static_cast<std::size_t>(j)]);
    for (int k = 0; k < kInputSize; ++k) {
      x(k, j) = static_cast<Scalar>(batch[static_cast<std::size_t>(j)].input[static_cast<std::size_t>(k)]);
    }
  }
  std::vector<Matrix> acts;
  Matrix out = run(x, grads ? &acts : nullptr);

  // dL/dout, already divided by the batch size.
  Matrix delta = Matrix::Zero(kOutputSize, n);
  double total = 0.0;
  const double lambda = config_.lambda;
  for (Eigen::Index j = 0; j < n; ++j) {
    const TrainingSample& s = batch[static_cast<std::size_t>(j)];
    std::array<double, kPolicySize> logits;
    for (int k = 0; k < kPolicySize; ++k) logits[static_cast<std::size_t>(k)] = static_cast<double>(out(k, j));
    auto p = masked_policy(logits, s.legal_mask);
    for (int k = 0; k < kPolicySize; ++k) {
      double t = s.target_policy[static_cast<std::size_t>(k)];
      if (t > 0.0) total += t * (std::log(t) - std::log(p[static_cast<std::size_t>(k)]));
      if ((s.legal_mask >> k) & 1) delta(k, j) = static_cast<Scalar>((p[static_cast<std::size_t>(k)] - t) / n);
    }
    double diff = static_cast<double>(out(kPolicySize, j)) - s.target_value;
    total += lambda * std::abs(diff);
    double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    delta(kPolicySize, j) = static_cast<Scalar>(lambda * sign * config_.value_scale / n);
  }
  if (!grads) return static_cast<Scalar>(total / n);

  const int last = static_cast<int>(layers_.size()) - 1;
  grads->resize(layers_.size());
  (*grads)[static_cast<std::size_t>(last)].weight = delta * acts.back().transpose();
  (*grads)[static_cast<std::size_t>(last)].bias = delta.rowwise().sum();

  // Block inputs (layer 0 and every closing layer) also feed the residual add of the
  // layer `skip` further on, so their gradient picks up that layer's pre-activation term.
  std::vector<Matrix> dz(static_cast<std::size_t>(last));
  Matrix g = layers_.back().weight.transpose() * delta;
  for (int k = last - 1; k >= 0; --k) {
    const auto uk = static_cast<std::size_t>(k);
    const int next_close = k + config_.skip;
    if ((k == 0 || closes_block(uk)) && next_close <= last - 1) g += dz[static_cast<std::size_t>(next_close)];
    dz[uk] = g.cwiseProduct((acts[uk].array() > Scalar(0)).matrix().template cast<Scalar>());
    (*grads)[uk].weight = dz[uk] * (k == 0 ? x : acts[uk - 1]).transpose();
    (*grads)[uk].bias = dz[uk].rowwise().sum();
    if (k > 0) g = layers_[uk].weight.transpose() * dz[uk];
  }
  return static_cast<Scalar>(total / n);
}

template <typename Scalar>
std::size_t PolicyValueNet<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

template <typename Scalar>
Scalar& PolicyValueNet<Scalar>::parameter(std::size_t index) {
  for (Layer& l : layers_) {
    auto w = static_cast<std::size_t>(l.weight.size());
    if (index < w) return l.weight.data()[index];
    index -= w;
    auto b = static_cast<std::size_t>(l.bias.size());
    if (index < b) return l.bias.data()[index];
    index -= b;
  }
  throw GongzhuError("parameter index out of range");
}

template <typename Scalar>
void PolicyValueNet<Scalar>::check_finite() const {
  for (const Layer& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw ModelError("network weights contain NaN or infinity");
    }
  }
}

template <typename Scalar>
template <typename Other>
PolicyValueNet<Other> PolicyValueNet<Scalar>::cast() const {
  PolicyValueNet<Other> out(NetConfig{2, 1, 1, config_.lambda, config_.value_scale}, 0);
  out.config_ = config_;
  out.layers_.clear();
  for (const Layer& l : layers_) {
    out.layers_.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
  }
  return out;
}

template class PolicyValueNet<float>;
template class PolicyValueNet<double>;
template PolicyValueNet<double> PolicyValueNet<float>::cast<double>() const;
template PolicyValueNet<float> PolicyValueNet<double>::cast<float>() const;

void AdamOptimizer::step(Network& net, const std::vector<Network::Layer>& grads) {
  auto& layers = net.layers();
  if (m_.empty()) {
    for (const auto& l : layers) {
      m_.push_back({Network::Matrix::Zero(l.weight.rows(), l.weight.cols()), Network::Vector::Zero(l.bias.size())});
    }
    v_ = m_;
  }
  ++steps_;
  const float b1 = static_cast<float>(options_.beta1), b2 = static_cast<float>(options_.beta2);
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  const float lr = static_cast<float>(options_.learning_rate * std::sqrt(c2) / c1);
  const float eps = static_cast<float>(options_.epsilon * std::sqrt(c2));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.cwiseProduct(g);
    param.array() -= lr * m.array() / (v.array().sqrt() + eps);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weight, m_[k].weight, v_[k].weight, grads[k].weight);
    update(layers[k].bias, m_[k].bias, v_[k].bias, grads[k].bias);
  }
}

TrainMetrics evaluate_loss(const Network& net, std::span<const TrainingSample> batch) {
  TrainMetrics m;
  if (batch.empty()) return m;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < batch.size(); start += kChunk) {
    auto part = batch.subspan(start, std::min(kChunk, batch.size() - start));
    Network::Matrix x(kInputSize, static_cast<Eigen::Index>(part.size()));
    for (std::size_t j = 0; j < part.size(); ++j) {
      for (int k = 0; k < kInputSize; ++k) x(k, static_cast<Eigen::Index>(j)) = part[j].input[static_cast<std::size_t>(k)];
    }
    Network::Matrix out = net.forward_batch(x);
    for (std::size_t j = 0; j < part.size(); ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      std::array<double, kPolicySize> logits;
      for (int k = 0; k < kPolicySize; ++k) logits[static_cast<std::size_t>(k)] = out(k, col);
      auto p = masked_policy(logits, part[j].legal_mask);
      for (int k = 0; k < kPolicySize; ++k) {
        double t = part[j].target_policy[static_cast<std::size_t>(k)];
        if (t > 0.0) m.kl += t * (std::log(t) - std::log(p[static_cast<std::size_t>(k)]));
      }
      m.value_loss += net.config().lambda * std::abs(out(kPolicySize, col) - part[j].target_value);
    }
  }
  m.kl /= static_cast<double>(batch.size());
  m.value_loss /= static_cast<double>(batch.size());
  m.loss = m.kl + m.value_loss;
  return m;
}

TrainMetrics train_step(Network& net, AdamOptimizer& optimizer,
                        std::span<const TrainingSample> samples, int passes, int minibatch,
                        Rng& rng) {
  if (samples.empty()) throw GongzhuError("train_step needs samples");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingSample> chunk;
  std::vector<Network::Layer> grads;
  int updates = 0;
  for (int pass = 0; pass < passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(minibatch)) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(minibatch));
      chunk.clear();
      for (std::size_t i = start; i < end; ++i) chunk.push_back(samples[order[i]]);
      net.loss_and_gradient(chunk, grads);
      optimizer.step(net, grads);
      ++updates;
    }
  }
  net.check_finite();
  TrainMetrics m = evaluate_loss(net, samples);
  m.updates = updates;
  return m;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ModelError("checkpoint truncated");
  return value;
}

}  // namespace

void save_network(const Network& net, std::ostream& out) {
  static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");
  out.write(kMagic, 4);
  write_pod<std::uint32_t>(out, kVersion);
  const NetConfig& c = net.config();
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(c.depth));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(c.width));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(c.skip));
  write_pod<double>(out, c.lambda);
  write_pod<double>(out, c.value_scale);
  for (const auto& l : net.layers()) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.rows()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index k = 0; k < l.weight.cols(); ++k) write_pod<float>(out, l.weight(r, k));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) write_pod<float>(out, l.bias(r));
  }
  if (!out) throw ModelError("failed to write checkpoint");
}

Network load_network(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ModelError("not a network checkpoint");
  if (read_pod<std::uint32_t>(in) != kVersion) throw ModelError("unsupported checkpoint version");
  NetConfig c;
  c.depth = static_cast<int>(read_pod<std::uint32_t>(in));
  c.width = static_cast<int>(read_pod<std::uint32_t>(in));
  c.skip = static_cast<int>(read_pod<std::uint32_t>(in));
  c.lambda = read_pod<double>(in);
  c.value_scale = read_pod<double>(in);
  if (c.depth < 2 || c.depth > 1024 || c.width < 1 || c.width > 65536 || c.skip < 1) {
    throw ModelError("checkpoint header has implausible dimensions");
  }
  Network net(c, 0);
  for (auto& l : net.layers()) {
    auto rows = read_pod<std::uint32_t>(in);
    auto cols = read_pod<std::uint32_t>(in);
    if (rows != l.weight.rows() || cols != l.weight.cols()) {
      throw ModelError("checkpoint layer dimensions do not match its header");
    }
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index k = 0; k < l.weight.cols(); ++k) l.weight(r, k) = read_pod<float>(in);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = read_pod<float>(in);
  }
  net.check_finite();
  return net;
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot open " + path + " for writing");
  save_network(net, out);
}

Network load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path);
  return load_network(in);
}

}  // namespace gongzhu
