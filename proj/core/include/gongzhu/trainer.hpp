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

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gongzhu/mcts.hpp"
#include "gongzhu/network.hpp"

namespace gongzhu {

struct TrainRunConfig {
  NetConfig net;
  int games_per_batch = 64;
  int replay_batches = 3;     // current batch plus the two before it
  int passes = 3;             // Adam epochs over the replay window per batch
  int minibatch = 256;
  AdamOptimizer::Options adam;
  SearchConfig search = SearchConfig::training();
  int explore_tricks = 8;     // visit-proportional sampling in these tricks, argmax after
  int checkpoint_every = 16;
  int keep_checkpoints = 8;
  double divergence_factor = 10.0;
  std::uint64_t seed = 1;
  int threads = 1;
  // Progress evaluation against the baselines every `eval_every` batches (0 disables).
  int eval_every = 0;
  int eval_deals = 64;
  std::string eval_agent = "scrofa-us";

  void validate() const;
};

// The last few batches of self-play samples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity = 3);
  void push(std::vector<TrainingSample> batch);
  std::vector<TrainingSample> samples() const;
  std::size_t size() const;
  int batches() const { return static_cast<int>(batches_.size()); }
  int capacity() const { return capacity_; }
  bool empty() const { return batches_.empty(); }

 private:
  int capacity_;
  std::deque<std::vector<TrainingSample>> batches_;
};

struct SelfPlayGame {
  std::vector<TrainingSample> samples;  // one per play, in order
  std::vector<PlayEvent> history;
  Score score;
};

// Double-dummy self-play: every seat searches the true state. Each sample's value target
// is the final team differential from its mover's side.
SelfPlayGame selfplay_game(const Network& net, std::uint64_t seed, const TrainRunConfig& config);

// Self-play for one batch, games seeded from (seed, batch, game) so the result does not
// depend on the thread count.
std::vector<SelfPlayGame> selfplay_batch(const Network& net, int batch, const TrainRunConfig& config);

struct ProgressPoint {
  int batch = 0;
  double wpg_random = 0.0, stderr_random = 0.0;
  double wpg_greed = 0.0, stderr_greed = 0.0;
};

// Paired-deal WPG of `agent` (built on `net`) against Random and Greed.
ProgressPoint progress_eval(std::shared_ptr<const Network> net, const std::string& agent, int deals,
                            std::uint64_t seed, int threads = 1);

struct BatchReport {
  int batch = 0;  // 1-based
  TrainMetrics metrics;
  std::size_t window_samples = 0;
  std::optional<ProgressPoint> progress;
  double seconds = 0.0;
};

// Owns the network, optimizer and replay window of one training run. With an output
// directory it writes metrics.csv, progress.log and checkpoints there.
class Trainer {
 public:
  explicit Trainer(TrainRunConfig config, std::optional<std::filesystem::path> out = std::nullopt);
  Trainer(TrainRunConfig config, Network initial, std::optional<std::filesystem::path> out = std::nullopt);

  // Self-play one batch, push it and train on the window. Throws TrainingDivergedError
  // when the loss blows past divergence_factor times the first batch's loss.
  BatchReport step();
  // Runs until `batches` steps are done or the deadline passes.
  std::vector<BatchReport> run(int batches, std::optional<std::chrono::steady_clock::time_point> deadline = {},
                               const std::function<void(const BatchReport&)>& on_batch = {});

  // Trains on the current window only (no self-play). Throws GongzhuError if it is empty.
  TrainMetrics train_epoch();

  const Network& network() const { return net_; }
  std::shared_ptr<const Network> snapshot() const { return std::make_shared<const Network>(net_); }
  ReplayBuffer& buffer() { return buffer_; }
  int batches_done() const { return batch_; }
  const TrainRunConfig& config() const { return config_; }

 private:
  void write_checkpoint();

  TrainRunConfig config_;
  std::optional<std::filesystem::path> out_;
  Network net_;
  AdamOptimizer optimizer_;
  ReplayBuffer buffer_;
  Rng rng_;
  int batch_ = 0;
  std::optional<double> initial_loss_;
};

inline constexpr const char* kMetricsHeader = "batch,loss_kl,loss_v,wpg_random,wpg_greed";

}  // namespace gongzhu
