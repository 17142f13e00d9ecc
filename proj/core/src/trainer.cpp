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

#include "gongzhu/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "gongzhu/belief.hpp"
#include "gongzhu/errors.hpp"
#include "gongzhu/eval.hpp"

namespace gongzhu {

void TrainRunConfig::validate() const {
  net.validate();
  if (games_per_batch < 1 || replay_batches < 1 || passes < 1 || minibatch < 1) {
    throw GongzhuError("training sizes must be positive");
  }
  if (checkpoint_every < 1 || keep_checkpoints < 1) throw GongzhuError("checkpoint cadence must be positive");
  if (threads < 1 || eval_every < 0 || eval_deals < 1) throw GongzhuError("bad evaluation settings");
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw GongzhuError("replay capacity must be positive");
}

void ReplayBuffer::push(std::vector<TrainingSample> batch) {
  batches_.push_back(std::move(batch));
  while (static_cast<int>(batches_.size()) > capacity_) batches_.pop_front();
}

std::vector<TrainingSample> ReplayBuffer::samples() const {
  std::vector<TrainingSample> out;
  out.reserve(size());
  for (const auto& b : batches_) out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::size_t n = 0;
  for (const auto& b : batches_) n += b.size();
  return n;
}

SelfPlayGame selfplay_game(const Network& net, std::uint64_t seed, const TrainRunConfig& config) {
  // The evaluator only borrows the network for the duration of the game.
  std::shared_ptr<const Network> view(&net, [](const Network*) {});
  NetworkEvaluator evaluator(view);
  Rng rng(derive_seed(seed, 0, 1));
  GameState state = deal(derive_seed(seed, 0, 0));
  SelfPlayGame out;
  std::vector<PlayerId> movers;
  while (!state.finished()) {
    PlayerId mover = state.to_play();
    TrainingSample s;
    s.input = encode(state, mover);
    CardSet legal = legal_moves(state);
    for (Card c : legal) s.legal_mask |= std::uint64_t{1} << c.index();
    Card choice = legal.lowest();
    if (legal.size() == 1) {
      s.target_policy[static_cast<std::size_t>(choice.index())] = 1.0f;
    } else {
      SearchResult r = search(state, evaluator, config.search);
      for (int k = 0; k < kNumCards; ++k) {
        s.target_policy[static_cast<std::size_t>(k)] = static_cast<float>(r.policy[static_cast<std::size_t>(k)]);
      }
      double temperature = state.tricks_completed() < config.explore_tricks ? 1.0 : 0.0;
      choice = sample_from_visits(r, temperature, rng);
    }
    out.samples.push_back(s);
    movers.push_back(mover);
    state = state.play(choice);
  }
  out.score = score(state.piles());
  out.history.assign(state.history().begin(), state.history().end());
  const int diff = out.score.team_differential();
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i].target_value = static_cast<float>(team_of(movers[i]) == 0 ? diff : -diff);
  }
  return out;
}

std::vector<SelfPlayGame> selfplay_batch(const Network& net, int batch, const TrainRunConfig& config) {
  std::vector<SelfPlayGame> games(static_cast<std::size_t>(config.games_per_batch));
  auto run = [&](int g) {
    games[static_cast<std::size_t>(g)] =
        selfplay_game(net, derive_seed(config.seed, static_cast<std::uint64_t>(batch), static_cast<std::uint64_t>(g)), config);
  };
  if (config.threads <= 1) {
    for (int g = 0; g < config.games_per_batch; ++g) run(g);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < config.threads; ++t) {
      pool.emplace_back([&] {
        for (int g = next++; g < config.games_per_batch; g = next++) run(g);
      });
    }
    for (auto& th : pool) th.join();
  }
  return games;
}

ProgressPoint progress_eval(std::shared_ptr<const Network> net, const std::string& agent, int deals,
                            std::uint64_t seed, int threads) {
  auto player = make_agent(agent, net);
  RandomAgent random;
  GreedAgent greed;
  ProgressPoint p;
  EvalReport r = match(*player, random, deals, derive_seed(seed, 1, 0), true, threads);
  p.wpg_random = r.wpg;
  p.stderr_random = r.stderr_;
  EvalReport g = match(*player, greed, deals, derive_seed(seed, 2, 0), true, threads);
  p.wpg_greed = g.wpg;
  p.stderr_greed = g.stderr_;
  return p;
}

Trainer::Trainer(TrainRunConfig config, std::optional<std::filesystem::path> out)
    : Trainer(config, Network(config.net, derive_seed(config.seed, 0, 7)), std::move(out)) {}

Trainer::Trainer(TrainRunConfig config, Network initial, std::optional<std::filesystem::path> out)
    : config_(std::move(config)),
      out_(std::move(out)),
      net_(std::move(initial)),
      optimizer_(config_.adam),
      buffer_(config_.replay_batches),
      rng_(derive_seed(config_.seed, 0, 8)) {
  config_.validate();
  if (out_) {
    std::filesystem::create_directories(*out_ / "checkpoints");
    std::ofstream csv(*out_ / "metrics.csv", std::ios::trunc);
    csv << kMetricsHeader << '\n';
  }
}

TrainMetrics Trainer::train_epoch() {
  if (buffer_.empty()) throw GongzhuError("cannot train on an empty replay buffer");
  auto samples = buffer_.samples();
  TrainMetrics m;
  try {
    m = train_step(net_, optimizer_, samples, config_.passes, config_.minibatch, rng_);
  } catch (const ModelError& e) {
    throw TrainingDivergedError(std::string("training produced non-finite weights: ") + e.what());
  }
  if (!std::isfinite(m.loss)) throw TrainingDivergedError("training loss is not finite");
  if (!initial_loss_) {
    initial_loss_ = m.loss;
  } else if (m.loss > config_.divergence_factor * *initial_loss_) {
    throw TrainingDivergedError("training loss exceeded " + std::to_string(config_.divergence_factor) +
                                "x its initial value");
  }
  return m;
}

BatchReport Trainer::step() {
  auto start = std::chrono::steady_clock::now();
  std::vector<SelfPlayGame> games = selfplay_batch(net_, batch_, config_);
  std::vector<TrainingSample> batch;
  batch.reserve(games.size() * kNumCards);
  for (auto& g : games) batch.insert(batch.end(), g.samples.begin(), g.samples.end());
  buffer_.push(std::move(batch));

  BatchReport report;
  report.metrics = train_epoch();
  report.window_samples = buffer_.size();
  report.batch = ++batch_;

  if (config_.eval_every > 0 && batch_ % config_.eval_every == 0) {
    report.progress = progress_eval(snapshot(), config_.eval_agent, config_.eval_deals,
                                    derive_seed(config_.seed, static_cast<std::uint64_t>(batch_), 99), config_.threads);
    report.progress->batch = batch_;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (out_) {
    std::ofstream csv(*out_ / "metrics.csv", std::ios::app);
    char line[256];
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,", report.batch, report.metrics.kl, report.metrics.value_loss);
    csv << line;
    if (report.progress) {
      std::snprintf(line, sizeof line, "%.3f,%.3f", report.progress->wpg_random, report.progress->wpg_greed);
      csv << line;
    } else {
      csv << ',';
    }
    csv << '\n';
    if (report.progress) {
      std::ofstream log(*out_ / "progress.log", std::ios::app);
      std::snprintf(line, sizeof line, "batch=%d wpg_random=%.3f stderr_random=%.3f wpg_greed=%.3f stderr_greed=%.3f",
                    report.batch, report.progress->wpg_random, report.progress->stderr_random,
                    report.progress->wpg_greed, report.progress->stderr_greed);
      log << line << '\n';
    }
    if (batch_ % config_.checkpoint_every == 0) write_checkpoint();
    save_network(net_, (*out_ / "latest.gzpv").string());
  }
  return report;
}

std::vector<BatchReport> Trainer::run(int batches, std::optional<std::chrono::steady_clock::time_point> deadline,
                                      const std::function<void(const BatchReport&)>& on_batch) {
  std::vector<BatchReport> out;
  for (int i = 0; i < batches; ++i) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) break;
    out.push_back(step());
    if (on_batch) on_batch(out.back());
  }
  return out;
}

void Trainer::write_checkpoint() {
  char name[64];
  std::snprintf(name, sizeof name, "net_%06d.gzpv", batch_);
  auto dir = *out_ / "checkpoints";
  save_network(net_, (dir / name).string());
  std::vector<std::filesystem::path> existing;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto file = entry.path().filename().string();
    if (file.rfind("net_", 0) == 0 && entry.path().extension() == ".gzpv") existing.push_back(entry.path());
  }
  std::sort(existing.begin(), existing.end());
  while (static_cast<int>(existing.size()) > config_.keep_checkpoints) {
    std::filesystem::remove(existing.front());
    existing.erase(existing.begin());
  }
}

}  // namespace gongzhu
