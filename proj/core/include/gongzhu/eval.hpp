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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gongzhu/agents.hpp"

namespace gongzhu {

// Deterministic 64-bit mixing of a base seed with stream identifiers (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Plays `start` to the end. Each seat draws from its own generator seeded by seat_seeds.
GameState play_game(const std::array<const Agent*, kNumPlayers>& seats, GameState start,
                    const std::array<std::uint64_t, kNumPlayers>& seat_seeds);

struct EvalReport {
  int deals = 0;
  int games = 0;
  double wpg = 0.0;       // mean per-deal observation
  double stderr_ = 0.0;   // standard error of the mean
  double win_rate = 0.0;  // per game, from team A's side
  double draw_rate = 0.0;
  double loss_rate = 0.0;
  // One entry per deal: the team differential halved, averaged over the deal's games.
  std::vector<double> observations;

  double z() const { return stderr_ > 0.0 ? wpg / stderr_ : 0.0; }
};

// Team-level outcome of one game as seen from team A.
struct GameResult {
  int deal = 0;
  int team_a_points = 0;
  int team_b_points = 0;
};

// Reduction shared by match() and the arena statistics: groups games by deal, halves each
// differential and averages within a deal.
EvalReport summarize(std::span<const GameResult> games);

// Team A sits at seats 0 and 2. With `paired`, each deal is replayed with teams swapped
// over the same cards, leader and per-seat generators.
EvalReport match(const Agent& team_a, const Agent& team_b, int deals, std::uint64_t seed,
                 bool paired = true, int threads = 1);

// Antisymmetric matrix of average winning scores: at(i, j) = -at(j, i), zero diagonal.
class PairwiseScore {
 public:
  explicit PairwiseScore(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  // Sets at(i, j) = value and at(j, i) = -value.
  void set(std::size_t i, std::size_t j, double value);

 private:
  std::size_t n_;
  std::vector<double> data_;
};

struct CombatResult {
  std::vector<std::string> names;
  PairwiseScore scores{0};
  // reports[i][j] for i < j (row agent as team A).
  std::vector<std::vector<EvalReport>> reports;
};

CombatResult combat_matrix(std::span<const Agent* const> agents, int deals, std::uint64_t seed,
                           int threads = 1);

// Intransitivity in [0, 1]: 0 when scores derive from a rating, 1 for rock-paper-scissors.
// Returns 0 when every triple is exactly transitive.
double epsilon(const PairwiseScore& xi);

struct EpsilonEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// epsilon of the measured matrix with a bootstrap standard error obtained by resampling
// each pair's per-deal observations.
EpsilonEstimate epsilon_bootstrap(const CombatResult& combat, int resamples, std::uint64_t seed);

}  // namespace gongzhu
