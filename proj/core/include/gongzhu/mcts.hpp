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
#include <memory>
#include <span>
#include <vector>

#include "gongzhu/game_state.hpp"
#include "gongzhu/network.hpp"

namespace gongzhu {

// Leaf evaluator for perfect-information search. Values are final team differentials
// (team 0 points minus team 1 points).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual double value(const GameState& state) const = 0;
};

// Exact score for finished games, points already captured otherwise.
class PileEvaluator final : public Evaluator {
 public:
  double value(const GameState& state) const override;
};

// Value head of a network snapshot, read from the mover's exact-mode encoding.
class NetworkEvaluator final : public Evaluator {
 public:
  explicit NetworkEvaluator(std::shared_ptr<const Network> net) : net_(std::move(net)) {}
  double value(const GameState& state) const override;
  const Network& network() const { return *net_; }

 private:
  std::shared_ptr<const Network> net_;
};

struct SearchConfig {
  double exploration = 30.0;
  int base_simulations = 0;    // simulations = base + per_legal * |legal|
  int per_legal = 2;

  static SearchConfig training() { return {30.0, 0, 2}; }
  static SearchConfig evaluation() { return {30.0, 10, 2}; }
  int simulations(int legal) const { return base_simulations + per_legal * legal; }
};

struct ChildStats {
  Card card = Card::from_index(0);
  int visits = 0;
  double mean = 0.0;  // team differential
};

struct SearchResult {
  std::array<double, kNumCards> policy{};  // visit distribution by card index
  std::vector<ChildStats> children;         // ascending card index
  double root_value = 0.0;                  // team differential
  int simulations = 0;
  PlayerId mover = 0;

  // Root value and child means from the mover's team's side.
  double mover_value() const { return team_of(mover) == 0 ? root_value : -root_value; }
  double mover_mean(const ChildStats& c) const { return team_of(mover) == 0 ? c.mean : -c.mean; }
};

// UCB1 score of a visited child, `mean` taken from the parent mover's side.
double ucb_score(double mean, int visits, int parent_visits, double exploration);

// Index of the child to descend into: unvisited children first (lowest index), then the
// UCB argmax with ties to the lowest index. Throws GongzhuError when empty.
std::size_t select_child(std::span<const ChildStats> children, int parent_visits, double exploration);

// UCB tree search from a perfect-information state; `simulations` overrides the
// config's budget when positive. Throws TerminalStateError on a finished state.
SearchResult search(const GameState& root, const Evaluator& evaluator, const SearchConfig& config,
                    int simulations = 0);

// Card drawn from the visit distribution: argmax visits at temperature 0 (lowest index
// on ties), otherwise proportional to visits^(1/temperature).
Card sample_from_visits(const SearchResult& result, double temperature, Rng& rng);

Card mcts_play(const GameState& state, const Evaluator& evaluator, const SearchConfig& config,
               double temperature, Rng& rng);

}  // namespace gongzhu
