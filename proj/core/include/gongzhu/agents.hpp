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
#include <string>
#include <string_view>

#include "gongzhu/player_view.hpp"

namespace gongzhu {

// A strategy: maps what a seat knows to a legal card. Implementations keep no state
// between calls, so one instance may serve several seats and games concurrently.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual Card choose(const PlayerView& view, Rng& rng) const = 0;
};

// Uniform over the legal moves.
class RandomAgent final : public Agent {
 public:
  std::string name() const override { return "random"; }
  Card choose(const PlayerView& view, Rng& rng) const override;
};

// Fixed rule cascade, deterministic given the view:
//  lead  - with SQ out and no spade honour in hand, lead the lowest spade; otherwise lead
//          the lowest card of the longest suit, avoiding spades while holding SQ/SK/SA
//          and hearts while anything else remains.
//  follow- dump SQ onto an opponent's SK/SA; last seat on a clean trick wins it with the
//          highest card (never SQ); otherwise play the highest card that ducks the
//          current winner, or the highest non-SQ card when forced to win.
//  void  - partner winning as last seat: give DJ or the highest safe card; otherwise dump
//          SQ, then the highest heart, then SA/SK while SQ is out, then the highest card
//          of the shortest suit.
class IfAgent final : public Agent {
 public:
  std::string name() const override { return "if"; }
  Card choose(const PlayerView& view, Rng& rng) const override;
};

// Heuristic worth of holding a card that is not itself a point card. Negative entries
// are liabilities (high spades attract SQ, high clubs attract C10), positive are assets
// (high diamonds capture DJ).
class CardValueTable {
 public:
  CardValueTable();
  int at(Card c) const { return values_[static_cast<std::size_t>(c.index())]; }
  void set(Card c, int value) { values_[static_cast<std::size_t>(c.index())] = value; }

 private:
  std::array<int, kNumCards> values_{};
};

const CardValueTable& greed_card_values();

struct GreedConfig {
  int samples = 32;
};

// Scores each legal card by the expected point swing of the current trick (hidden hands
// sampled uniformly, the rest of the trick resolved by team minimax) plus the released
// holding value from CardValueTable; argmax with lowest-index tie-break.
class GreedAgent final : public Agent {
 public:
  explicit GreedAgent(GreedConfig config = {}) : config_(config) {}
  std::string name() const override { return "greed"; }
  Card choose(const PlayerView& view, Rng& rng) const override;

  // Expected score of every legal card (index by card index; illegal entries are NaN).
  std::array<double, kNumCards> evaluate(const PlayerView& view, Rng& rng) const;

 private:
  GreedConfig config_;
};

// "random", "if" or "greed". Throws GongzhuError on an unknown name.
std::unique_ptr<Agent> make_baseline_agent(std::string_view name);

}  // namespace gongzhu
