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
#include <span>
#include <utility>
#include <vector>

#include "gongzhu/player_view.hpp"

namespace gongzhu {

// Suits each player is known to be void in, from failures to follow suit.
struct VoidConstraints {
  std::array<std::array<bool, kNumSuits>, kNumPlayers> forbidden{};

  bool forbids(PlayerId p, Suit s) const { return forbidden[p][static_cast<int>(s)]; }
  bool operator==(const VoidConstraints&) const = default;
};

VoidConstraints void_constraints(std::span<const PlayEvent> history);

// One hypothesis for the hidden hands: every unseen card placed with one of the
// observer's three opponents. hands[observer] is the observer's own hand.
struct Scenario {
  PlayerId observer = 0;
  std::array<CardSet, kNumPlayers> hands{};
};

using KeyCardAssignment = std::vector<std::pair<Card, PlayerId>>;

// Exact uniform sampler over hidden-hand assignments compatible with a view: hand sizes
// and void constraints are respected, optionally with some cards pinned to players.
// Counting is a dynamic program over suits, so draws are exact (no rejection).
class ScenarioSampler {
 public:
  explicit ScenarioSampler(const PlayerView& view);

  const PlayerView& view() const { return view_; }
  const VoidConstraints& constraints() const { return constraints_; }
  std::span<const PlayerId, 3> others() const { return others_; }

  // Number of compatible assignments given the pinned cards (0 if infeasible).
  double count(const KeyCardAssignment& fixed = {}) const;

  // Throws InfeasibleError when no compatible assignment exists.
  Scenario sample(Rng& rng, const KeyCardAssignment& fixed = {}) const;
  // n independent draws sharing one counting pass.
  std::vector<Scenario> sample_n(Rng& rng, int n, const KeyCardAssignment& fixed = {}) const;

 private:
  struct Problem;
  bool build(const KeyCardAssignment& fixed, Problem& out) const;
  Scenario draw(const Problem& pr, Rng& rng) const;

  PlayerView view_;
  VoidConstraints constraints_;
  std::array<PlayerId, 3> others_{};
};

// Convenience wrapper: one uniform draw given the view.
Scenario sample_scenario(const PlayerView& view, Rng& rng);

// Full-information state for a scenario: the observer's view with hidden hands filled in.
GameState scenario_state(const PlayerView& view, const Scenario& scenario);

}  // namespace gongzhu
