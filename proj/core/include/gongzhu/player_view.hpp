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

#include "gongzhu/game_state.hpp"

namespace gongzhu {

// What one seat legitimately knows: its own remaining hand plus the public history.
class PlayerView {
 public:
  PlayerView(const GameState& state, PlayerId seat);
  PlayerView(PlayerId seat, CardSet hand, std::span<const PlayEvent> history, PlayerId first_leader);

  PlayerId seat() const { return seat_; }
  const CardSet& hand() const { return hand_; }
  std::span<const PlayEvent> history() const { return {events_.data(), num_played_}; }
  std::span<const PlayEvent> current_trick() const;
  PlayerId first_leader() const { return first_leader_; }
  PlayerId to_play() const { return to_play_; }
  int num_played() const { return num_played_; }

  CardSet legal_moves() const { return legal_moves_for(hand_, current_trick()); }
  CardSet played_cards() const { return played_; }
  // Cards neither in this hand nor played yet: the other three hands combined.
  CardSet unseen() const { return CardSet::full() - hand_ - played_; }
  int hand_size(PlayerId p) const { return kHandSize - played_by_[p]; }
  const CardSet& pile(PlayerId p) const { return piles_[p]; }
  const std::array<CardSet, kNumPlayers>& piles() const { return piles_; }
  // Cards each player has already played, in any order.
  const std::array<CardSet, kNumPlayers>& played_by() const { return played_sets_; }

 private:
  void rebuild();

  PlayerId seat_;
  CardSet hand_;
  std::array<PlayEvent, kNumCards> events_{};
  std::size_t num_played_ = 0;
  PlayerId first_leader_;
  PlayerId to_play_ = 0;
  CardSet played_;
  std::array<int, kNumPlayers> played_by_{};
  std::array<CardSet, kNumPlayers> played_sets_{};
  std::array<CardSet, kNumPlayers> piles_{};
};

}  // namespace gongzhu
