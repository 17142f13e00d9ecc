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
#include <random>
#include <span>

#include "gongzhu/card.hpp"

namespace gongzhu {

using Rng = std::mt19937_64;

struct PlayEvent {
  PlayerId player = 0;
  Card card = Card::from_index(0);
  bool operator==(const PlayEvent&) const = default;
};

struct Score {
  std::array<int, kNumPlayers> per_player{};
  std::array<int, 2> per_team{};

  // Team 0 minus team 1.
  int team_differential() const { return per_team[0] - per_team[1]; }
  bool operator==(const Score&) const = default;
};

// Full four-hand state of one deal. Value type; play() returns a new state.
class GameState {
 public:
  // Validates that the hands partition the deck into four 13-card hands.
  static GameState from_hands(const std::array<CardSet, kNumPlayers>& hands, PlayerId leader);

  // Rebuilds the state reached by replaying `history` from `initial_hands`.
  // Throws IllegalMoveError if any event breaks the rules under those hands.
  static GameState replay(const std::array<CardSet, kNumPlayers>& initial_hands, PlayerId leader,
                          std::span<const PlayEvent> history);

  const CardSet& hand(PlayerId p) const { return hands_[p]; }
  const std::array<CardSet, kNumPlayers>& hands() const { return hands_; }
  // Point cards captured by each player so far.
  const CardSet& pile(PlayerId p) const { return piles_[p]; }
  const std::array<CardSet, kNumPlayers>& piles() const { return piles_; }

  std::span<const PlayEvent> history() const { return {events_.data(), num_played_}; }
  std::span<const PlayEvent> current_trick() const;
  // Most recently completed trick, empty before the first one completes.
  std::span<const PlayEvent> last_trick() const;

  int num_played() const { return num_played_; }
  int tricks_completed() const { return num_played_ / kNumPlayers; }
  bool finished() const { return num_played_ == kNumCards; }

  PlayerId first_leader() const { return first_leader_; }
  PlayerId trick_leader() const { return trick_leader_; }
  PlayerId to_play() const { return to_play_; }

  std::array<CardSet, kNumPlayers> initial_hands() const;
  CardSet played_cards() const;

  // Throws IllegalMoveError naming the violated rule.
  GameState play(Card card) const;

  bool operator==(const GameState& o) const;

 private:
  GameState() = default;
  void apply(Card card);

  std::array<CardSet, kNumPlayers> hands_{};
  std::array<CardSet, kNumPlayers> piles_{};
  std::array<PlayEvent, kNumCards> events_{};
  std::uint8_t num_played_ = 0;
  PlayerId first_leader_ = 0;
  PlayerId trick_leader_ = 0;
  PlayerId to_play_ = 0;
};

// Shuffles with the seed and picks the first leader uniformly from it.
GameState deal(std::uint64_t seed);

// All cards of the led suit when following and holding it, otherwise the whole hand.
// Throws TerminalStateError on a finished game.
CardSet legal_moves(const GameState& state);

// Legality for an arbitrary hand facing a (possibly empty) partial trick.
CardSet legal_moves_for(CardSet hand, std::span<const PlayEvent> trick);

// Winner of a complete trick: highest rank in the led suit. Throws InvalidTrickError
// on a malformed trick (wrong size, repeated card or player, out-of-turn order).
PlayerId resolve_trick(std::span<const PlayEvent> trick);

// Game points per player and per team. Throws InconsistencyError if a point card
// appears in more than one pile. Non-point cards are ignored.
Score score(const std::array<CardSet, kNumPlayers>& piles);

// Points one player's pile is worth on its own.
int pile_points(CardSet pile);

}  // namespace gongzhu
