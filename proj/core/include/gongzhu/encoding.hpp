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
#include "gongzhu/player_view.hpp"

namespace gongzhu {

// Network input layout, relative to the seat being encoded (block r = seat + r, clockwise):
//   [0, 208)    four 52-wide hand blocks
//   [208, 370)  three 54-wide slots for the cards already in the current trick, in play
//               order; a card with index k lights positions k, k+1, k+2 of its slot
//   [370, 434)  four 16-wide blocks of captured point cards
inline constexpr int kHandBlock = kNumCards;
inline constexpr int kTrickSlot = kNumCards + 2;
inline constexpr int kTrickOffset = kHandBlock * kNumPlayers;
inline constexpr int kPointsOffset = kTrickOffset + kTrickSlot * 3;
inline constexpr int kInputSize = kPointsOffset + kNumPointCards * kNumPlayers;
static_assert(kInputSize == 434);

using InputVector = std::array<float, kInputSize>;

enum class EncodingMode {
  kExact,     // every hand one-hot (double dummy)
  kAveraged,  // own hand one-hot, each unseen card 1/3 in each of the other three blocks
};

// Encodes from the perspective of `seat` (normally the player to move).
InputVector encode(const GameState& state, PlayerId seat, EncodingMode mode = EncodingMode::kExact);

// Averaged-mode encoding of what a seat actually knows.
InputVector encode(const PlayerView& view);

// Averaged-mode encoding for a seat holding `hand` at the point where `history` ends.
// Unseen cards are everything neither in `hand` nor in `history`.
InputVector encode_averaged(PlayerId seat, CardSet hand, std::span<const PlayEvent> history,
                            PlayerId first_leader);

// Recovers the four hand blocks of an exact-mode encoding as absolute seats.
std::array<CardSet, kNumPlayers> decode_hands(const InputVector& input, PlayerId seat);

}  // namespace gongzhu
