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

#include "gongzhu/encoding.hpp"

namespace gongzhu {
namespace {

int relative(PlayerId seat, PlayerId p) { return (p - seat + kNumPlayers) % kNumPlayers; }

void encode_trick_and_piles(InputVector& out, PlayerId seat, std::span<const PlayEvent> trick,
                            const std::array<CardSet, kNumPlayers>& piles) {
  for (std::size_t j = 0; j < trick.size(); ++j) {
    int base = kTrickOffset + static_cast<int>(j) * kTrickSlot + trick[j].card.index();
    out[base] = out[base + 1] = out[base + 2] = 1.0f;
  }
  for (PlayerId p = 0; p < kNumPlayers; ++p) {
    int base = kPointsOffset + relative(seat, p) * kNumPointCards;
    for (Card c : piles[p] & kPointCards) out[base + point_card_slot(c)] = 1.0f;
  }
}

void encode_unseen(InputVector& out, CardSet unseen) {
  for (Card c : unseen) {
    for (int r = 1; r < kNumPlayers; ++r) out[r * kHandBlock + c.index()] = 1.0f / 3.0f;
  }
}

}  // namespace

InputVector encode(const GameState& state, PlayerId seat, EncodingMode mode) {
  InputVector out{};
  if (mode == EncodingMode::kExact) {
    for (PlayerId p = 0; p < kNumPlayers; ++p) {
      int base = relative(seat, p) * kHandBlock;
      for (Card c : state.hand(p)) out[base + c.index()] = 1.0f;
    }
  } else {
    for (Card c : state.hand(seat)) out[c.index()] = 1.0f;
    encode_unseen(out, CardSet::full() - state.hand(seat) - state.played_cards());
  }
  encode_trick_and_piles(out, seat, state.current_trick(), state.piles());
  return out;
}

InputVector encode(const PlayerView& view) {
  InputVector out{};
  for (Card c : view.hand()) out[c.index()] = 1.0f;
  encode_unseen(out, view.unseen());
  encode_trick_and_piles(out, view.seat(), view.current_trick(), view.piles());
  return out;
}

InputVector encode_averaged(PlayerId seat, CardSet hand, std::span<const PlayEvent> history,
                            PlayerId first_leader) {
  return encode(PlayerView(seat, hand, history, first_leader));
}

std::array<CardSet, kNumPlayers> decode_hands(const InputVector& input, PlayerId seat) {
  std::array<CardSet, kNumPlayers> out;
  for (int r = 0; r < kNumPlayers; ++r) {
    for (int k = 0; k < kNumCards; ++k) {
      if (input[r * kHandBlock + k] == 1.0f) out[(seat + r) % kNumPlayers].insert(Card::from_index(k));
    }
  }
  return out;
}

}  // namespace gongzhu
