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

#include "gongzhu/player_view.hpp"

#include <algorithm>

#include "gongzhu/errors.hpp"

namespace gongzhu {

PlayerView::PlayerView(const GameState& state, PlayerId seat)
    : PlayerView(seat, state.hand(seat), state.history(), state.first_leader()) {}

PlayerView::PlayerView(PlayerId seat, CardSet hand, std::span<const PlayEvent> history,
                       PlayerId first_leader)
    : seat_(seat), hand_(hand), num_played_(history.size()), first_leader_(first_leader) {
  if (history.size() > kNumCards) throw GongzhuError("history longer than a game");
  std::copy(history.begin(), history.end(), events_.begin());
  rebuild();
}

std::span<const PlayEvent> PlayerView::current_trick() const {
  std::size_t in_trick = num_played_ % kNumPlayers;
  return {events_.data() + num_played_ - in_trick, in_trick};
}

void PlayerView::rebuild() {
  PlayerId leader = first_leader_;
  for (std::size_t t = 0; t < num_played_; ++t) {
    const PlayEvent& e = events_[t];
    played_.insert(e.card);
    ++played_by_[e.player];
    played_sets_[e.player].insert(e.card);
    if (t % kNumPlayers == kNumPlayers - 1) {
      std::span<const PlayEvent> trick(events_.data() + t + 1 - kNumPlayers, kNumPlayers);
      leader = resolve_trick(trick);
      for (const PlayEvent& x : trick) {
        if (kPointCards.contains(x.card)) piles_[leader].insert(x.card);
      }
    }
  }
  to_play_ = num_played_ % kNumPlayers == 0
                 ? leader
                 : next_player(events_[num_played_ - 1].player);
}

}  // namespace gongzhu
