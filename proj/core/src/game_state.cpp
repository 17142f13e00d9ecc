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

#include "gongzhu/game_state.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gongzhu/errors.hpp"

namespace gongzhu {

GameState GameState::from_hands(const std::array<CardSet, kNumPlayers>& hands, PlayerId leader) {
  if (leader < 0 || leader >= kNumPlayers) throw GongzhuError("leader out of range");
  CardSet seen;
  for (PlayerId p = 0; p < kNumPlayers; ++p) {
    if (hands[p].size() != kHandSize) {
      throw GongzhuError("player " + std::to_string(p) + " holds " +
                         std::to_string(hands[p].size()) + " cards, expected 13");
    }
    if (!(seen & hands[p]).empty()) throw GongzhuError("card dealt to two players");
    seen |= hands[p];
  }
  GameState s;
  s.hands_ = hands;
  s.first_leader_ = s.trick_leader_ = s.to_play_ = leader;
  return s;
}

GameState GameState::replay(const std::array<CardSet, kNumPlayers>& initial_hands,
                            PlayerId leader, std::span<const PlayEvent> history) {
  GameState s = from_hands(initial_hands, leader);
  for (const PlayEvent& e : history) {
    if (e.player != s.to_play_) {
      throw IllegalMoveError(IllegalMoveError::Rule::kOutOfTurn,
                             "event by player " + std::to_string(e.player) + " out of turn");
    }
    s = s.play(e.card);
  }
  return s;
}

std::span<const PlayEvent> GameState::current_trick() const {
  std::size_t in_trick = num_played_ % kNumPlayers;
  return {events_.data() + num_played_ - in_trick, in_trick};
}

std::span<const PlayEvent> GameState::last_trick() const {
  int done = tricks_completed();
  if (done == 0) return {};
  return {events_.data() + (done - 1) * kNumPlayers, static_cast<std::size_t>(kNumPlayers)};
}

std::array<CardSet, kNumPlayers> GameState::initial_hands() const {
  auto out = hands_;
  for (const PlayEvent& e : history()) out[e.player].insert(e.card);
  return out;
}

CardSet GameState::played_cards() const {
  CardSet out;
  for (const PlayEvent& e : history()) out.insert(e.card);
  return out;
}

GameState GameState::play(Card card) const {
  if (finished()) {
    throw IllegalMoveError(IllegalMoveError::Rule::kGameFinished, "game is finished");
  }
  const CardSet& hand = hands_[to_play_];
  if (!hand.contains(card)) {
    throw IllegalMoveError(IllegalMoveError::Rule::kNotInHand,
                           card.to_string() + " is not in the hand of player " +
                               std::to_string(to_play_));
  }
  auto trick = current_trick();
  if (!trick.empty()) {
    Suit led = trick.front().card.suit();
    if (card.suit() != led && hand.has_suit(led)) {
      throw IllegalMoveError(IllegalMoveError::Rule::kMustFollowSuit,
                             "must follow suit " + std::string(1, suit_char(led)) + " with " +
                                 card.to_string() + " while holding that suit");
    }
  }
  GameState next = *this;
  next.apply(card);
  return next;
}

void GameState::apply(Card card) {
  hands_[to_play_].erase(card);
  events_[num_played_++] = PlayEvent{to_play_, card};
  if (num_played_ % kNumPlayers == 0) {
    auto trick = last_trick();
    PlayerId winner = resolve_trick(trick);
    for (const PlayEvent& e : trick) {
      if (kPointCards.contains(e.card)) piles_[winner].insert(e.card);
    }
    trick_leader_ = to_play_ = winner;
  } else {
    to_play_ = next_player(to_play_);
  }
}

bool GameState::operator==(const GameState& o) const {
  if (hands_ != o.hands_ || piles_ != o.piles_ || num_played_ != o.num_played_ ||
      first_leader_ != o.first_leader_ || trick_leader_ != o.trick_leader_ ||
      to_play_ != o.to_play_) {
    return false;
  }
  return std::equal(events_.begin(), events_.begin() + num_played_, o.events_.begin());
}

GameState deal(std::uint64_t seed) {
  Rng rng(seed);
  std::array<int, kNumCards> deck;
  std::iota(deck.begin(), deck.end(), 0);
  std::shuffle(deck.begin(), deck.end(), rng);
  std::array<CardSet, kNumPlayers> hands;
  for (int i = 0; i < kNumCards; ++i) hands[i / kHandSize].insert(Card::from_index(deck[i]));
  PlayerId leader = std::uniform_int_distribution<int>(0, kNumPlayers - 1)(rng);
  return GameState::from_hands(hands, leader);
}

CardSet legal_moves_for(CardSet hand, std::span<const PlayEvent> trick) {
  if (trick.empty()) return hand;
  CardSet follow = hand.in_suit(trick.front().card.suit());
  return follow.empty() ? hand : follow;
}

CardSet legal_moves(const GameState& state) {
  if (state.finished()) throw TerminalStateError("no legal moves in a finished game");
  return legal_moves_for(state.hand(state.to_play()), state.current_trick());
}

PlayerId resolve_trick(std::span<const PlayEvent> trick) {
  if (trick.size() != kNumPlayers) {
    throw InvalidTrickError("trick has " + std::to_string(trick.size()) + " events");
  }
  CardSet seen;
  for (std::size_t k = 0; k < trick.size(); ++k) {
    if (seen.contains(trick[k].card)) throw InvalidTrickError("card repeated within trick");
    seen.insert(trick[k].card);
    if (trick[k].player != (trick[0].player + static_cast<int>(k)) % kNumPlayers) {
      throw InvalidTrickError("trick events are not in clockwise order");
    }
  }
  Suit led = trick[0].card.suit();
  const PlayEvent* best = &trick[0];
  for (const PlayEvent& e : trick.subspan(1)) {
    if (e.card.suit() == led && e.card.rank() > best->card.rank()) best = &e;
  }
  return best->player;
}

int pile_points(CardSet pile) {
  CardSet points = pile & kPointCards;
  CardSet hearts = points.in_suit(Suit::kHeart);
  int subtotal = 0;
  if (hearts.size() == kNumRanks) {
    subtotal = 200;
  } else {
    for (Card h : hearts) subtotal += heart_value(h);
  }
  if (points.contains(cards::kSQ)) subtotal -= 100;
  if (points.contains(cards::kDJ)) subtotal += 100;
  if (points.contains(cards::kC10)) {
    subtotal = points.size() == 1 ? 50 : 2 * subtotal;
  }
  return subtotal;
}

Score score(const std::array<CardSet, kNumPlayers>& piles) {
  Score out;
  CardSet seen;
  for (PlayerId p = 0; p < kNumPlayers; ++p) {
    CardSet points = piles[p] & kPointCards;
    if (!(seen & points).empty()) {
      throw InconsistencyError("point card " + (seen & points).lowest().to_string() +
                               " appears in more than one pile");
    }
    seen |= points;
    out.per_player[p] = pile_points(points);
  }
  out.per_team[0] = out.per_player[0] + out.per_player[2];
  out.per_team[1] = out.per_player[1] + out.per_player[3];
  return out;
}

}  // namespace gongzhu
