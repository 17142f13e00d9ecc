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

#include "gongzhu/agents.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "gongzhu/errors.hpp"
#include "gongzhu/scenario.hpp"

namespace gongzhu {
namespace {

// Highest card of `set` ranked strictly below `rank` (all cards share a suit).
std::optional<Card> highest_below(CardSet set, int rank) {
  std::optional<Card> best;
  for (Card c : set) {
    if (c.rank() < rank) best = c;
  }
  return best;
}

// Current winning event of a partial, non-empty trick.
const PlayEvent& trick_winner(std::span<const PlayEvent> trick) {
  Suit led = trick.front().card.suit();
  const PlayEvent* best = &trick.front();
  for (const PlayEvent& e : trick) {
    if (e.card.suit() == led && e.card.rank() > best->card.rank()) best = &e;
  }
  return *best;
}

bool trick_poisoned(std::span<const PlayEvent> trick) {
  for (const PlayEvent& e : trick) {
    if (e.card == cards::kSQ || heart_value(e.card) < 0) return true;
  }
  return trick.front().card.suit() == Suit::kHeart;
}

Card if_lead(const PlayerView& view) {
  CardSet hand = view.hand();
  CardSet spades = hand.in_suit(Suit::kSpade);
  bool sq_out = !view.played_cards().contains(cards::kSQ);
  bool spade_honour = hand.contains(cards::kSQ) || hand.contains(cards::kSK) ||
                      hand.contains(cards::kSA);
  if (sq_out && !spade_honour && !spades.empty()) return spades.lowest();

  CardSet candidates = hand;
  if (sq_out && spade_honour && !(candidates - spades).empty()) candidates -= spades;
  CardSet hearts = candidates.in_suit(Suit::kHeart);
  if (!(candidates - hearts).empty()) candidates -= hearts;

  std::optional<Suit> longest;
  for (Suit s : kAllSuits) {
    int n = candidates.in_suit(s).size();
    if (n > 0 && (!longest || n > candidates.in_suit(*longest).size())) longest = s;
  }
  return candidates.in_suit(*longest).lowest();
}

Card if_follow(const PlayerView& view, CardSet legal) {
  auto trick = view.current_trick();
  const PlayEvent& winner = trick_winner(trick);
  bool partner_winning = winner.player == partner_of(view.seat());
  bool last = trick.size() == kNumPlayers - 1;

  if (trick.front().card.suit() == Suit::kSpade && legal.contains(cards::kSQ) &&
      winner.card.rank() > 12 && !partner_winning) {
    return cards::kSQ;
  }
  if (last && !trick_poisoned(trick)) {
    CardSet safe = legal;
    safe.erase(cards::kSQ);
    if (safe.empty()) return legal.highest();
    if (partner_winning) {
      if (auto duck = highest_below(safe, winner.card.rank())) return *duck;
    }
    return safe.highest();
  }
  if (auto duck = highest_below(legal, winner.card.rank())) return *duck;
  CardSet forced = legal;
  forced.erase(cards::kSQ);
  return forced.empty() ? legal.highest() : forced.highest();
}

Card if_discard(const PlayerView& view) {
  CardSet hand = view.hand();
  auto trick = view.current_trick();
  bool partner_winning = trick_winner(trick).player == partner_of(view.seat());
  bool last = trick.size() == kNumPlayers - 1;

  if (partner_winning && last) {
    if (hand.contains(cards::kDJ)) return cards::kDJ;
    CardSet safe = hand - kPointCards;
    if (!safe.empty()) return safe.highest();
  }
  if (!partner_winning || !last) {
    if (hand.contains(cards::kSQ)) return cards::kSQ;
    CardSet hearts = hand.in_suit(Suit::kHeart);
    if (!hearts.empty() && heart_value(hearts.highest()) < 0) return hearts.highest();
    if (!view.played_cards().contains(cards::kSQ)) {
      if (hand.contains(cards::kSA)) return cards::kSA;
      if (hand.contains(cards::kSK)) return cards::kSK;
    }
  }
  CardSet pool = hand;
  pool.erase(cards::kDJ);
  pool.erase(cards::kC10);
  if (pool.empty()) pool = hand;
  std::optional<Suit> shortest;
  for (Suit s : kAllSuits) {
    int n = pool.in_suit(s).size();
    if (n > 0 && (!shortest || n < pool.in_suit(*shortest).size())) shortest = s;
  }
  return pool.in_suit(*shortest).highest();
}

// Immediate point swing of a completed trick for `team` (positive is good for it).
double trick_swing(std::span<const PlayEvent> trick, const std::array<CardSet, kNumPlayers>& piles,
                   int team) {
  PlayerId winner = resolve_trick(trick);
  CardSet taken = piles[winner];
  for (const PlayEvent& e : trick) taken.insert(e.card);
  int delta = pile_points(taken) - pile_points(piles[winner]);
  return team_of(winner) == team ? delta : -delta;
}

// Followers who cannot follow suit are limited to their point cards plus the top and
// bottom of each suit; nothing else changes the trick outcome much.
CardSet response_candidates(CardSet hand, std::span<const PlayEvent> trick) {
  CardSet legal = legal_moves_for(hand, trick);
  if (legal.size() <= 4 || trick.empty() || legal.has_suit(trick.front().card.suit())) {
    return legal;
  }
  CardSet out = legal & kPointCards;
  for (Suit s : kAllSuits) {
    CardSet in = legal.in_suit(s);
    if (!in.empty()) {
      out.insert(in.lowest());
      out.insert(in.highest());
    }
  }
  return out;
}

double resolve_rest(std::array<PlayEvent, kNumPlayers>& trick, std::size_t filled,
                    const std::array<CardSet, kNumPlayers>& hands,
                    const std::array<CardSet, kNumPlayers>& piles, int team) {
  std::span<const PlayEvent> so_far(trick.data(), filled);
  if (filled == kNumPlayers) return trick_swing(so_far, piles, team);
  PlayerId p = next_player(trick[filled - 1].player);
  bool maximize = team_of(p) == team;
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (Card c : response_candidates(hands[p], so_far)) {
    trick[filled] = PlayEvent{p, c};
    double v = resolve_rest(trick, filled + 1, hands, piles, team);
    best = maximize ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

bool holding_value_live(const PlayerView& view, Card c) {
  CardSet gone = view.played_cards() | view.hand();
  if (c.suit() == Suit::kSpade) return !gone.contains(cards::kSQ);
  if (c.suit() == Suit::kClub) return !gone.contains(cards::kC10);
  if (c.suit() == Suit::kDiamond) return !gone.contains(cards::kDJ);
  return false;
}

}  // namespace

Card RandomAgent::choose(const PlayerView& view, Rng& rng) const {
  CardSet legal = view.legal_moves();
  int k = std::uniform_int_distribution<int>(0, legal.size() - 1)(rng);
  return legal.nth(k);
}

Card IfAgent::choose(const PlayerView& view, Rng& /*rng*/) const {
  CardSet legal = view.legal_moves();
  if (legal.size() == 1) return legal.lowest();
  auto trick = view.current_trick();
  if (trick.empty()) return if_lead(view);
  if (legal.has_suit(trick.front().card.suit())) return if_follow(view, legal);
  return if_discard(view);
}

CardValueTable::CardValueTable() {
  set(cards::kSA, -50);
  set(cards::kSK, -30);
  set(cards::kCA, -20);
  set(cards::kCK, -15);
  set(cards::kCQ, -10);
  set(cards::kCJ, -5);
  set(cards::kDA, 30);
  set(cards::kDK, 20);
  set(cards::kDQ, 10);
}

const CardValueTable& greed_card_values() {
  static const CardValueTable table;
  return table;
}

std::array<double, kNumCards> GreedAgent::evaluate(const PlayerView& view, Rng& rng) const {
  std::array<double, kNumCards> out;
  out.fill(std::numeric_limits<double>::quiet_NaN());
  CardSet legal = view.legal_moves();
  const int team = team_of(view.seat());
  auto trick_now = view.current_trick();
  std::array<PlayEvent, kNumPlayers> trick{};
  std::copy(trick_now.begin(), trick_now.end(), trick.begin());
  const std::size_t mine = trick_now.size();

  std::vector<Scenario> scenarios;
  if (mine + 1 < kNumPlayers) {
    scenarios = ScenarioSampler(view).sample_n(rng, config_.samples);
  }
  for (Card c : legal) {
    trick[mine] = PlayEvent{view.seat(), c};
    double ev = 0.0;
    if (scenarios.empty()) {
      ev = trick_swing({trick.data(), kNumPlayers}, view.piles(), team);
    } else {
      for (const Scenario& s : scenarios) ev += resolve_rest(trick, mine + 1, s.hands, view.piles(), team);
      ev /= static_cast<double>(scenarios.size());
    }
    double release = holding_value_live(view, c) ? -greed_card_values().at(c) : 0.0;
    out[static_cast<std::size_t>(c.index())] = ev + release;
  }
  return out;
}

Card GreedAgent::choose(const PlayerView& view, Rng& rng) const {
  CardSet legal = view.legal_moves();
  if (legal.size() == 1) return legal.lowest();
  auto values = evaluate(view, rng);
  Card best = legal.lowest();
  for (Card c : legal) {
    if (values[static_cast<std::size_t>(c.index())] > values[static_cast<std::size_t>(best.index())]) best = c;
  }
  // Last to play: among equally valued cards take the lead with the lowest winner.
  auto trick_now = view.current_trick();
  if (trick_now.size() + 1 == kNumPlayers) {
    std::array<PlayEvent, kNumPlayers> trick{};
    std::copy(trick_now.begin(), trick_now.end(), trick.begin());
    for (Card c : legal) {
      if (values[static_cast<std::size_t>(c.index())] != values[static_cast<std::size_t>(best.index())]) continue;
      trick[kNumPlayers - 1] = PlayEvent{view.seat(), c};
      if (resolve_trick(trick) == view.seat()) return c;
    }
  }
  return best;
}

std::unique_ptr<Agent> make_baseline_agent(std::string_view name) {
  if (name == "random") return std::make_unique<RandomAgent>();
  if (name == "if") return std::make_unique<IfAgent>();
  if (name == "greed") return std::make_unique<GreedAgent>();
  throw GongzhuError("unknown agent '" + std::string(name) + "'");
}

}  // namespace gongzhu
