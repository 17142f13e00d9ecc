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

#include "gongzhu/json_io.hpp"

#include <cmath>

#include "gongzhu/errors.hpp"

namespace gongzhu {

Json cards_to_json(CardSet cards) {
  Json out = Json::array();
  for (Card c : cards) out.push_back(c.to_string());
  return out;
}

Card card_from_json(const Json& j) {
  if (!j.is_string()) throw ParseError(0, "expected a card token");
  auto card = Card::parse(j.get<std::string>());
  if (!card) throw ParseError(0, "bad card token '" + j.get<std::string>() + "'");
  return *card;
}

CardSet cards_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError(0, "expected an array of cards");
  CardSet out;
  for (const auto& item : j) {
    out.insert(card_from_json(item));
  }
  return out;
}

Json history_to_json(std::span<const PlayEvent> events) {
  Json out = Json::array();
  for (const PlayEvent& e : events) out.push_back({{"seat", e.player}, {"card", e.card.to_string()}});
  return out;
}

Json eval_report_to_json(const EvalReport& r, const std::string& a, const std::string& b, std::uint64_t seed,
                         bool paired, bool observations) {
  Json out = {
      {"schema", kEvalSchema},
      {"a", a},
      {"b", b},
      {"seed", seed},
      {"paired", paired},
      {"deals", r.deals},
      {"games", r.games},
      {"wpg", r.wpg},
      {"stderr", r.stderr_},
      {"z", r.z()},
      {"win_rate", r.win_rate},
      {"draw_rate", r.draw_rate},
      {"loss_rate", r.loss_rate},
  };
  if (observations) out["observations"] = r.observations;
  return out;
}

namespace {

Json value_table(const std::array<double, kNumCards>& q, CardSet legal) {
  Json out = Json::object();
  for (Card c : legal) out[c.to_string()] = q[static_cast<std::size_t>(c.index())];
  return out;
}

}  // namespace

Json belief_to_json(const BeliefDecision& d) {
  Json strata = Json::array();
  for (const auto& s : d.strata) {
    Json keys = Json::object();
    for (const auto& [card, seat] : s.keys) keys[card.to_string()] = seat;
    strata.push_back({{"keys", keys}, {"size", s.size}, {"weight", 0.0}});
  }
  Json scenarios = Json::array();
  for (const auto& e : d.scenarios) {
    Json hands = Json::object();
    for (PlayerId p = 0; p < kNumPlayers; ++p) {
      if (p != d.seat) hands[std::to_string(p)] = cards_to_json(e.scenario.hands[p]);
    }
    Json factors = Json::array();
    for (const auto& f : e.score.factors) factors.push_back({{"slice", f.slice}, {"gamma", f.gamma}});
    scenarios.push_back({{"stratum", e.stratum},
                         {"hands", hands},
                         {"score", e.score.score},
                         {"factors", factors},
                         {"weight", e.weight},
                         {"q", value_table(e.q, d.legal)}});
    strata[static_cast<std::size_t>(e.stratum)]["weight"] =
        strata[static_cast<std::size_t>(e.stratum)]["weight"].get<double>() + e.weight;
  }
  return {{"schema", kBeliefSchema},
          {"seat", d.seat},
          {"legal", cards_to_json(d.legal)},
          {"choice", d.choice.to_string()},
          {"q", d.scenarios.empty() ? Json::object() : value_table(d.q, d.legal)},
          {"strata", strata},
          {"scenarios", scenarios}};
}

}  // namespace gongzhu
