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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gongzhu/belief.hpp"
#include "gongzhu/errors.hpp"
#include "gongzhu/json_io.hpp"

using namespace gongzhu;

namespace {

Card C(const char* token) { return *Card::parse(token); }

CardSet S(std::initializer_list<const char*> tokens) {
  CardSet out;
  for (const char* t : tokens) out.insert(C(t));
  return out;
}

std::vector<PlayEvent> plays(PlayerId leader, std::initializer_list<const char*> tokens) {
  std::vector<PlayEvent> out;
  PlayerId p = leader;
  for (const char* t : tokens) {
    out.push_back({p, C(t)});
    p = next_player(p);
  }
  return out;
}

// Same logits for everyone, whatever they know.
class TablePrior final : public PolicyPrior {
 public:
  explicit TablePrior(std::array<double, kNumCards> table) : table_(table) {}
  std::array<double, kNumCards> logits(PlayerId, CardSet, std::span<const PlayEvent>, PlayerId) const override {
    return table_;
  }

 private:
  std::array<double, kNumCards> table_;
};

std::array<double, kNumCards> logits_with(std::initializer_list<std::pair<const char*, double>> entries) {
  std::array<double, kNumCards> out{};
  for (auto [t, v] : entries) out[static_cast<std::size_t>(C(t).index())] = v;
  return out;
}

// The remaining cards dealt to seats 1..3 in index order, topping each up to `sizes`.
Scenario fill(PlayerId observer, CardSet observer_hand, std::array<CardSet, kNumPlayers> fixed,
              std::array<int, kNumPlayers> sizes, CardSet played) {
  Scenario sc;
  sc.observer = observer;
  sc.hands = fixed;
  sc.hands[observer] = observer_hand;
  CardSet used = played | observer_hand;
  for (const auto& h : fixed) used |= h;
  PlayerId p = 0;
  for (Card c : CardSet::full() - used) {
    while (p == observer || sc.hands[p].size() >= sizes[p]) ++p;
    sc.hands[p].insert(c);
  }
  return sc;
}

std::shared_ptr<const Network> tiny_net(std::uint64_t seed = 1) {
  NetConfig config;
  config.depth = 3;
  config.width = 16;
  return std::make_shared<const Network>(config, seed);
}

}  // namespace

TEST_CASE("strata over the leading unseen key cards") {
  GameState s = deal(2);
  PlayerId me = s.to_play();
  BeliefConfig config;

  SUBCASE("two unseen keys and no constraints give nine strata") {
    config.key_cards = {C("SQ"), C("CT")};
    std::uint64_t seed = 2;
    while (s.hand(me).contains(C("SQ")) || s.hand(me).contains(C("CT"))) {
      s = deal(++seed);
      me = s.to_play();
    }
    PlayerView view(s, me);
    auto keys = stratum_key_cards(view, config);
    REQUIRE(keys.size() == 2);
    auto strata = make_strata(ScenarioSampler(view), keys);
    CHECK(strata.size() == 9);
    double total = 0;
    for (const auto& st : strata) total += st.size;
    CHECK(total == doctest::Approx(ScenarioSampler(view).count()));
  }
  SUBCASE("a key card that was played leaves one free key: three strata") {
    // Card i goes to seat i % 4: seat 2 leads SQ, seat 3 follows, seat 0 (without CT) observes.
    std::array<CardSet, kNumPlayers> hands{};
    for (int i = 0; i < kNumCards; ++i) hands[static_cast<std::size_t>(i % 4)].insert(Card::from_index(i));
    GameState g = GameState::from_hands(hands, 2).play(C("SQ")).play(C("S5"));
    PlayerView view(g, 0);
    config.key_cards = {C("SQ"), C("CT")};
    auto keys = stratum_key_cards(view, config);
    REQUIRE(keys.size() == 1);
    CHECK(keys[0] == C("CT"));
    CHECK(make_strata(ScenarioSampler(view), keys).size() == 3);
  }
  SUBCASE("keys held by the observer leave the whole space") {
    PlayerView view(s, me);
    config.key_cards = {s.hand(me).nth(0), s.hand(me).nth(5)};
    auto keys = stratum_key_cards(view, config);
    CHECK(keys.empty());
    auto strata = make_strata(ScenarioSampler(view), keys);
    REQUIRE(strata.size() == 1);
    CHECK(strata[0].keys.empty());
  }
}

TEST_CASE("strata drop placements the voids rule out") {
  // Seat 1 shows out of spades on the first trick, so it cannot hold SK.
  auto history = plays(0, {"S5", "H2", "S9", "SA"});
  PlayerView view(3, S({"S3", "S4", "H3", "H4", "H5", "D2", "D3", "D4", "D5", "C2", "C3", "C4"}), history, 0);
  auto strata = make_strata(ScenarioSampler(view), std::vector<Card>{C("SK")});
  CHECK(strata.size() == 2);
  for (const auto& st : strata) CHECK(st.keys[0].second != 1);
}

TEST_CASE("correction factor") {
  // Seat 1 leads; all of its cards are legal.
  CardSet hand = S({"SA", "SK", "H2"});
  auto prior = TablePrior(logits_with({{"SA", 3.0}, {"SK", 1.0}, {"H2", 0.5}}));
  CHECK(correction_factor(C("SA"), 1, hand, {}, 1, prior, 0.7) == 1.0);
  CHECK(correction_factor(C("SK"), 1, hand, {}, 1, prior, 0.75) == doctest::Approx(std::exp(-1.5)));
  CHECK(correction_factor(C("SK"), 1, hand, {}, 1, prior, 1e-9) == doctest::Approx(1.0));

  auto regret100 = TablePrior(logits_with({{"SA", 100.0}}));
  CHECK(correction_factor(C("SK"), 1, hand, {}, 1, regret100, 0.015) == doctest::Approx(0.2231).epsilon(1e-3));

  // Following spades: H2 is not a legal choice, so it cannot set q_max.
  auto lead = plays(0, {"S2"});
  auto follow = TablePrior(logits_with({{"H2", 9.0}, {"SK", 1.0}}));
  CHECK(correction_factor(C("SK"), 1, hand, lead, 0, follow, 1.0) == 1.0);
  CHECK_THROWS_AS(correction_factor(C("H2"), 1, hand, lead, 0, follow, 1.0), InconsistencyError);
}

TEST_CASE("important slices") {
  auto h = plays(1, {"SA", "SK", "S2", "D4", "D9", "DQ", "HA", "DK"});
  // Two tricks led by seat 1, observed by seat 0.
  CHECK(is_important_slice(h, 0, 0, Suit::kSpade, 8));    // leads are always kept
  CHECK(is_important_slice(h, 1, 0, Suit::kSpade, 8));    // follow in the context suit
  CHECK_FALSE(is_important_slice(h, 1, 0, Suit::kDiamond, 8));  // follow in another suit
  CHECK_FALSE(is_important_slice(h, 2, 0, Suit::kSpade, 8));    // low card
  CHECK_FALSE(is_important_slice(h, 3, 0, Suit::kSpade, 8));    // observer's own play
  CHECK(is_important_slice(h, 6, 0, Suit::kSpade, 8));    // discard (HA on diamonds) is kept
  CHECK(is_important_slice(h, 1, 0, std::nullopt, 8));    // no context keeps every follow
}

TEST_CASE("IEC score") {
  SUBCASE("no important slice gives the empty product") {
    auto history = plays(1, {"S2", "S3", "S4"});
    CardSet mine = S({"S5", "S6", "S7", "S8", "H2", "H3", "H4", "D2", "D3", "D4", "C2", "C3", "C4"});
    PlayerView view(0, mine, history, 1);
    Scenario sc = fill(0, mine, {}, {13, 12, 12, 12}, S({"S2", "S3", "S4"}));
    auto prior = TablePrior(logits_with({{"SA", 5.0}}));
    ScenarioScore s = iec_score(view, sc, prior, BeliefConfig{});
    CHECK(s.score == 1.0);
    CHECK(s.factors.empty());
  }
  SUBCASE("two important slices multiply") {
    auto history = plays(1, {"SA", "SK", "S2"});
    CardSet mine = S({"S5", "S6", "H2", "H3", "H4", "H5", "D2", "D3", "D4", "D5", "C2", "C3", "C4"});
    PlayerView view(0, mine, history, 1);
    Scenario sc = fill(0, mine, {{{}, {}, S({"SQ"}), {}}}, {13, 12, 12, 12}, S({"SA", "SK", "S2"}));
    BeliefConfig config;
    config.beta = std::log(2.0);
    auto prior = TablePrior(logits_with({{"SA", 5.0}, {"SQ", 1.0}}));
    ScenarioScore s = iec_score(view, sc, prior, config);
    REQUIRE(s.factors.size() == 2);
    CHECK(s.factors[0].slice == 1);
    CHECK(s.factors[0].gamma == doctest::Approx(0.5));
    CHECK(s.factors[1].slice == 0);
    CHECK(s.factors[1].gamma == doctest::Approx(1.0));
    CHECK(s.score == doctest::Approx(0.5));
  }
}

TEST_CASE("weighted mean of action values") {
  std::array<double, kNumCards> a{}, b{}, c{};
  c[5] = 30.0;
  std::vector<std::array<double, kNumCards>> values{a, b, c};
  std::vector<double> s{1, 1, 2};
  CHECK(weighted_mean(values, s)[5] == doctest::Approx(15.0));
  std::vector<double> equal{3, 3, 3};
  CHECK(weighted_mean(values, equal)[5] == doctest::Approx(10.0));
  CHECK(weighted_mean(std::span(values).first(1), std::span(s).first(1))[5] == 0.0);
  std::vector<double> zero{0, 0, 0};
  CHECK_THROWS(weighted_mean(values, zero));
}

TEST_CASE("best card: argmax with the lowest index on ties") {
  std::array<double, kNumCards> q{};
  CardSet legal = S({"S3", "H7", "DK"});
  CHECK(best_card(q, legal) == C("S3"));
  q[static_cast<std::size_t>(C("H7").index())] = 2.0;
  q[static_cast<std::size_t>(C("DK").index())] = 2.0;
  CHECK(best_card(q, legal) == C("H7"));
  q[static_cast<std::size_t>(C("S2").index())] = 99.0;  // not legal
  CHECK(best_card(q, legal) == C("H7"));
}

TEST_CASE("weighted value on real positions") {
  auto net = tiny_net();
  NetworkPrior prior(net);
  NetworkEvaluator evaluator(net);
  Rng rng(3);
  RandomAgent random;
  for (int k = 0; k < 6; ++k) {
    GameState s = deal(100 + static_cast<std::uint64_t>(k));
    for (int i = 0; i < 5 + 7 * k; ++i) s = s.play(random.choose(PlayerView(s, s.to_play()), rng));
    PlayerView view(s, s.to_play());
    BeliefConfig config;
    BeliefDecision d = weighted_value(view, prior, evaluator, config, rng);
    CHECK(d.legal == view.legal_moves());
    CHECK(d.legal.contains(d.choice));
    if (d.legal.size() == 1) {
      CHECK(d.scenarios.empty());
      continue;
    }
    CHECK(d.strata.size() <= 9);
    CHECK(d.scenarios.size() == d.strata.size());
    double total = 0;
    for (const auto& e : d.scenarios) {
      total += e.weight;
      for (Card c : d.legal) CHECK(std::isfinite(e.q[static_cast<std::size_t>(c.index())]));
      for (PlayerId p = 0; p < kNumPlayers; ++p) CHECK(e.scenario.hands[p].size() == s.hand(p).size());
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(d.choice == best_card(d.q, d.legal));

    Json dump = belief_to_json(d);
    CHECK(dump["schema"] == kBeliefSchema);
    CHECK(dump["q"].size() == static_cast<std::size_t>(d.legal.size()));
    double strata_weight = 0;
    for (const auto& st : dump["strata"]) strata_weight += st["weight"].get<double>();
    CHECK(strata_weight == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& sc : dump["scenarios"]) CHECK_FALSE(sc["hands"].contains(std::to_string(d.seat)));
  }
}

TEST_CASE("uniform weights without IEC and with a vanishing beta") {
  auto net = tiny_net(4);
  NetworkPrior prior(net);
  PileEvaluator evaluator;
  GameState s = deal(9);
  Rng play_rng(1);
  RandomAgent random;
  for (int i = 0; i < 21; ++i) s = s.play(random.choose(PlayerView(s, s.to_play()), play_rng));
  PlayerView view(s, s.to_play());
  REQUIRE(view.legal_moves().size() > 1);

  BeliefConfig unweighted;
  unweighted.stratified = false;
  unweighted.use_iec = false;
  BeliefConfig cold = unweighted;
  cold.use_iec = true;
  cold.beta = 1e-12;
  Rng a(5), b(5);
  BeliefDecision x = weighted_value(view, prior, evaluator, unweighted, a);
  BeliefDecision y = weighted_value(view, prior, evaluator, cold, b);
  REQUIRE(x.scenarios.size() == 9);
  for (std::size_t k = 0; k < x.scenarios.size(); ++k) {
    CHECK(x.scenarios[k].weight == doctest::Approx(1.0 / 9));
    CHECK(y.scenarios[k].weight == doctest::Approx(1.0 / 9));
  }
  for (Card c : x.legal) CHECK(x.q[static_cast<std::size_t>(c.index())] == doctest::Approx(y.q[static_cast<std::size_t>(c.index())]));
}

TEST_CASE("belief agents by name") {
  auto net = tiny_net();
  CHECK(make_agent("scrofa", net)->name() == "scrofa");
  CHECK(make_agent("scrofa-us", net)->name() == "scrofa-us");
  CHECK(make_agent("net", net)->name() == "net");
  CHECK(make_agent("greed")->name() == "greed");
  CHECK_THROWS(make_agent("scrofa"));
  CHECK_THROWS(make_agent("nobody", net));

  auto agent = make_agent("scrofa", net);
  Rng rng(2);
  GameState s = deal(44);
  while (!s.finished()) {
    PlayerView view(s, s.to_play());
    Card c = agent->choose(view, rng);
    REQUIRE(view.legal_moves().contains(c));
    s = s.play(c);
    if (s.num_played() > 12) break;
  }
}
