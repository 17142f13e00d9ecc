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

#include "gongzhu/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gongzhu/encoding.hpp"
#include "gongzhu/errors.hpp"

namespace gongzhu {

std::array<double, kNumCards> NetworkPrior::logits(PlayerId seat, CardSet hand,
                                                   std::span<const PlayEvent> history,
                                                   PlayerId first_leader) const {
  return net_->forward(encode_averaged(seat, hand, history, first_leader)).logits;
}

std::vector<Card> stratum_key_cards(const PlayerView& view, const BeliefConfig& config) {
  std::vector<Card> keys;
  CardSet unseen = view.unseen();
  for (Card c : config.key_cards) {
    if (static_cast<int>(keys.size()) == config.max_key_cards) break;
    if (unseen.contains(c)) keys.push_back(c);
  }
  return keys;
}

std::vector<Stratum> make_strata(const ScenarioSampler& sampler, std::span<const Card> keys) {
  std::vector<Stratum> out;
  int combos = 1;
  for (std::size_t i = 0; i < keys.size(); ++i) combos *= 3;
  for (int code = 0; code < combos; ++code) {
    Stratum s;
    int rest = code;
    // Most significant digit is the first key card.
    std::vector<int> digits(keys.size());
    for (std::size_t i = keys.size(); i-- > 0;) {
      digits[i] = rest % 3;
      rest /= 3;
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      s.keys.emplace_back(keys[i], sampler.others()[static_cast<std::size_t>(digits[i])]);
    }
    s.size = sampler.count(s.keys);
    if (s.size > 0.0) out.push_back(std::move(s));
  }
  return out;
}

double correction_factor(Card action, PlayerId player, CardSet hand, std::span<const PlayEvent> prefix,
                         PlayerId first_leader, const PolicyPrior& prior, double beta) {
  std::size_t trick_start = prefix.size() - prefix.size() % kNumPlayers;
  CardSet legal = legal_moves_for(hand, prefix.subspan(trick_start));
  if (!legal.contains(action)) {
    throw InconsistencyError("correction factor for a card the hypothesised hand could not play");
  }
  auto q = prior.logits(player, hand, prefix, first_leader);
  double q_max = -std::numeric_limits<double>::infinity();
  for (Card c : legal) q_max = std::max(q_max, q[static_cast<std::size_t>(c.index())]);
  return std::exp(-beta * (q_max - q[static_cast<std::size_t>(action.index())]));
}

bool is_important_slice(std::span<const PlayEvent> history, std::size_t t, PlayerId observer,
                        std::optional<Suit> context, int important_rank) {
  const PlayEvent& ev = history[t];
  if (ev.player == observer || ev.card.rank() < important_rank) return false;
  const std::size_t position = t % kNumPlayers;
  if (position == 0 || !context) return true;
  Suit led = history[t - position].card.suit();
  bool followed = ev.card.suit() == led;
  return !(followed && led != *context);
}

ScenarioScore iec_score(const PlayerView& view, const Scenario& scenario, const PolicyPrior& prior,
                        const BeliefConfig& config) {
  ScenarioScore out;
  auto history = view.history();
  std::optional<Suit> context;
  if (!view.current_trick().empty()) context = view.current_trick().front().card.suit();
  // Walk backwards, returning each card to its player's hand as we pass it.
  std::array<CardSet, kNumPlayers> hands = scenario.hands;
  for (std::size_t t = history.size(); t-- > 0;) {
    const PlayEvent& ev = history[t];
    hands[ev.player].insert(ev.card);
    if (!is_important_slice(history, t, view.seat(), context, config.important_rank)) continue;
    double gamma = correction_factor(ev.card, ev.player, hands[ev.player], history.first(t),
                                     view.first_leader(), prior, config.beta);
    out.score *= gamma;
    out.factors.push_back({t, gamma});
  }
  return out;
}

std::array<double, kNumCards> weighted_mean(std::span<const std::array<double, kNumCards>> values,
                                            std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty()) {
    throw GongzhuError("weighted_mean needs one weight per value table");
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw GongzhuError("weighted_mean needs positive total weight");
  std::array<double, kNumCards> out{};
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (int c = 0; c < kNumCards; ++c) {
      out[static_cast<std::size_t>(c)] += weights[k] / total * values[k][static_cast<std::size_t>(c)];
    }
  }
  return out;
}

Card best_card(const std::array<double, kNumCards>& q, CardSet legal) {
  if (legal.empty()) throw GongzhuError("no legal card to choose");
  Card best = legal.lowest();
  for (Card c : legal) {
    if (q[static_cast<std::size_t>(c.index())] > q[static_cast<std::size_t>(best.index())]) best = c;
  }
  return best;
}

BeliefDecision weighted_value(const PlayerView& view, const PolicyPrior& prior, const Evaluator& evaluator,
                              const BeliefConfig& config, Rng& rng) {
  if (!(config.beta >= 0.0)) throw GongzhuError("beta must be non-negative");
  BeliefDecision d;
  d.seat = view.seat();
  d.legal = view.legal_moves();
  if (d.legal.empty()) throw TerminalStateError("no decision to make");
  if (d.legal.size() == 1) {
    d.choice = d.legal.lowest();
    return d;
  }

  ScenarioSampler sampler(view);
  int per_stratum = config.samples_per_stratum;
  if (config.stratified) {
    d.strata = make_strata(sampler, stratum_key_cards(view, config));
  } else {
    d.strata.push_back({{}, sampler.count()});
    per_stratum = config.samples;
  }
  if (d.strata.empty()) throw InfeasibleError("no scenario is compatible with the history");
  if (per_stratum < 1) throw GongzhuError("need at least one scenario per stratum");

  // p(S_j) = 1/t for every stratum and 1/n_j for each of its draws.
  const double stratum_mass = 1.0 / static_cast<double>(d.strata.size());
  for (std::size_t j = 0; j < d.strata.size(); ++j) {
    for (Scenario& sc : sampler.sample_n(rng, per_stratum, d.strata[j].keys)) {
      ScenarioEval e;
      e.stratum = static_cast<int>(j);
      e.scenario = std::move(sc);
      if (config.use_iec) e.score = iec_score(view, e.scenario, prior, config);
      e.weight = stratum_mass / per_stratum * e.score.score;
      d.scenarios.push_back(std::move(e));
    }
  }
  double total = 0.0;
  for (const auto& e : d.scenarios) total += e.weight;
  if (!(total > 0.0)) {
    // Every score underflowed; fall back to the stratified prior.
    for (auto& e : d.scenarios) e.weight = stratum_mass / per_stratum;
    total = 1.0;
  }
  for (auto& e : d.scenarios) e.weight /= total;

  const double sign = team_of(view.seat()) == 0 ? 1.0 : -1.0;
  std::vector<std::array<double, kNumCards>> tables;
  std::vector<double> weights;
  for (auto& e : d.scenarios) {
    GameState state = scenario_state(view, e.scenario);
    for (Card c : d.legal) {
      GameState next = state.play(c);
      double v = next.finished() ? score(next.piles()).team_differential()
                                 : search(next, evaluator, config.search).root_value;
      e.q[static_cast<std::size_t>(c.index())] = sign * v;
    }
    tables.push_back(e.q);
    weights.push_back(e.weight);
  }
  d.q = weighted_mean(tables, weights);
  d.choice = best_card(d.q, d.legal);
  return d;
}

BeliefAgent::BeliefAgent(std::string name, std::shared_ptr<const Network> net, BeliefConfig config)
    : name_(std::move(name)), net_(net), prior_(net), evaluator_(net), config_(std::move(config)) {
  if (!net_) throw GongzhuError("belief agent needs a network");
}

BeliefDecision BeliefAgent::decide(const PlayerView& view, Rng& rng) const {
  return weighted_value(view, prior_, evaluator_, config_, rng);
}

Card BeliefAgent::choose(const PlayerView& view, Rng& rng) const { return decide(view, rng).choice; }

Card PolicyAgent::choose(const PlayerView& view, Rng&) const {
  auto logits = net_->forward(encode(view)).logits;
  return best_card(logits, view.legal_moves());
}

std::unique_ptr<Agent> make_agent(std::string_view name, std::shared_ptr<const Network> net) {
  if (name == "scrofa" || name == "scrofa-us" || name == "net") {
    if (!net) throw GongzhuError("agent '" + std::string(name) + "' needs a network");
    if (name == "net") return std::make_unique<PolicyAgent>(net);
    BeliefConfig config;
    if (name == "scrofa-us") {
      config.stratified = false;
      config.use_iec = false;
    }
    return std::make_unique<BeliefAgent>(std::string(name), net, config);
  }
  return make_baseline_agent(name);
}

}  // namespace gongzhu
