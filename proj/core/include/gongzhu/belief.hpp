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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gongzhu/agents.hpp"
#include "gongzhu/mcts.hpp"
#include "gongzhu/network.hpp"
#include "gongzhu/scenario.hpp"

namespace gongzhu {

// Policy scores a player would assign to each card, given only what that player knows.
class PolicyPrior {
 public:
  virtual ~PolicyPrior() = default;
  virtual std::array<double, kNumCards> logits(PlayerId seat, CardSet hand,
                                               std::span<const PlayEvent> history,
                                               PlayerId first_leader) const = 0;
};

// Policy head of a network on the averaged encoding.
class NetworkPrior final : public PolicyPrior {
 public:
  explicit NetworkPrior(std::shared_ptr<const Network> net) : net_(std::move(net)) {}
  std::array<double, kNumCards> logits(PlayerId seat, CardSet hand, std::span<const PlayEvent> history,
                                       PlayerId first_leader) const override;

 private:
  std::shared_ptr<const Network> net_;
};

struct BeliefConfig {
  // Temperature of the correction factor. The regret is measured in policy logits.
  double beta = 1.0;
  bool stratified = true;
  bool use_iec = true;
  int samples = 9;              // scenarios drawn when sampling uniformly
  int samples_per_stratum = 1;
  std::vector<Card> key_cards{cards::kSQ, cards::kC10, cards::kHA, cards::kDJ, cards::kHK};
  int max_key_cards = 2;
  int important_rank = 8;       // plays of this rank or higher enter the score
  SearchConfig search = SearchConfig::evaluation();
};

struct Stratum {
  KeyCardAssignment keys;
  double size = 0.0;  // number of compatible scenarios
};

// The first `max_key_cards` key cards the observer has not seen.
std::vector<Card> stratum_key_cards(const PlayerView& view, const BeliefConfig& config);

// One stratum per feasible placement of `keys` among the observer's three opponents,
// in lexicographic order of the placement. No keys gives the single whole-space stratum.
std::vector<Stratum> make_strata(const ScenarioSampler& sampler, std::span<const Card> keys);

// exp(-beta * (q_max - q_action)), q taken over the legal moves of `hand` after `prefix`.
double correction_factor(Card action, PlayerId player, CardSet hand, std::span<const PlayEvent> prefix,
                         PlayerId first_leader, const PolicyPrior& prior, double beta);

// Whether history slice `t` counts towards a scenario's score for `observer`.
// Skipped: the observer's own plays, low cards, and plain follows in a suit other than
// `context` (the suit led in the observer's current trick, if any).
bool is_important_slice(std::span<const PlayEvent> history, std::size_t t, PlayerId observer,
                        std::optional<Suit> context, int important_rank);

struct SliceFactor {
  std::size_t slice = 0;  // index into the history
  double gamma = 1.0;
};

struct ScenarioScore {
  double score = 1.0;  // product of the factors
  std::vector<SliceFactor> factors;
};

ScenarioScore iec_score(const PlayerView& view, const Scenario& scenario, const PolicyPrior& prior,
                        const BeliefConfig& config);

// Weighted mean of per-scenario action values. Weights need not be normalised.
std::array<double, kNumCards> weighted_mean(std::span<const std::array<double, kNumCards>> values,
                                            std::span<const double> weights);

struct ScenarioEval {
  int stratum = 0;
  Scenario scenario;
  ScenarioScore score;
  double weight = 0.0;                  // normalised over all scenarios
  std::array<double, kNumCards> q{};    // observer team's differential after each legal card
};

struct BeliefDecision {
  PlayerId seat = 0;
  CardSet legal;
  std::vector<Stratum> strata;
  std::vector<ScenarioEval> scenarios;
  std::array<double, kNumCards> q{};
  Card choice = Card::from_index(0);
};

// Samples scenarios, scores them, searches every legal card in every scenario and
// aggregates the values by scenario weight. The choice is the best aggregated card,
// lowest index on ties.
BeliefDecision weighted_value(const PlayerView& view, const PolicyPrior& prior, const Evaluator& evaluator,
                              const BeliefConfig& config, Rng& rng);

// Best legal card of an aggregated value table, lowest index on ties.
Card best_card(const std::array<double, kNumCards>& q, CardSet legal);

// Network-guided player for hidden hands: scenarios from the belief layer, each searched
// with perfect-information MCTS.
class BeliefAgent final : public Agent {
 public:
  BeliefAgent(std::string name, std::shared_ptr<const Network> net, BeliefConfig config = {});
  std::string name() const override { return name_; }
  Card choose(const PlayerView& view, Rng& rng) const override;
  BeliefDecision decide(const PlayerView& view, Rng& rng) const;
  const BeliefConfig& config() const { return config_; }

 private:
  std::string name_;
  std::shared_ptr<const Network> net_;
  NetworkPrior prior_;
  NetworkEvaluator evaluator_;
  BeliefConfig config_;
};

// Plays the argmax of the network policy on the averaged encoding, without search.
class PolicyAgent final : public Agent {
 public:
  explicit PolicyAgent(std::shared_ptr<const Network> net) : net_(std::move(net)) {}
  std::string name() const override { return "net"; }
  Card choose(const PlayerView& view, Rng& rng) const override;

 private:
  std::shared_ptr<const Network> net_;
};

// Baseline names plus "scrofa" (stratified, IEC-weighted), "scrofa-us" (uniform sampling,
// no weighting) and "net" (raw policy); the last three need a network.
std::unique_ptr<Agent> make_agent(std::string_view name, std::shared_ptr<const Network> net = nullptr);

}  // namespace gongzhu
