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

#include "gongzhu/scenario.hpp"

#include <algorithm>

#include "gongzhu/errors.hpp"

namespace gongzhu {
namespace {

constexpr int kCap = kHandSize + 1;

struct BinomialTable {
  std::array<std::array<double, kNumCards + 1>, kNumCards + 1> c{};
  BinomialTable() {
    for (int n = 0; n <= kNumCards; ++n) {
      c[n][0] = 1.0;
      for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k < n ? c[n - 1][k] : 0.0);
    }
  }
};

double binomial(int n, int k) {
  static const BinomialTable table;
  return table.c[n][k];
}

double multinomial(int n, int a, int b, int /*c*/) { return binomial(n, a) * binomial(n - a, b); }

}  // namespace

VoidConstraints void_constraints(std::span<const PlayEvent> history) {
  VoidConstraints out;
  for (std::size_t t = 0; t < history.size(); ++t) {
    const PlayEvent& lead = history[t - t % kNumPlayers];
    Suit led = lead.card.suit();
    if (history[t].card.suit() != led) out.forbidden[history[t].player][static_cast<int>(led)] = true;
  }
  return out;
}

struct ScenarioSampler::Problem {
  std::array<CardSet, kNumSuits> pool{};
  std::array<int, 3> capacity{};
  std::array<std::array<bool, kNumSuits>, 3> allowed{};
  std::array<CardSet, 3> pinned{};
  // ways[s][a][b]: assignments of suits s.. given remaining capacities a, b for the
  // first two opponents (the third takes what is left).
  std::array<std::array<std::array<double, kCap>, kCap>, kNumSuits + 1> ways{};
};

ScenarioSampler::ScenarioSampler(const PlayerView& view)
    : view_(view), constraints_(void_constraints(view.history())) {
  int k = 0;
  for (PlayerId p = 0; p < kNumPlayers; ++p) {
    if (p != view.seat()) others_[k++] = p;
  }
}

bool ScenarioSampler::build(const KeyCardAssignment& fixed, Problem& pr) const {
  CardSet pool = view_.unseen();
  for (int k = 0; k < 3; ++k) {
    pr.capacity[k] = view_.hand_size(others_[k]);
    for (Suit s : kAllSuits) pr.allowed[k][static_cast<int>(s)] = !constraints_.forbids(others_[k], s);
  }
  for (const auto& [card, player] : fixed) {
    auto it = std::find(others_.begin(), others_.end(), player);
    if (it == others_.end() || !pool.contains(card)) return false;
    int k = static_cast<int>(it - others_.begin());
    if (!pr.allowed[k][static_cast<int>(card.suit())] || pr.capacity[k] == 0) return false;
    pool.erase(card);
    pr.pinned[k].insert(card);
    --pr.capacity[k];
  }
  int total = 0;
  for (Suit s : kAllSuits) {
    pr.pool[static_cast<int>(s)] = pool.in_suit(s);
  }
  for (int c : pr.capacity) total += c;
  if (total != pool.size()) return false;

  for (auto& plane : pr.ways[kNumSuits]) plane.fill(0.0);
  pr.ways[kNumSuits][0][0] = 1.0;
  for (int s = kNumSuits - 1; s >= 0; --s) {
    int n = pr.pool[s].size();
    for (int a = 0; a < kCap; ++a) {
      for (int b = 0; b < kCap; ++b) {
        double sum = 0.0;
        for (int k0 = 0; k0 <= std::min(n, a); ++k0) {
          if (k0 > 0 && !pr.allowed[0][s]) break;
          for (int k1 = 0; k0 + k1 <= n && k1 <= b; ++k1) {
            if (k1 > 0 && !pr.allowed[1][s]) break;
            int k2 = n - k0 - k1;
            if (k2 > 0 && !pr.allowed[2][s]) continue;
            double rest = pr.ways[s + 1][a - k0][b - k1];
            if (rest > 0.0) sum += multinomial(n, k0, k1, k2) * rest;
          }
        }
        pr.ways[s][a][b] = sum;
      }
    }
  }
  return true;
}

double ScenarioSampler::count(const KeyCardAssignment& fixed) const {
  Problem pr;
  if (!build(fixed, pr)) return 0.0;
  return pr.ways[0][pr.capacity[0]][pr.capacity[1]];
}

Scenario ScenarioSampler::sample(Rng& rng, const KeyCardAssignment& fixed) const {
  return std::move(sample_n(rng, 1, fixed).front());
}

std::vector<Scenario> ScenarioSampler::sample_n(Rng& rng, int n,
                                                const KeyCardAssignment& fixed) const {
  Problem pr;
  if (!build(fixed, pr) || pr.ways[0][pr.capacity[0]][pr.capacity[1]] <= 0.0) {
    throw InfeasibleError("no hidden-hand assignment is compatible with the history");
  }
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(draw(pr, rng));
  return out;
}

Scenario ScenarioSampler::draw(const Problem& pr, Rng& rng) const {
  Scenario out;
  out.observer = view_.seat();
  out.hands[view_.seat()] = view_.hand();
  for (int k = 0; k < 3; ++k) out.hands[others_[k]] = pr.pinned[k];

  int a = pr.capacity[0], b = pr.capacity[1];
  std::vector<std::pair<int, int>> splits;
  std::vector<double> weights;
  for (int s = 0; s < kNumSuits; ++s) {
    int n = pr.pool[s].size();
    splits.clear();
    weights.clear();
    for (int k0 = 0; k0 <= std::min(n, a); ++k0) {
      if (k0 > 0 && !pr.allowed[0][s]) break;
      for (int k1 = 0; k0 + k1 <= n && k1 <= b; ++k1) {
        if (k1 > 0 && !pr.allowed[1][s]) break;
        int k2 = n - k0 - k1;
        if (k2 > 0 && !pr.allowed[2][s]) continue;
        double w = multinomial(n, k0, k1, k2) * pr.ways[s + 1][a - k0][b - k1];
        if (w <= 0.0) continue;
        splits.emplace_back(k0, k1);
        weights.push_back(w);
      }
    }
    std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
    auto [pick0, pick1] = splits[choose(rng)];
    std::vector<Card> suit_cards(pr.pool[s].begin(), pr.pool[s].end());
    std::shuffle(suit_cards.begin(), suit_cards.end(), rng);
    for (int i = 0; i < n; ++i) {
      int k = i < pick0 ? 0 : (i < pick0 + pick1 ? 1 : 2);
      out.hands[others_[k]].insert(suit_cards[static_cast<std::size_t>(i)]);
    }
    a -= pick0;
    b -= pick1;
  }
  return out;
}

Scenario sample_scenario(const PlayerView& view, Rng& rng) {
  return ScenarioSampler(view).sample(rng);
}

GameState scenario_state(const PlayerView& view, const Scenario& scenario) {
  std::array<CardSet, kNumPlayers> initial = scenario.hands;
  initial[view.seat()] = view.hand();
  for (PlayerId p = 0; p < kNumPlayers; ++p) initial[p] |= view.played_by()[p];
  return GameState::replay(initial, view.first_leader(), view.history());
}

}  // namespace gongzhu
