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

#include "gongzhu/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "gongzhu/errors.hpp"

namespace gongzhu {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

GameState play_game(const std::array<const Agent*, kNumPlayers>& seats, GameState state,
                    const std::array<std::uint64_t, kNumPlayers>& seat_seeds) {
  std::array<Rng, kNumPlayers> rngs{Rng(seat_seeds[0]), Rng(seat_seeds[1]), Rng(seat_seeds[2]),
                                    Rng(seat_seeds[3])};
  while (!state.finished()) {
    PlayerId p = state.to_play();
    PlayerView view(state, p);
    state = state.play(seats[p]->choose(view, rngs[p]));
  }
  return state;
}

EvalReport summarize(std::span<const GameResult> games) {
  EvalReport r;
  std::map<int, std::pair<double, int>> per_deal;
  int wins = 0, draws = 0;
  for (const GameResult& g : games) {
    int diff = g.team_a_points - g.team_b_points;
    auto& [sum, n] = per_deal[g.deal];
    sum += diff / 2.0;
    ++n;
    wins += diff > 0;
    draws += diff == 0;
  }
  r.games = static_cast<int>(games.size());
  r.deals = static_cast<int>(per_deal.size());
  for (const auto& [deal, acc] : per_deal) r.observations.push_back(acc.first / acc.second);
  if (r.games > 0) {
    r.win_rate = static_cast<double>(wins) / r.games;
    r.draw_rate = static_cast<double>(draws) / r.games;
    r.loss_rate = 1.0 - r.win_rate - r.draw_rate;
  }
  if (r.deals > 0) {
    double sum = 0.0;
    for (double x : r.observations) sum += x;
    r.wpg = sum / r.deals;
  }
  if (r.deals > 1) {
    double ss = 0.0;
    for (double x : r.observations) ss += (x - r.wpg) * (x - r.wpg);
    r.stderr_ = std::sqrt(ss / (r.deals - 1) / r.deals);
  }
  return r;
}

EvalReport match(const Agent& team_a, const Agent& team_b, int deals, std::uint64_t seed,
                 bool paired, int threads) {
  if (deals < 1) throw GongzhuError("match needs at least one deal");
  const int per_deal = paired ? 2 : 1;
  std::vector<GameResult> results(static_cast<std::size_t>(deals * per_deal));

  auto run_deal = [&](int d) {
    GameState start = deal(derive_seed(seed, static_cast<std::uint64_t>(d), 0));
    std::array<std::uint64_t, kNumPlayers> seat_seeds;
    for (int p = 0; p < kNumPlayers; ++p) {
      seat_seeds[p] = derive_seed(seed, static_cast<std::uint64_t>(d), 1 + static_cast<std::uint64_t>(p));
    }
    for (int k = 0; k < per_deal; ++k) {
      const Agent* even = k == 0 ? &team_a : &team_b;
      const Agent* odd = k == 0 ? &team_b : &team_a;
      GameState end = play_game({even, odd, even, odd}, start, seat_seeds);
      Score s = score(end.piles());
      GameResult& g = results[static_cast<std::size_t>(d * per_deal + k)];
      g.deal = d;
      g.team_a_points = k == 0 ? s.per_team[0] : s.per_team[1];
      g.team_b_points = k == 0 ? s.per_team[1] : s.per_team[0];
    }
  };

  if (threads <= 1) {
    for (int d = 0; d < deals; ++d) run_deal(d);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int d = next++; d < deals; d = next++) run_deal(d);
      });
    }
    for (auto& th : pool) th.join();
  }
  return summarize(results);
}

void PairwiseScore::set(std::size_t i, std::size_t j, double value) {
  data_[i * n_ + j] = value;
  data_[j * n_ + i] = i == j ? 0.0 : -value;
}

CombatResult combat_matrix(std::span<const Agent* const> agents, int deals, std::uint64_t seed,
                           int threads) {
  CombatResult out;
  const std::size_t n = agents.size();
  out.scores = PairwiseScore(n);
  out.reports.assign(n, std::vector<EvalReport>(n));
  for (const Agent* a : agents) out.names.push_back(a->name());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.reports[i][j] = match(*agents[i], *agents[j], deals, derive_seed(seed, i, j), true, threads);
      out.scores.set(i, j, out.reports[i][j].wpg);
    }
  }
  return out;
}

double epsilon(const PairwiseScore& xi) {
  const std::size_t n = xi.size();
  double numerator = 0.0, denominator = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        double cycle = std::abs(xi.at(i, j) + xi.at(j, k) - xi.at(i, k));
        double mass = std::abs(xi.at(i, j)) + std::abs(xi.at(j, k)) + std::abs(xi.at(i, k));
        numerator += cycle * cycle;
        denominator += cycle * mass;
      }
    }
  }
  return denominator > 0.0 ? numerator / denominator : 0.0;
}

EpsilonEstimate epsilon_bootstrap(const CombatResult& combat, int resamples, std::uint64_t seed) {
  EpsilonEstimate out;
  out.value = epsilon(combat.scores);
  const std::size_t n = combat.names.size();
  Rng rng(seed);
  std::vector<double> draws;
  for (int r = 0; r < resamples; ++r) {
    PairwiseScore xi(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& obs = combat.reports[i][j].observations;
        if (obs.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, obs.size() - 1);
        double sum = 0.0;
        for (std::size_t k = 0; k < obs.size(); ++k) sum += obs[pick(rng)];
        xi.set(i, j, sum / static_cast<double>(obs.size()));
      }
    }
    draws.push_back(epsilon(xi));
  }
  if (draws.size() > 1) {
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(draws.size());
    double ss = 0.0;
    for (double d : draws) ss += (d - mean) * (d - mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(draws.size() - 1));
  }
  return out;
}

}  // namespace gongzhu
