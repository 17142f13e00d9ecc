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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   gongzhu_acceptance <criterion> [--net FILE] [--work DIR] [--seed N]
//   gongzhu_acceptance all --work DIR
//
// `train` is not a criterion; it produces the checkpoint that training-signal,
// sampling-ablation and epsilon evaluate.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "gongzhu/belief.hpp"
#include "gongzhu/errors.hpp"
#include "gongzhu/eval.hpp"
#include "gongzhu/mcts.hpp"
#include "gongzhu/record.hpp"
#include "gongzhu/service/server.hpp"
#include "gongzhu/trainer.hpp"
#include "support/reference.hpp"

using namespace gongzhu;
using Clock = std::chrono::steady_clock;

namespace {

struct Options {
  std::filesystem::path work = "acceptance_work";
  std::string net;
  std::uint64_t seed = 2024;
  double train_minutes = 30.0;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::shared_ptr<const Network> load_net(const Options& o) {
  std::filesystem::path path = o.net.empty() ? o.work / "train" / "latest.gzpv" : std::filesystem::path(o.net);
  if (!std::filesystem::exists(path)) throw GongzhuError("no checkpoint at " + path.string() + "; run `train` first");
  return std::make_shared<const Network>(load_network(path.string()));
}

// ---------------------------------------------------------------------------------------

Outcome scoring_oracle(const Options& o) {
  auto t0 = Clock::now();
  constexpr int kGames = 10000;
  int mismatches = 0, heart_errors = 0, all_hearts = 0;
  for (int g = 0; g < kGames; ++g) {
    GameState end = testing::random_playout(derive_seed(o.seed, 11, static_cast<std::uint64_t>(g)));
    Score s = score(end.piles());
    auto ref = testing::reference_replay(end);
    if (!ref.violation.empty() || ref.per_player != s.per_player) ++mismatches;

    int hearts = 0;
    bool sweep = false;
    for (const CardSet& pile : end.piles()) {
      std::vector<std::string> tokens;
      for (Card c : pile) {
        if (c.suit() == Suit::kHeart) tokens.push_back(c.to_string());
      }
      sweep = sweep || tokens.size() == kNumRanks;
      hearts += testing::reference_points(tokens);
    }
    all_hearts += sweep;
    if (hearts != (sweep ? 200 : -200)) ++heart_errors;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && heart_errors == 0 && secs < 60.0,
          fmt("%d games, %d scorer mismatches, %d heart-total errors, %d all-hearts games, %.1f s", kGames, mismatches,
              heart_errors, all_hearts, secs)};
}

// Follow-suit check written against the initial hands and history, not the engine.
bool reference_legal(const GameState& s, Card c) {
  CardSet hand = s.hand(s.to_play());
  if (!hand.contains(c)) return false;
  auto trick = s.current_trick();
  if (trick.empty()) return true;
  Suit led = trick.front().card.suit();
  if (c.suit() == led) return true;
  for (Card h : hand) {
    if (h.suit() == led) return false;
  }
  return true;
}

Outcome rules_fuzz(const Options& o) {
  auto t0 = Clock::now();
  constexpr int kPlayouts = 100000;
  long probes = 0;
  int verdict_errors = 0, violations = 0, round_trip_errors = 0;
  Rng rng(o.seed);
  for (int g = 0; g < kPlayouts; ++g) {
    GameState s = deal(rng());
    while (!s.finished()) {
      // Probe an arbitrary card: the engine must accept it exactly when the rules allow it.
      Card probe = Card::from_index(static_cast<int>(rng() % kNumCards));
      bool accepted = true;
      try {
        (void)s.play(probe);
      } catch (const IllegalMoveError&) {
        accepted = false;
      }
      ++probes;
      if (accepted != reference_legal(s, probe)) ++verdict_errors;
      CardSet legal = legal_moves(s);
      s = s.play(legal.nth(static_cast<int>(rng() % static_cast<std::uint64_t>(legal.size()))));
    }
    if (!testing::reference_replay(s).violation.empty()) ++violations;
    std::string text = serialize_game(s);
    try {
      GameState back = parse_game(text);
      if (!(back == s) || serialize_game(back) != text || score(back.piles()) != score(s.piles())) ++round_trip_errors;
    } catch (const ParseError&) {
      ++round_trip_errors;
    }
  }
  return {verdict_errors == 0 && violations == 0 && round_trip_errors == 0,
          fmt("%d playouts, %ld probed plays, %d wrong verdicts, %d rule violations, %d round-trip errors, %.1f s",
              kPlayouts, probes, verdict_errors, violations, round_trip_errors, seconds_since(t0))};
}

double minimax(const GameState& s) {
  if (s.finished()) return score(s.piles()).team_differential();
  const bool maximize = team_of(s.to_play()) == 0;
  double best = maximize ? -1e18 : 1e18;
  for (Card c : legal_moves(s)) {
    double v = minimax(s.play(c));
    best = maximize ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

Outcome mcts_oracle(const Options& o) {
  auto t0 = Clock::now();
  constexpr int kEndgames = 100;
  constexpr int kSimulations = 10000;
  Rng rng(o.seed);
  int misses = 0, default_misses = 0;
  double worst = 0.0;
  for (int g = 0; g < kEndgames; ++g) {
    GameState s = deal(rng());
    const int start = 44 + static_cast<int>(rng() % 8);  // at most two tricks left
    while (s.num_played() < start) {
      CardSet legal = legal_moves(s);
      s = s.play(legal.nth(static_cast<int>(rng() % static_cast<std::uint64_t>(legal.size()))));
    }
    const double exact = minimax(s);
    double v = search(s, PileEvaluator{}, SearchConfig{2000.0, 0, 2}, kSimulations).root_value;
    worst = std::max(worst, std::abs(v - exact));
    misses += std::abs(v - exact) > 1.0;
    double d = search(s, PileEvaluator{}, SearchConfig{30.0, 0, 2}, kSimulations).root_value;
    default_misses += std::abs(d - exact) > 1.0;
  }
  const double secs = seconds_since(t0);
  return {misses == 0 && secs < 120.0,
          fmt("%d endgames at c=2000, %d sims: %d off by more than 1 point (worst %.3f); at c=30: %d off; %.1f s",
              kEndgames, kSimulations, misses, worst, default_misses, secs)};
}

std::vector<TrainingSample> gradient_batch(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingSample> out;
  for (int i = 0; i < n; ++i) {
    GameState s = deal(rng());
    for (int k = 0; k < 5 + 9 * i; ++k) s = s.play(legal_moves(s).nth(static_cast<int>(rng() % legal_moves(s).size())));
    TrainingSample t;
    t.input = encode(s, s.to_play());
    double total = 0.0;
    for (Card c : legal_moves(s)) {
      t.legal_mask |= std::uint64_t{1} << c.index();
      t.target_policy[static_cast<std::size_t>(c.index())] = static_cast<float>(1 + rng() % 7);
      total += t.target_policy[static_cast<std::size_t>(c.index())];
    }
    for (float& p : t.target_policy) p = static_cast<float>(p / total);
    // Far from the prediction, so the |.| term stays on one side of its kink.
    t.target_value = (rng() % 2) ? 2000.0f : -2000.0f;
    out.push_back(t);
  }
  return out;
}

Outcome gradient_check(const Options& o) {
  double worst = 0.0;
  std::size_t checked = 0;
  for (auto [depth, width, skip] : {std::tuple{3, 16, 2}, std::tuple{6, 12, 2}, std::tuple{5, 10, 1}, std::tuple{7, 8, 3}}) {
    NetConfig config;
    config.depth = depth;
    config.width = width;
    config.skip = skip;
    PolicyValueNet<double> net(config, o.seed + static_cast<std::uint64_t>(depth));
    auto batch = gradient_batch(5, o.seed);
    std::vector<PolicyValueNet<double>::Layer> grads;
    net.loss_and_gradient(batch, grads);
    std::vector<double> analytic;
    for (const auto& l : grads) {
      analytic.insert(analytic.end(), l.weight.data(), l.weight.data() + l.weight.size());
      analytic.insert(analytic.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    const double h = 1e-6;
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
      double saved = net.parameter(i);
      net.parameter(i) = saved + h;
      double up = net.loss(batch);
      net.parameter(i) = saved - h;
      double down = net.loss(batch);
      net.parameter(i) = saved;
      double numeric = (up - down) / (2 * h);
      double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-3});
      worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("%zu parameters over 4 shapes, worst relative error %.2e", checked, worst)};
}

Outcome ladder(const Options& o) {
  auto t0 = Clock::now();
  constexpr int kDeals = 2000;
  RandomAgent random;
  IfAgent mr_if;
  GreedAgent greed;
  EvalReport a = match(mr_if, random, kDeals, derive_seed(o.seed, 21));
  EvalReport b = match(greed, mr_if, kDeals, derive_seed(o.seed, 22));
  const double secs = seconds_since(t0);
  return {a.wpg > 0 && a.z() > 3 && b.wpg > 0 && b.z() > 3 && secs < 600.0,
          fmt("If vs Random %.2f +- %.2f (z %.1f); Greed vs If %.2f +- %.2f (z %.1f); %d paired deals each, %.0f s",
              a.wpg, a.stderr_, a.z(), b.wpg, b.stderr_, b.z(), kDeals, secs)};
}

// Desk-scale run used by the criteria that need a trained network.
Outcome train(const Options& o) {
  TrainRunConfig config;
  config.net.depth = 4;
  config.net.width = 128;
  config.games_per_batch = 64;
  config.seed = o.seed;
  auto dir = o.work / "train";
  std::filesystem::remove_all(dir);
  auto t0 = Clock::now();
  Trainer trainer(config, dir);
  auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(o.train_minutes * 60));
  auto reports = trainer.run(1 << 30, deadline);
  const auto& last = reports.back().metrics;
  return {std::filesystem::exists(dir / "latest.gzpv"),
          fmt("%d batches of %d games in %.1f min, final kl %.4f value %.4f, checkpoint %s", trainer.batches_done(),
              config.games_per_batch, seconds_since(t0) / 60, last.kl, last.value_loss,
              (dir / "latest.gzpv").string().c_str())};
}

Outcome training_signal(const Options& o) {
  auto net = load_net(o);
  constexpr int kDeals = 200;
  RandomAgent random;
  auto trained = make_agent("scrofa", net);
  EvalReport r = match(*trained, random, kDeals, derive_seed(o.seed, 31));
  // Same evaluation for the untrained network, for context.
  NetConfig shape = net->config();
  auto fresh = make_agent("scrofa", std::make_shared<const Network>(shape, o.seed));
  EvalReport r0 = match(*fresh, random, kDeals, derive_seed(o.seed, 31));
  return {r.wpg > 0 && r.z() > 3,
          fmt("trained net+search vs Random %.2f +- %.2f (z %.1f) over %d paired deals; untrained %.2f +- %.2f", r.wpg,
              r.stderr_, r.z(), kDeals, r0.wpg, r0.stderr_)};
}

Outcome sampling_ablation(const Options& o) {
  auto t0 = Clock::now();
  auto net = load_net(o);
  constexpr int kDeals = 4000;
  GreedAgent greed;
  auto ss = make_agent("scrofa", net);
  auto us = make_agent("scrofa-us", net);
  const std::uint64_t seed = derive_seed(o.seed, 41);
  EvalReport a = match(*ss, greed, kDeals, seed);
  EvalReport b = match(*us, greed, kDeals, seed);
  // Same deals and seat generators: compare per deal.
  double mean = 0.0, ss2 = 0.0;
  for (int d = 0; d < kDeals; ++d) mean += a.observations[static_cast<std::size_t>(d)] - b.observations[static_cast<std::size_t>(d)];
  mean /= kDeals;
  for (int d = 0; d < kDeals; ++d) {
    double x = a.observations[static_cast<std::size_t>(d)] - b.observations[static_cast<std::size_t>(d)] - mean;
    ss2 += x * x;
  }
  const double se = std::sqrt(ss2 / (kDeals - 1) / kDeals);
  const double z = se > 0 ? mean / se : 0.0;
  const double p = upper_tail(z);
  return {mean > 0 && p < 0.05,
          fmt("vs Greed over %d paired deals: SS+IEC %.2f +- %.2f, US %.2f +- %.2f; difference %.2f +- %.2f, "
              "one-sided p %.3f; %.0f min",
              kDeals, a.wpg, a.stderr_, b.wpg, b.stderr_, mean, se, p, seconds_since(t0) / 60)};
}

PairwiseScore from_ratings(const std::vector<double>& r) {
  PairwiseScore xi(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) xi.set(i, j, r[i] - r[j]);
  }
  return xi;
}

Outcome epsilon_metric(const Options& o) {
  auto t0 = Clock::now();
  Rng rng(o.seed);
  std::uniform_int_distribution<int> entry(-300, 300);
  int failures = 0;
  for (int k = 0; k < 2000; ++k) {
    const std::size_t n = 3 + static_cast<std::size_t>(k % 6);
    // Integer ratings keep every difference exact.
    std::vector<double> ratings(n);
    for (double& r : ratings) r = entry(rng);
    if (epsilon(from_ratings(ratings)) != 0.0) ++failures;
    std::vector<double> shifted = ratings;
    for (double& r : shifted) r += entry(rng);
    if (epsilon(from_ratings(shifted)) != 0.0) ++failures;

    PairwiseScore xi(n), scaled(n), permuted(n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) xi.set(i, j, entry(rng));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        scaled.set(i, j, 8.0 * xi.at(i, j));
        permuted.set(perm[i], perm[j], xi.at(i, j));
      }
    }
    const double e = epsilon(xi);
    if (e < 0.0 || e > 1.0 || epsilon(scaled) != e || epsilon(permuted) != e) ++failures;
  }
  PairwiseScore rps(3);
  rps.set(0, 1, -1);
  rps.set(1, 2, -1);
  rps.set(0, 2, 1);
  const double e_rps = epsilon(rps);
  if (e_rps != 1.0) ++failures;

  auto net = load_net(o);
  RandomAgent random;
  IfAgent mr_if;
  GreedAgent greed;
  auto scrofa = make_agent("scrofa", net);
  std::vector<const Agent*> desk{&random, &mr_if, &greed, scrofa.get()};
  constexpr int kDeals = 200;
  CombatResult combat = combat_matrix(desk, kDeals, derive_seed(o.seed, 51));
  EpsilonEstimate est = epsilon_bootstrap(combat, 200, o.seed);
  std::ostringstream row;
  for (std::size_t i = 0; i < desk.size(); ++i) {
    for (std::size_t j = i + 1; j < desk.size(); ++j) {
      row << " " << combat.names[i] << ">" << combat.names[j] << "=" << fmt("%.1f", combat.scores.at(i, j));
    }
  }
  const bool ok = failures == 0 && std::isfinite(est.value) && std::isfinite(est.stderr_) && est.value < 0.25;
  return {ok, fmt("exact properties: %d failures (RPS %.3f); desk {random, if, greed, scrofa} eps %.4f +- %.4f over %d "
                  "paired deals per pair;",
                  failures, e_rps, est.value, est.stderr_, kDeals) +
                  row.str() + fmt("; %.0f s", seconds_since(t0))};
}

// ---------------------------------------------------------------------------------------

class TablePrior final : public PolicyPrior {
 public:
  explicit TablePrior(std::array<double, kNumCards> q) : q_(q) {}
  std::array<double, kNumCards> logits(PlayerId, CardSet, std::span<const PlayEvent>, PlayerId) const override {
    return q_;
  }

 private:
  std::array<double, kNumCards> q_;
};

Card card(const char* t) { return *Card::parse(t); }

Outcome iec_oracle(const Options&) {
  // Seat 1 leads D9 and loses to seat 2's DQ; seat 2 leads SJ; the observer (seat 0) is
  // next. Only the two leads are scored: DQ follows a suit other than the current one and
  // the remaining plays are low or the observer's own.
  const PlayerId observer = 0;
  std::vector<PlayEvent> history{{1, card("D9")}, {2, card("DQ")}, {3, card("D3")}, {0, card("D4")},
                                 {2, card("SJ")}, {3, card("S3")}};
  CardSet mine;
  for (const char* t : {"D4", "S2", "S4", "S5", "H2", "H3", "H4", "D5", "D6", "C2", "C3", "C4", "C5"}) mine.insert(card(t));
  CardSet played;
  for (const auto& e : history) played.insert(e.card);
  const std::array<Card, 3> tracked{card("HA"), card("CK"), card("HQ")};
  CardSet tracked_set;
  for (Card c : tracked) tracked_set.insert(c);
  CardSet unseen = CardSet::full() - mine - played;
  CardSet irrelevant = unseen - tracked_set;
  CardSet opponent_played = played - CardSet{card("D4")};

  PlayerView view(observer, mine - CardSet{card("D4")}, history, 1);
  const std::array<int, kNumPlayers> sizes{12, 12, 11, 11};

  int cases = 0, strict_pairs = 0, discordant = 0, product_errors = 0;
  for (const std::array<double, 3>& tq : {std::array<double, 3>{2.0, 1.0, 0.5}, std::array<double, 3>{1.2, 0.6, -0.4},
                                          std::array<double, 3>{3.0, 1.5, 0.2}}) {
    std::array<double, kNumCards> q{};  // irrelevant and played cards at 0
    for (int k = 0; k < 3; ++k) q[static_cast<std::size_t>(tracked[static_cast<std::size_t>(k)].index())] = tq[static_cast<std::size_t>(k)];
    TablePrior prior(q);
    BeliefConfig config;
    config.beta = 1.0;

    std::vector<double> iec, explicit_score;
    for (int code = 0; code < 27; ++code) {
      Scenario sc;
      sc.observer = observer;
      sc.hands[observer] = view.hand();
      int rest = code;
      for (Card c : tracked) {
        sc.hands[static_cast<std::size_t>(1 + rest % 3)].insert(c);
        rest /= 3;
      }
      PlayerId p = 1;
      for (Card c : irrelevant) {
        while (sc.hands[p].size() >= sizes[p]) ++p;
        sc.hands[p].insert(c);
      }
      ScenarioScore s = iec_score(view, sc, prior, config);

      // Hands when each scored card was played: the current hand plus that player's later plays.
      auto hand_at = [&](std::size_t t) {
        CardSet h = sc.hands[history[t].player];
        for (std::size_t u = t; u < history.size(); ++u) {
          if (history[u].player == history[t].player) h.insert(history[u].card);
        }
        return h;
      };
      // Correction factors are relative to the actor's best card at that slice. Irrelevant
      // cards keep the factor they have in a hand without relevant cards, so J is fixed.
      const double j_third = static_cast<double>(irrelevant.size()) / 3.0;
      double expected = 1.0, normalized = 1.0;
      for (std::size_t t : {std::size_t{0}, std::size_t{4}}) {
        CardSet h = hand_at(t);
        double q_max = -1e300;
        for (Card c : h) q_max = std::max(q_max, q[static_cast<std::size_t>(c.index())]);
        auto gamma = [&](Card c) { return std::exp(-config.beta * (q_max - q[static_cast<std::size_t>(c.index())])); };
        double y = 0.0;
        for (Card c : h) {
          if (opponent_played.contains(c) || tracked_set.contains(c)) y += gamma(c);
        }
        expected *= gamma(history[t].card);
        normalized *= gamma(history[t].card) / (y + j_third);
      }
      if (s.factors.size() != 2 || std::abs(s.score - expected) > 1e-12 * expected) ++product_errors;
      iec.push_back(s.score);
      explicit_score.push_back(normalized);
    }
    for (int a = 0; a < 27; ++a) {
      for (int b = 0; b < 27; ++b) {
        if (iec[static_cast<std::size_t>(a)] > iec[static_cast<std::size_t>(b)] * (1 + 1e-12)) {
          ++strict_pairs;
          if (explicit_score[static_cast<std::size_t>(a)] < explicit_score[static_cast<std::size_t>(b)]) ++discordant;
        }
      }
    }
    ++cases;
  }
  return {product_errors == 0 && discordant == 0,
          fmt("%d crafted cases x 27 assignments: %d product errors, %d of %d strictly ordered pairs reversed by the "
              "normalized product",
              cases, product_errors, discordant, strict_pairs)};
}

// ---------------------------------------------------------------------------------------

class FuzzChannel final : public service::Channel {
 public:
  void send(const Json& m) override {
    std::lock_guard lock(mutex);
    inbox.push_back(m);
  }
  void close() override {}
  std::vector<Json> take() {
    std::lock_guard lock(mutex);
    std::vector<Json> out;
    out.swap(inbox);
    return out;
  }
  std::mutex mutex;
  std::vector<Json> inbox;
};

struct FuzzClient {
  std::shared_ptr<FuzzChannel> channel = std::make_shared<FuzzChannel>();
  std::shared_ptr<service::Server::Session> session;
  std::vector<Json> seen;
  std::optional<Json> turn;
  bool greeted = false;
  bool alive = true;
};

std::string random_bytes(Rng& rng) {
  std::string s(1 + rng() % 80, ' ');
  for (char& c : s) {
    c = static_cast<char>(rng() % 256);
    if (c == '\n') c = '{';
  }
  return s;
}

Json random_message(Rng& rng, const std::vector<std::string>& tables) {
  static const std::vector<std::string> kNames{"random", "if", "greed", "nobody", ""};
  auto pick_card = [&]() -> Json {
    switch (rng() % 4) {
      case 0: return "ZZ";
      case 1: return static_cast<int>(rng() % 60);
      default: return Card::from_index(static_cast<int>(rng() % kNumCards)).to_string();
    }
  };
  switch (rng() % 8) {
    case 0: return {{"type", "hello"}, {"name", "fuzz"}, {"hints", rng() % 2 == 0}};
    case 1: return {{"type", "hello"}, {"token", std::to_string(rng())}};
    case 2: {
      Json fill = Json::array();
      for (int p = 0; p < kNumPlayers; ++p) fill.push_back(kNames[rng() % kNames.size()]);
      Json m = {{"type", "seat"}, {"seat", static_cast<int>(rng() % 6) - 1}};
      if (rng() % 3) m["fill"] = fill;
      return m;
    }
    case 3: {
      Json m = {{"type", "seat"}, {"seat", static_cast<int>(rng() % 4)}};
      m["table"] = tables.empty() || rng() % 3 == 0 ? std::string("t999999") : tables[rng() % tables.size()];
      return m;
    }
    case 4: return {{"type", "play"}, {"card", pick_card()}};
    case 5: return {{"type", "state_sync"}};
    case 6: return {{"type", "play"}};
    default: return {{"type", std::string(1, static_cast<char>('a' + rng() % 26))}, {"x", 1}};
  }
}

Outcome service_replay(const Options& o) {
  auto t0 = Clock::now();
  auto store_dir = o.work / "service_store";
  std::filesystem::remove_all(store_dir);
  service::ServerConfig config;
  config.agents = {"random", "if", "greed"};
  config.store = store_dir;
  config.turn_timeout = std::chrono::milliseconds(5);
  config.seed = o.seed;
  std::size_t expected_games = 0;
  int violations = 0, transcript_mismatches = 0, transcripts = 0, tcp_ok = 0;
  {
    service::Server server(config);
    server.start();

    for (std::uint64_t g = 0; g < 10; ++g) {
      server.play_local({"greed", "if", "random", "greed"}, derive_seed(o.seed, 61, g), {g, g + 1, g + 2, g + 3});
      ++expected_games;
    }

    // Raw TCP noise, then one well-behaved greeting to show the listener survived.
    Rng rng(o.seed);
    for (int k = 0; k < 40; ++k) {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_port = htons(static_cast<std::uint16_t>(server.port()));
      ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
        std::string junk;
        for (int l = 0; l < 5; ++l) junk += random_bytes(rng) + (rng() % 2 ? "\n" : "");
        if (k % 2) junk += R"({"type":"hello"})" "\n" R"({"type":"seat","seat":1})" "\n";
        if (k % 5 == 0) junk += std::string(service::kMaxLineBytes + 10, 'x');
        ::send(fd, junk.data(), junk.size(), MSG_NOSIGNAL);
      }
      ::close(fd);
    }
    {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_port = htons(static_cast<std::uint16_t>(server.port()));
      ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
        std::string hello = R"({"type":"hello","name":"probe"})" "\n";
        ::send(fd, hello.data(), hello.size(), MSG_NOSIGNAL);
        char buf[4096];
        ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n > 0 && Json::parse(std::string(buf, static_cast<std::size_t>(n)).substr(0, static_cast<std::size_t>(n) - 1))["type"] == "hello") tcp_ok = 1;
      }
      ::close(fd);
    }

    // In-process sessions mixing garbage, plausible but wrong messages and real play.
    std::vector<FuzzClient> clients(24);
    std::vector<std::string> tables;
    std::set<std::string> all_tables;
    for (auto& c : clients) c.session = server.open_session(c.channel);
    for (int step = 0; step < 30000; ++step) {
      FuzzClient& c = clients[rng() % clients.size()];
      if (!c.alive) {
        server.close_session(c.session);
        for (auto& m : c.channel->take()) c.seen.push_back(std::move(m));
        for (const auto& m : c.seen) {
          if (m["type"] == "seat") all_tables.insert(m["table"].get<std::string>());
        }
        c = FuzzClient{};
        c.session = server.open_session(c.channel);
      }
      for (auto& m : c.channel->take()) {
        if (m["type"] == "seat") tables.push_back(m["table"]);
        if (m["type"] == "your_turn") c.turn = m;
        c.seen.push_back(std::move(m));
      }
      std::string line;
      const auto roll = rng() % 10;
      const bool steady = &c < &clients[8];  // never breaks the protocol, so it sees whole games
      if (steady) {
        if (!c.greeted) {
          line = Json{{"type", "hello"}, {"name", "steady"}}.dump();
          c.greeted = true;
        } else if (c.turn && roll < 6) {
          const Json& legal = (*c.turn)["legal"];
          line = Json{{"type", "play"}, {"card", legal[rng() % legal.size()]}}.dump();
          c.turn.reset();
        } else if (roll < 8) {
          line = Json{{"type", "play"}, {"card", Card::from_index(static_cast<int>(rng() % kNumCards)).to_string()}}.dump();
        } else if (roll < 9) {
          line = Json{{"type", "seat"}, {"seat", static_cast<int>(rng() % 4)}}.dump();
        } else {
          line = Json{{"type", "state_sync"}}.dump();
        }
      } else if (roll < 2) {
        line = random_bytes(rng);
      } else if (roll < 5 && c.turn) {
        // A legal answer to the last prompt (it may be stale by now).
        const Json& legal = (*c.turn)["legal"];
        line = Json{{"type", "play"}, {"card", legal[rng() % legal.size()]}}.dump();
        c.turn.reset();
      } else {
        line = random_message(rng, tables).dump();
      }
      if (!server.handle_line(c.session, line)) c.alive = false;
      if (step % 50 == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    // Silent seats time out, so every table finishes with its sessions still attached.
    if (!server.wait_idle(std::chrono::minutes(5))) ++violations;

    // Every game a client watched from deal to result must match what was stored.
    for (auto& c : clients) {
      for (auto& m : c.channel->take()) c.seen.push_back(std::move(m));
      std::map<std::string, std::vector<std::string>> plays;
      for (const auto& m : c.seen) {
        if (m["type"] == "deal") plays[m["table"]].clear();
        if (m["type"] == "play") plays[m["table"]].push_back(m["card"]);
        if (m["type"] == "seat") all_tables.insert(m["table"].get<std::string>());
        if (m["type"] == "game_result") {
          auto stored = server.store().find(m["match"]);
          if (!stored) {
            ++transcript_mismatches;
            continue;
          }
          GameState end = parse_game(stored->record);
          std::vector<std::string> recorded;
          for (const auto& e : end.history()) recorded.push_back(e.card.to_string());
          ++transcripts;
          if (recorded != plays[m["table"]]) ++transcript_mismatches;
        }
      }
    }
    for (auto& c : clients) server.close_session(c.session);
    expected_games += all_tables.size();
    server.stop();
  }

  service::MatchStore reopened(store_dir);
  int rescore_errors = 0;
  for (const auto& m : reopened.records()) {
    GameState end = parse_game(m.record);
    auto ref = testing::reference_replay(end);
    if (!end.finished() || !ref.violation.empty() || ref.per_player != m.scores || !m.replays()) ++rescore_errors;
  }
  const bool ok = violations == 0 && rescore_errors == 0 && transcript_mismatches == 0 && reopened.rejected() == 0 &&
                  reopened.size() == expected_games && tcp_ok == 1 && transcripts > 0;
  return {ok, fmt("%zu stored games (%zu expected), %d re-score errors, %zu rejected lines, %d of %d watched transcripts mismatched, "
                  "listener alive after TCP noise: %s; %.1f s",
                  reopened.size(), expected_games, rescore_errors, reopened.rejected(), transcript_mismatches, transcripts,
                  tcp_ok ? "yes" : "no", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>> criteria{
      {"scoring-oracle", scoring_oracle},       {"rules-fuzz", rules_fuzz},
      {"mcts-oracle", mcts_oracle},             {"gradient-check", gradient_check},
      {"ladder", ladder},                       {"training-signal", training_signal},
      {"sampling-ablation", sampling_ablation}, {"epsilon", epsilon_metric},
      {"iec-oracle", iec_oracle},               {"service-replay", service_replay},
  };

  CLI::App app{"Gongzhu acceptance criteria"};
  Options o;
  std::string which;
  app.add_option("criterion", which, "criterion name, `train` or `all`")->required();
  app.add_option("--work", o.work, "scratch directory");
  app.add_option("--net", o.net, "checkpoint for the network criteria (default: <work>/train/latest.gzpv)");
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--train-minutes", o.train_minutes, "training budget for `train`");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(o.work);

  auto run = [&](const std::string& name, const std::function<Outcome(const Options&)>& f) {
    Outcome out;
    try {
      out = f(o);
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str());
    std::fflush(stdout);
    return out.pass;
  };

  if (which == "train") return run("train", train) ? 0 : 1;
  if (which == "all") {
    bool ok = true;
    if (o.net.empty()) run("train", train);
    for (const auto& [name, f] : criteria) ok = run(name, f) && ok;
    return ok ? 0 : 1;
  }
  for (const auto& [name, f] : criteria) {
    if (name == which) return run(name, f) ? 0 : 1;
  }
  std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
  return 2;
}
