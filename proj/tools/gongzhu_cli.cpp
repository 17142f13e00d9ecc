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

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "gongzhu/belief.hpp"
#include "gongzhu/errors.hpp"
#include "gongzhu/eval.hpp"
#include "gongzhu/json_io.hpp"
#include "gongzhu/record.hpp"
#include "gongzhu/service/server.hpp"
#include "gongzhu/trainer.hpp"

namespace {

using namespace gongzhu;

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

std::shared_ptr<const Network> maybe_load(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const Network>(load_network(path));
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

struct TrainArgs {
  int games_per_batch = 64;
  int batches = 100;
  std::uint64_t seed = 1;
  std::string out = "run";
  std::string init;
  double minutes = 0;
  int depth = NetConfig{}.depth;
  int width = NetConfig{}.width;
  int skip = NetConfig{}.skip;
  int threads = 1;
  int eval_every = 0;
  int eval_deals = 64;
};

int run_train(const TrainArgs& a) {
  TrainRunConfig config;
  config.games_per_batch = a.games_per_batch;
  config.seed = a.seed;
  config.threads = a.threads;
  config.eval_every = a.eval_every;
  config.eval_deals = a.eval_deals;
  config.net.depth = a.depth;
  config.net.width = a.width;
  config.net.skip = a.skip;

  std::optional<Trainer> trainer;
  if (a.init.empty()) {
    trainer.emplace(config, std::filesystem::path(a.out));
  } else {
    Network init = load_network(a.init);
    config.net = init.config();
    trainer.emplace(config, std::move(init), std::filesystem::path(a.out));
  }
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (a.minutes > 0) {
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(a.minutes * 60));
  }
  trainer->run(a.batches, deadline, [](const BatchReport& r) {
    std::fprintf(stderr, "batch %d  kl %.4f  v %.4f  window %zu  %.1fs", r.batch, r.metrics.kl, r.metrics.value_loss,
                 r.window_samples, r.seconds);
    if (r.progress) {
      std::fprintf(stderr, "  wpg_random %.1f (%.1f)  wpg_greed %.1f (%.1f)", r.progress->wpg_random,
                   r.progress->stderr_random, r.progress->wpg_greed, r.progress->stderr_greed);
    }
    std::fputc('\n', stderr);
  });
  std::printf("%d batches written to %s\n", trainer->batches_done(), a.out.c_str());
  return 0;
}

struct EvalArgs {
  std::string a = "scrofa", b = "greed";
  int deals = 1024;
  bool paired = false;
  std::uint64_t seed = 1;
  std::string json;
  std::string net;
  int threads = 1;
  bool observations = false;
};

int run_eval(const EvalArgs& e) {
  auto net = maybe_load(e.net);
  auto a = make_agent(e.a, net);
  auto b = make_agent(e.b, net);
  EvalReport r = match(*a, *b, e.deals, e.seed, e.paired, e.threads);
  std::printf("%s vs %s: wpg %.2f +- %.2f over %d deals (%d games), z %.2f, win %.3f draw %.3f loss %.3f\n",
              e.a.c_str(), e.b.c_str(), r.wpg, r.stderr_, r.deals, r.games, r.z(), r.win_rate, r.draw_rate,
              r.loss_rate);
  if (!e.json.empty()) {
    std::ofstream out(e.json);
    out << eval_report_to_json(r, e.a, e.b, e.seed, e.paired, e.observations).dump(2) << '\n';
    if (!out) throw GongzhuError("cannot write " + e.json);
  }
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 7878;
  int http_port = -1;
  std::string agents = "greed";
  std::string store = "store";
  std::string static_dir;
  std::string net;
  int timeout_ms = 30000;
  std::uint64_t seed = 1;
  std::string belief_log;
};

int run_serve(const ServeArgs& s) {
  service::ServerConfig config;
  config.host = s.host;
  config.port = s.port;
  config.http_port = s.http_port;
  config.agents = split(s.agents);
  if (config.agents.empty()) throw GongzhuError("--agents must name at least one agent");
  config.store = s.store;
  if (!s.static_dir.empty()) config.static_dir = s.static_dir;
  config.network = maybe_load(s.net);
  config.turn_timeout = std::chrono::milliseconds(s.timeout_ms);
  config.seed = s.seed;
  if (!s.belief_log.empty()) config.belief_log = s.belief_log;

  service::Server server(config);
  server.start();
  std::printf("listening on %s:%d", s.host.c_str(), server.port());
  if (server.http_port() >= 0) std::printf(", http on %d", server.http_port());
  std::printf(" (%zu stored games)\n", server.store().size());
  std::fflush(stdout);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int run_rescore(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw GongzhuError("cannot open " + path);
    in = &file;
  }
  int bad = 0, line_no = 0;
  std::string line;
  while (std::getline(*in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      GameState s = parse_game(line);
      if (!s.finished()) {
        std::printf("%d: unfinished after %d plays\n", line_no, s.num_played());
        continue;
      }
      Score sc = score(s.piles());
      std::printf("%d: %d %d %d %d\n", line_no, sc.per_player[0], sc.per_player[1], sc.per_player[2],
                  sc.per_player[3]);
    } catch (const GongzhuError& e) {
      ++bad;
      std::printf("%d: error: %s\n", line_no, e.what());
    }
  }
  return bad ? 1 : 0;
}

int run_belief(const std::string& record, const std::string& net_path, std::uint64_t seed, double beta) {
  auto net = maybe_load(net_path);
  if (!net) throw GongzhuError("belief needs --net");
  GameState s = parse_game(record);
  if (s.finished()) throw GongzhuError("the game is over; nothing to decide");
  BeliefConfig config;
  config.beta = beta;
  BeliefAgent agent("scrofa", net, config);
  Rng rng(seed);
  BeliefDecision d = agent.decide(PlayerView(s, s.to_play()), rng);
  std::cout << belief_to_json(d).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gongzhu engine, agents, training and arena"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "self-play training");
  t->add_option("--games-per-batch", train.games_per_batch)->check(CLI::PositiveNumber);
  t->add_option("--batches", train.batches)->check(CLI::PositiveNumber);
  t->add_option("--seed", train.seed);
  t->add_option("--out", train.out, "output directory");
  t->add_option("--init", train.init, "start from this checkpoint");
  t->add_option("--minutes", train.minutes, "wall-clock budget (0 = none)");
  t->add_option("--depth", train.depth);
  t->add_option("--width", train.width);
  t->add_option("--skip", train.skip);
  t->add_option("--threads", train.threads)->check(CLI::PositiveNumber);
  t->add_option("--eval-every", train.eval_every, "batches between baseline evaluations (0 = off)");
  t->add_option("--eval-deals", train.eval_deals);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "head-to-head evaluation");
  e->add_option("--a", ev.a);
  e->add_option("--b", ev.b);
  e->add_option("--deals", ev.deals)->check(CLI::PositiveNumber);
  e->add_flag("--paired", ev.paired, "replay each deal with teams swapped");
  e->add_option("--seed", ev.seed);
  e->add_option("--json", ev.json, "write the report here");
  e->add_option("--net", ev.net, "checkpoint for network agents");
  e->add_option("--threads", ev.threads)->check(CLI::PositiveNumber);
  e->add_flag("--observations", ev.observations, "include per-deal values in the JSON");

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "arena server");
  s->add_option("--host", sv.host);
  s->add_option("--port", sv.port);
  s->add_option("--http-port", sv.http_port, "-1 disables HTTP");
  s->add_option("--agents", sv.agents, "comma-separated agent names");
  s->add_option("--store", sv.store);
  s->add_option("--static", sv.static_dir, "directory served at /");
  s->add_option("--net", sv.net);
  s->add_option("--timeout-ms", sv.timeout_ms)->check(CLI::PositiveNumber);
  s->add_option("--seed", sv.seed);
  s->add_option("--belief-log", sv.belief_log, "append belief dumps as JSON lines");

  std::uint64_t deal_seed = 1;
  auto* d = app.add_subcommand("deal", "print the record of a fresh deal");
  d->add_option("--seed", deal_seed);

  std::string rescore_path;
  auto* r = app.add_subcommand("rescore", "replay records and print their scores");
  r->add_option("file", rescore_path, "records, one per line (default stdin)");

  std::string belief_record, belief_net;
  std::uint64_t belief_seed = 1;
  double belief_beta = BeliefConfig{}.beta;
  auto* b = app.add_subcommand("belief", "dump the belief behind the next play of a record");
  b->add_option("--record", belief_record)->required();
  b->add_option("--net", belief_net)->required();
  b->add_option("--seed", belief_seed);
  b->add_option("--beta", belief_beta);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*t) return run_train(train);
    if (*e) return run_eval(ev);
    if (*s) return run_serve(sv);
    if (*d) {
      std::printf("%s\n", serialize_game(deal(deal_seed)).c_str());
      return 0;
    }
    if (*r) return run_rescore(rescore_path);
    if (*b) return run_belief(belief_record, belief_net, belief_seed, belief_beta);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
