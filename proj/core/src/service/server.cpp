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

#include "gongzhu/service/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "gongzhu/belief.hpp"
#include "gongzhu/errors.hpp"

namespace gongzhu::service {
namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Json error_message(std::string_view code, std::string_view message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

std::string random_token(Rng& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 32; ++i) out.push_back(kHex[rng() % 16]);
  return out;
}

Json piles_json(const std::array<CardSet, kNumPlayers>& piles) {
  Json out = Json::array();
  for (const CardSet& p : piles) out.push_back(cards_to_json(p & kPointCards));
  return out;
}

// Connection over a socket; send() may be called from table threads.
class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  ~TcpChannel() override { ::close(fd_); }

  void send(const Json& message) override {
    std::string line = message.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
    std::lock_guard lock(mutex_);
    if (closed_) return;
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      ssize_t n = ::send(fd_, p, left, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        closed_ = true;
        return;
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  void close() override {
    std::lock_guard lock(mutex_);
    if (!closed_) ::shutdown(fd_, SHUT_RDWR);
    closed_ = true;
  }

  int fd() const { return fd_; }

 private:
  int fd_;
  std::mutex mutex_;
  bool closed_ = false;
};

// Queue read by HTTP polling.
class PollChannel final : public Channel {
 public:
  void send(const Json& message) override {
    {
      std::lock_guard lock(mutex_);
      messages_.push_back(message);
    }
    cv_.notify_all();
  }
  void close() override {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }
  // Messages from index `since` on, waiting up to `wait` for the first one.
  std::pair<Json, std::size_t> poll(std::size_t since, std::chrono::milliseconds wait) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, wait, [&] { return messages_.size() > since || closed_; });
    Json out = Json::array();
    for (std::size_t i = since; i < messages_.size(); ++i) out.push_back(messages_[i]);
    return {out, messages_.size()};
  }
  bool closed() {
    std::lock_guard lock(mutex_);
    return closed_;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Json> messages_;
  bool closed_ = false;
};

}  // namespace

struct Server::Session {
  std::shared_ptr<Channel> channel;
  std::mutex mutex;
  bool greeted = false;
  bool hints = false;
  std::string name = "anonymous";
  std::string table;
  int seat = -1;
  bool closed = false;
};

namespace {

struct SeatSlot {
  std::string name;
  std::shared_ptr<const Agent> agent;  // server-side player
  bool remote = false;
  bool claimed = false;
  std::string token;
  std::shared_ptr<Server::Session> session;  // null while disconnected
};

struct Inbound {
  int seat;
  Card card;
};

}  // namespace

struct Table {
  std::string id;
  std::array<SeatSlot, kNumPlayers> seats;
  std::uint64_t deal_seed = 0;
  std::uint64_t rng_seed = 0;

  std::mutex mutex;
  std::condition_variable cv;
  std::optional<GameState> state;
  int awaiting = -1;
  std::deque<Inbound> inbox;
  bool started = false;
  bool done = false;
  std::thread worker;

  std::array<std::string, kNumPlayers> names() const {
    std::array<std::string, kNumPlayers> out;
    for (int p = 0; p < kNumPlayers; ++p) out[static_cast<std::size_t>(p)] = seats[static_cast<std::size_t>(p)].name;
    return out;
  }
};

struct Server::Impl {
  explicit Impl(ServerConfig c) : config(std::move(c)), store(config.store), rng(config.seed) {}

  ServerConfig config;
  MatchStore store;
  std::map<std::string, std::shared_ptr<const Agent>> agents;
  std::unique_ptr<RandomAgent> random = std::make_unique<RandomAgent>();
  std::shared_ptr<const BeliefAgent> hint_agent;  // set when a network is loaded

  std::mutex mutex;  // guards the members below
  std::condition_variable idle_cv;
  Rng rng;
  std::uint64_t table_counter = 0;
  std::map<std::string, std::shared_ptr<Table>> tables;
  std::map<std::string, std::pair<std::string, int>> tokens;  // token -> (table, seat)
  std::map<std::string, std::shared_ptr<PollChannel>> bridges;
  std::map<std::string, std::shared_ptr<Session>> bridge_sessions;
  std::atomic<bool> stopping{false};

  int listen_fd = -1;
  int bound_port = 0;
  std::thread acceptor;
  std::vector<std::thread> connection_threads;
  std::vector<std::weak_ptr<TcpChannel>> connections;

  std::unique_ptr<httplib::Server> http;
  int bound_http_port = -1;
  std::thread http_thread;
  std::vector<std::thread> background;

  std::mutex belief_mutex;

  std::shared_ptr<const Agent> agent(const std::string& name) {
    std::lock_guard lock(mutex);
    auto it = agents.find(name);
    if (it != agents.end()) return it->second;
    std::shared_ptr<const Agent> a = make_agent(name, config.network);
    agents.emplace(name, a);
    return a;
  }

  void log_belief(const Table& t, const BeliefDecision& d) {
    if (!config.belief_log) return;
    Json line = belief_to_json(d);
    line["table"] = t.id;
    line["history_length"] = t.state ? t.state->num_played() : 0;
    std::lock_guard lock(belief_mutex);
    std::ofstream out(*config.belief_log, std::ios::app);
    out << line.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
  }
};

namespace {

void send_to(SeatSlot& slot, const Json& message) {
  if (slot.session) slot.session->channel->send(message);
}

Json state_sync(const Table& t, int seat) {
  const GameState& s = *t.state;
  return {{"type", "state_sync"},
          {"table", t.id},
          {"seat", seat},
          {"seats", t.names()},
          {"leader", s.first_leader()},
          {"hand", cards_to_json(s.hand(static_cast<PlayerId>(seat)))},
          {"history", history_to_json(s.history())},
          {"trick", history_to_json(s.current_trick())},
          {"to_play", s.finished() ? -1 : s.to_play()},
          {"piles", piles_json(s.piles())},
          {"finished", s.finished()}};
}

}  // namespace

namespace {

Json your_turn(Table& t, int seat, Server::Impl& impl, Rng& rng) {
  const GameState& s = *t.state;
  PlayerView view(s, static_cast<PlayerId>(seat));
  Json msg = {{"type", "your_turn"},
              {"table", t.id},
              {"legal", cards_to_json(view.legal_moves())},
              {"trick", history_to_json(s.current_trick())},
              {"deadline_ms", impl.config.turn_timeout.count()}};
  SeatSlot& slot = t.seats[static_cast<std::size_t>(seat)];
  if (slot.session && slot.session->hints && impl.hint_agent) {
    msg["hint"] = belief_to_json(impl.hint_agent->decide(view, rng));
  }
  return msg;
}

// Plays a table's game to the end. Runs on the table's own thread.
void run_table(Server::Impl& impl, const std::shared_ptr<Table>& t) {
  std::unique_lock lock(t->mutex);
  t->cv.wait(lock, [&] {
    if (impl.stopping) return true;
    for (const auto& s : t->seats) {
      if (s.remote && !s.claimed) return false;
    }
    return true;
  });
  if (impl.stopping) return;

  const std::int64_t started = now_ms();
  t->state = deal(t->deal_seed);
  t->started = true;
  std::array<Rng, kNumPlayers> rngs{Rng(derive_seed(t->rng_seed, 0, 1)), Rng(derive_seed(t->rng_seed, 0, 2)),
                                    Rng(derive_seed(t->rng_seed, 0, 3)), Rng(derive_seed(t->rng_seed, 0, 4))};
  for (int p = 0; p < kNumPlayers; ++p) {
    send_to(t->seats[static_cast<std::size_t>(p)],
            {{"type", "deal"},
             {"table", t->id},
             {"seat", p},
             {"seats", t->names()},
             {"leader", t->state->first_leader()},
             {"hand", cards_to_json(t->state->hand(static_cast<PlayerId>(p)))}});
  }

  while (!t->state->finished() && !impl.stopping) {
    const int p = t->state->to_play();
    SeatSlot& slot = t->seats[static_cast<std::size_t>(p)];
    Rng& rng = rngs[static_cast<std::size_t>(p)];
    Card card = Card::from_index(0);
    PlayerView view(*t->state, static_cast<PlayerId>(p));
    if (!slot.remote) {
      // Agents may be slow; let sessions talk to the table meanwhile.
      auto agent = slot.agent;
      lock.unlock();
      if (auto belief = std::dynamic_pointer_cast<const BeliefAgent>(agent); belief && impl.config.belief_log) {
        BeliefDecision d = belief->decide(view, rng);
        impl.log_belief(*t, d);
        card = d.choice;
      } else {
        card = agent->choose(view, rng);
      }
      lock.lock();
    } else {
      t->awaiting = p;
      t->inbox.clear();
      auto deadline = std::chrono::steady_clock::now() + impl.config.turn_timeout;
      if (slot.session) send_to(slot, your_turn(*t, p, impl, rng));
      for (;;) {
        t->cv.wait_until(lock, deadline, [&] { return impl.stopping || !t->inbox.empty() || !slot.session; });
        if (impl.stopping) break;
        if (!slot.session) {
          // Disconnected: Mr. Random holds the seat until the player returns.
          card = impl.random->choose(view, rng);
          break;
        }
        if (t->inbox.empty()) {
          card = impl.random->choose(view, rng);
          send_to(slot, error_message("timeout", "turn timed out; a random legal card was played"));
          break;
        }
        Inbound in = t->inbox.front();
        t->inbox.pop_front();
        if (view.legal_moves().contains(in.card)) {
          card = in.card;
          break;
        }
        send_to(slot, error_message("illegal_move", in.card.to_string() + " is not a legal play"));
        send_to(slot, your_turn(*t, p, impl, rng));
      }
      t->awaiting = -1;
      if (impl.stopping) break;
    }
    t->state = t->state->play(card);
    Json played = {{"type", "play"}, {"table", t->id}, {"seat", p}, {"card", card.to_string()}, {"ok", true}};
    for (auto& s : t->seats) send_to(s, played);
    if (t->state->num_played() % kNumPlayers == 0) {
      auto trick = t->state->last_trick();
      Json result = {{"type", "trick_result"},
                     {"table", t->id},
                     {"trick", history_to_json(trick)},
                     {"winner", t->state->trick_leader()},
                     {"piles", piles_json(t->state->piles())}};
      for (auto& s : t->seats) send_to(s, result);
    }
  }

  if (t->state->finished()) {
    MatchRecord m = make_record(impl.store.next_id(), t->names(), *t->state, started, now_ms());
    impl.store.append(m);
    Score sc = score(t->state->piles());
    Json result = {{"type", "game_result"}, {"table", t->id},          {"match", m.id},
                   {"scores", sc.per_player}, {"team_scores", sc.per_team}, {"record", m.record}};
    for (auto& s : t->seats) send_to(s, result);
  }
  t->done = true;
  lock.unlock();
  std::lock_guard server_lock(impl.mutex);
  impl.idle_cv.notify_all();
}

bool parse_port_busy(int err) { return err == EADDRINUSE || err == EACCES; }

}  // namespace

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  for (const auto& name : impl_->config.agents) impl_->agent(name);
  if (impl_->config.network) {
    impl_->hint_agent = std::dynamic_pointer_cast<const BeliefAgent>(impl_->agent("scrofa"));
  }
}

Server::~Server() { stop(); }

const ServerConfig& Server::config() const { return impl_->config; }
MatchStore& Server::store() { return impl_->store; }
int Server::port() const { return impl_->bound_port; }
int Server::http_port() const { return impl_->bound_http_port; }

std::vector<std::string> Server::agent_names() const { return impl_->config.agents; }

MatchRecord Server::play_local(const std::array<std::string, kNumPlayers>& seats, std::uint64_t deal_seed,
                               const std::array<std::uint64_t, kNumPlayers>& seat_seeds) {
  std::array<std::shared_ptr<const Agent>, kNumPlayers> owned;
  std::array<const Agent*, kNumPlayers> players{};
  for (int p = 0; p < kNumPlayers; ++p) {
    owned[static_cast<std::size_t>(p)] = impl_->agent(seats[static_cast<std::size_t>(p)]);
    players[static_cast<std::size_t>(p)] = owned[static_cast<std::size_t>(p)].get();
  }
  const std::int64_t started = now_ms();
  GameState end = play_game(players, deal(deal_seed), seat_seeds);
  MatchRecord m = make_record(impl_->store.next_id(), seats, end, started, now_ms());
  impl_->store.append(m);
  return m;
}

std::vector<MatchRecord> Server::play_match(const std::string& a, const std::string& b, int deals, std::uint64_t seed) {
  std::vector<MatchRecord> out;
  for (int d = 0; d < deals; ++d) {
    std::array<std::uint64_t, kNumPlayers> seat_seeds;
    for (int p = 0; p < kNumPlayers; ++p) {
      seat_seeds[static_cast<std::size_t>(p)] =
          derive_seed(seed, static_cast<std::uint64_t>(d), 1 + static_cast<std::uint64_t>(p));
    }
    const std::uint64_t deal_seed = derive_seed(seed, static_cast<std::uint64_t>(d), 0);
    out.push_back(play_local({a, b, a, b}, deal_seed, seat_seeds));
    out.push_back(play_local({b, a, b, a}, deal_seed, seat_seeds));
  }
  return out;
}

std::shared_ptr<Server::Session> Server::open_session(std::shared_ptr<Channel> channel) {
  auto s = std::make_shared<Session>();
  s->channel = std::move(channel);
  return s;
}

void Server::close_session(const std::shared_ptr<Session>& session) {
  std::shared_ptr<Table> table;
  int seat;
  {
    std::lock_guard lock(session->mutex);
    if (session->closed) return;
    session->closed = true;
    seat = session->seat;
    if (!session->table.empty()) {
      std::lock_guard server_lock(impl_->mutex);
      auto it = impl_->tables.find(session->table);
      if (it != impl_->tables.end()) table = it->second;
    }
  }
  session->channel->close();
  if (!table) return;
  {
    std::lock_guard lock(table->mutex);
    auto& slot = table->seats[static_cast<std::size_t>(seat)];
    if (slot.session == session) slot.session.reset();
  }
  table->cv.notify_all();
}

namespace {

int required_int(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) throw ParseError(0, std::string("missing integer field ") + key);
  return j[key].get<int>();
}

}  // namespace

bool Server::handle_line(const std::shared_ptr<Session>& session, std::string_view line) {
  auto& impl = *impl_;
  Json msg;
  try {
    if (line.size() > kMaxLineBytes) throw ParseError(kMaxLineBytes, "line too long");
    msg = Json::parse(line);
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      throw ParseError(0, "message must be an object with a string type");
    }
  } catch (const std::exception& e) {
    session->channel->send(error_message("protocol", std::string("malformed message: ") + e.what()));
    return false;
  }

  const std::string type = msg["type"].get<std::string>();
  try {
    if (type == "hello") {
      {
        std::lock_guard lock(session->mutex);
        session->greeted = true;
        if (msg.contains("name") && msg["name"].is_string()) session->name = msg["name"].get<std::string>();
        session->hints = msg.value("hints", false);
      }
      session->channel->send({{"type", "hello"},
                              {"server", "gongzhu"},
                              {"version", kProtocolVersion},
                              {"agents", impl.config.agents}});
      if (msg.contains("token")) {
        if (!msg["token"].is_string()) throw ParseError(0, "token must be a string");
        std::shared_ptr<Table> table;
        int seat = -1;
        {
          std::lock_guard lock(impl.mutex);
          auto it = impl.tokens.find(msg["token"].get<std::string>());
          if (it != impl.tokens.end()) {
            seat = it->second.second;
            auto t = impl.tables.find(it->second.first);
            if (t != impl.tables.end()) table = t->second;
          }
        }
        if (!table) {
          session->channel->send(error_message("unknown_token", "no seat for this token"));
          return true;
        }
        {
          std::lock_guard lock(session->mutex);
          session->table = table->id;
          session->seat = seat;
        }
        std::lock_guard lock(table->mutex);
        auto& slot = table->seats[static_cast<std::size_t>(seat)];
        if (slot.session && slot.session != session) slot.session->channel->close();
        slot.session = session;
        session->channel->send({{"type", "seat"}, {"table", table->id}, {"seat", seat}, {"token", slot.token},
                                {"seats", table->names()}});
        if (table->state) {
          session->channel->send(state_sync(*table, seat));
          if (table->awaiting == seat) {
            Rng rng(derive_seed(table->rng_seed, static_cast<std::uint64_t>(table->state->num_played()), 9));
            session->channel->send(your_turn(*table, seat, impl, rng));
          }
        }
        table->cv.notify_all();
      }
      return true;
    }

    {
      std::lock_guard lock(session->mutex);
      if (!session->greeted) {
        session->channel->send(error_message("protocol", "hello must come first"));
        return false;
      }
    }

    if (type == "seat") {
      {
        std::lock_guard lock(session->mutex);
        if (!session->table.empty()) {
          session->channel->send(error_message("already_seated", "this connection already holds a seat"));
          return true;
        }
      }
      int seat = msg.contains("seat") ? required_int(msg, "seat") : 0;
      if (seat < 0 || seat >= kNumPlayers) {
        session->channel->send(error_message("bad_seat", "seat must be 0..3"));
        return true;
      }
      std::shared_ptr<Table> table;
      std::string token;
      if (msg.contains("table")) {
        if (!msg["table"].is_string()) throw ParseError(0, "table must be a string");
        std::lock_guard lock(impl.mutex);
        auto it = impl.tables.find(msg["table"].get<std::string>());
        if (it == impl.tables.end()) {
          session->channel->send(error_message("unknown_table", "no such table"));
          return true;
        }
        table = it->second;
        std::lock_guard table_lock(table->mutex);
        auto& slot = table->seats[static_cast<std::size_t>(seat)];
        if (!slot.remote || slot.claimed) {
          session->channel->send(error_message("seat_taken", "that seat is not open"));
          return true;
        }
        token = random_token(impl.rng);
        slot.claimed = true;
        slot.token = token;
        slot.name = session->name;
        slot.session = session;
        impl.tokens[token] = {table->id, seat};
      } else {
        std::array<std::string, kNumPlayers> fill;
        for (int p = 0; p < kNumPlayers; ++p) {
          fill[static_cast<std::size_t>(p)] = impl.config.agents[static_cast<std::size_t>(p) % impl.config.agents.size()];
        }
        if (msg.contains("fill")) {
          auto f = msg["fill"];
          if (!f.is_array() || f.size() != kNumPlayers) throw ParseError(0, "fill must list four seats");
          for (int p = 0; p < kNumPlayers; ++p) {
            if (!f[static_cast<std::size_t>(p)].is_string()) throw ParseError(0, "fill entries must be strings");
            fill[static_cast<std::size_t>(p)] = f[static_cast<std::size_t>(p)].get<std::string>();
          }
        }
        fill[static_cast<std::size_t>(seat)] = "remote";
        table = std::make_shared<Table>();
        for (int p = 0; p < kNumPlayers; ++p) {
          auto& slot = table->seats[static_cast<std::size_t>(p)];
          const std::string& name = fill[static_cast<std::size_t>(p)];
          if (name == "remote") {
            slot.remote = true;
            slot.name = "remote";
          } else {
            bool known = false;
            for (const auto& a : impl.config.agents) known = known || a == name;
            if (!known) {
              session->channel->send(error_message("unknown_agent", "agent '" + name + "' is not served here"));
              return true;
            }
            slot.agent = impl.agent(name);
            slot.name = name;
          }
        }
        std::lock_guard lock(impl.mutex);
        char id[32];
        std::snprintf(id, sizeof id, "t%06llu", static_cast<unsigned long long>(++impl.table_counter));
        table->id = id;
        table->deal_seed = impl.rng();
        table->rng_seed = impl.rng();
        token = random_token(impl.rng);
        auto& slot = table->seats[static_cast<std::size_t>(seat)];
        slot.claimed = true;
        slot.token = token;
        slot.name = session->name;
        slot.session = session;
        impl.tokens[token] = {table->id, seat};
        impl.tables[table->id] = table;
      }
      {
        std::lock_guard lock(session->mutex);
        session->table = table->id;
        session->seat = seat;
      }
      {
        std::lock_guard table_lock(table->mutex);
        session->channel->send({{"type", "seat"}, {"table", table->id}, {"seat", seat}, {"token", token},
                                {"seats", table->names()}});
      }
      std::lock_guard lock(impl.mutex);
      if (!table->worker.joinable()) {
        table->worker = std::thread([&impl, table] { run_table(impl, table); });
      }
      table->cv.notify_all();
      return true;
    }

    std::shared_ptr<Table> table;
    int seat;
    {
      std::lock_guard lock(session->mutex);
      seat = session->seat;
      if (!session->table.empty()) {
        std::lock_guard server_lock(impl.mutex);
        auto it = impl.tables.find(session->table);
        if (it != impl.tables.end()) table = it->second;
      }
    }

    if (type == "play") {
      if (!msg.contains("card")) throw ParseError(0, "play needs a card");
      Card card = card_from_json(msg["card"]);
      if (!table) {
        session->channel->send(error_message("not_seated", "take a seat first"));
        return true;
      }
      {
        std::lock_guard lock(table->mutex);
        if (table->awaiting != seat || table->seats[static_cast<std::size_t>(seat)].session != session) {
          session->channel->send(error_message("not_your_turn", "it is not your turn"));
          return true;
        }
        table->inbox.push_back({seat, card});
      }
      table->cv.notify_all();
      return true;
    }

    if (type == "state_sync") {
      if (!table) {
        session->channel->send(error_message("not_seated", "take a seat first"));
        return true;
      }
      std::lock_guard lock(table->mutex);
      if (table->state) {
        session->channel->send(state_sync(*table, seat));
      } else {
        session->channel->send({{"type", "state_sync"}, {"table", table->id}, {"seat", seat}, {"waiting", true}});
      }
      return true;
    }

    session->channel->send(error_message("protocol", "unknown message type '" + type + "'"));
    return false;
  } catch (const std::exception& e) {
    session->channel->send(error_message("protocol", e.what()));
    return false;
  }
}

bool Server::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  return impl_->idle_cv.wait_for(lock, timeout, [&] {
    for (const auto& [id, t] : impl_->tables) {
      std::lock_guard table_lock(t->mutex);
      if (!t->done) return false;
    }
    return true;
  });
}

namespace {

void serve_connection(Server& server, std::shared_ptr<TcpChannel> channel, std::atomic<bool>& stopping) {
  auto session = server.open_session(channel);
  std::string buffer;
  char chunk[4096];
  bool keep = true;
  while (keep && !stopping) {
    ssize_t n = ::recv(channel->fd(), chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; keep && (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(buffer.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      keep = server.handle_line(session, line);
    }
    buffer.erase(0, start);
    if (buffer.size() > kMaxLineBytes) {
      channel->send(error_message("protocol", "line too long"));
      keep = false;
    }
  }
  server.close_session(session);
}

Json json_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

void reply(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
}

}  // namespace

void Server::start() {
  auto& impl = *impl_;
  impl.stopping = false;

  impl.listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (impl.listen_fd < 0) throw GongzhuError("socket() failed");
  int one = 1;
  ::setsockopt(impl.listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(impl.config.port));
  if (::inet_pton(AF_INET, impl.config.host.c_str(), &addr.sin_addr) != 1) {
    throw GongzhuError("bad listen address " + impl.config.host);
  }
  if (::bind(impl.listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(impl.listen_fd, 64) != 0) {
    int err = errno;
    ::close(impl.listen_fd);
    impl.listen_fd = -1;
    throw GongzhuError(std::string(parse_port_busy(err) ? "port busy: " : "cannot listen: ") + std::strerror(err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(impl.listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  impl.bound_port = ntohs(addr.sin_port);

  impl.acceptor = std::thread([this, &impl] {
    while (!impl.stopping) {
      pollfd pfd{impl.listen_fd, POLLIN, 0};
      if (::poll(&pfd, 1, 100) <= 0) continue;
      int fd = ::accept(impl.listen_fd, nullptr, nullptr);
      if (fd < 0) continue;
      auto channel = std::make_shared<TcpChannel>(fd);
      std::lock_guard lock(impl.mutex);
      impl.connections.push_back(channel);
      impl.connection_threads.emplace_back([this, channel, &impl] { serve_connection(*this, channel, impl.stopping); });
    }
  });

  if (impl.config.http_port < 0) return;
  impl.http = std::make_unique<httplib::Server>();
  auto& http = *impl.http;

  http.Get("/api/agents", [this](const httplib::Request&, httplib::Response& res) {
    auto records = impl_->store.records();
    reply(res, {{"registered", impl_->config.agents}, {"recorded", team_agents(records)}});
  });
  http.Get(R"(/api/agents/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    auto records = impl_->store.records();
    auto recorded = team_agents(records);
    bool known = std::find(impl_->config.agents.begin(), impl_->config.agents.end(), name) != impl_->config.agents.end() ||
                 std::find(recorded.begin(), recorded.end(), name) != recorded.end();
    if (!known) return reply(res, {{"error", "unknown agent"}, {"agent", name}}, 404);
    Json rows = Json::array();
    for (const auto& other : recorded) {
      if (other == name) continue;
      EvalReport r = head_to_head(records, name, other);
      if (r.games) rows.push_back({{"opponent", other}, {"wpg", r.wpg}, {"stderr", r.stderr_}, {"games", r.games}});
    }
    reply(res, {{"agent", name}, {"head_to_head", rows}});
  });
  http.Get("/api/leaderboard", [this](const httplib::Request& req, httplib::Response& res) {
    std::string reference = req.has_param("reference") ? req.get_param_value("reference") : "greed";
    reply(res, leaderboard_json(impl_->store.records(), reference));
  });
  auto agent_list = [this](const httplib::Request& req, const std::vector<MatchRecord>& records) {
    if (!req.has_param("agents")) return team_agents(records);
    std::vector<std::string> out;
    std::string all = req.get_param_value("agents");
    for (std::size_t start = 0; start <= all.size();) {
      std::size_t comma = all.find(',', start);
      if (comma == std::string::npos) comma = all.size();
      if (comma > start) out.push_back(all.substr(start, comma - start));
      start = comma + 1;
    }
    return out;
  };
  http.Get("/api/matrix", [this, agent_list](const httplib::Request& req, httplib::Response& res) {
    auto records = impl_->store.records();
    reply(res, matrix_json(records, agent_list(req, records)));
  });
  http.Get("/api/epsilon", [this, agent_list](const httplib::Request& req, httplib::Response& res) {
    auto records = impl_->store.records();
    reply(res, epsilon_json(records, agent_list(req, records)));
  });
  http.Get("/api/games", [this](const httplib::Request&, httplib::Response& res) {
    Json rows = Json::array();
    for (const auto& m : impl_->store.records()) rows.push_back({{"id", m.id}, {"seats", m.seats}, {"scores", m.scores}});
    reply(res, rows);
  });
  http.Get(R"(/api/games/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto m = impl_->store.find(req.matches[1]);
    if (!m) return reply(res, {{"error", "unknown game"}}, 404);
    reply(res, to_json(*m));
  });
  http.Get(R"(/api/games/([^/]+)/record)", [this](const httplib::Request& req, httplib::Response& res) {
    auto m = impl_->store.find(req.matches[1]);
    if (!m) return reply(res, {{"error", "unknown game"}}, 404);
    res.set_content(m->record + "\n", "text/plain");
  });
  http.Post("/api/matches", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = json_body(req);
    } catch (const std::exception&) {
      return reply(res, {{"error", "body must be JSON"}}, 400);
    }
    std::string a = body.value("a", ""), b = body.value("b", "");
    int deals = body.value("deals", 16);
    auto seed = body.value("seed", std::uint64_t{1});
    auto& agents = impl_->config.agents;
    if (std::find(agents.begin(), agents.end(), a) == agents.end() ||
        std::find(agents.begin(), agents.end(), b) == agents.end()) {
      return reply(res, {{"error", "unknown agent"}}, 404);
    }
    if (deals < 1 || deals > 100000) return reply(res, {{"error", "deals out of range"}}, 400);
    std::lock_guard lock(impl_->mutex);
    impl_->background.emplace_back([this, a, b, deals, seed] {
      try {
        play_match(a, b, deals, seed);
      } catch (const std::exception&) {
      }
    });
    reply(res, {{"accepted", true}, {"a", a}, {"b", b}, {"deals", deals}}, 202);
  });

  // Polling bridge: the same protocol for clients that only speak HTTP.
  http.Post("/api/bridge", [this](const httplib::Request&, httplib::Response& res) {
    auto channel = std::make_shared<PollChannel>();
    auto session = open_session(channel);
    std::lock_guard lock(impl_->mutex);
    std::string id = random_token(impl_->rng);
    impl_->bridges[id] = channel;
    impl_->bridge_sessions[id] = session;
    reply(res, {{"session", id}});
  });
  http.Post(R"(/api/bridge/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Session> session;
    {
      std::lock_guard lock(impl_->mutex);
      auto it = impl_->bridge_sessions.find(req.matches[1]);
      if (it != impl_->bridge_sessions.end()) session = it->second;
    }
    if (!session) return reply(res, {{"error", "unknown session"}}, 404);
    bool ok = handle_line(session, req.body);
    if (!ok) close_session(session);
    reply(res, {{"ok", ok}});
  });
  http.Get(R"(/api/bridge/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<PollChannel> channel;
    {
      std::lock_guard lock(impl_->mutex);
      auto it = impl_->bridges.find(req.matches[1]);
      if (it != impl_->bridges.end()) channel = it->second;
    }
    if (!channel) return reply(res, {{"error", "unknown session"}}, 404);
    std::size_t since = req.has_param("since") ? std::stoul(req.get_param_value("since")) : 0;
    int wait = req.has_param("wait_ms") ? std::stoi(req.get_param_value("wait_ms")) : 1000;
    auto [messages, next] = channel->poll(since, std::chrono::milliseconds(std::clamp(wait, 0, 25000)));
    reply(res, {{"messages", messages}, {"next", next}, {"closed", channel->closed()}});
  });
  http.Delete(R"(/api/bridge/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Session> session;
    {
      std::lock_guard lock(impl_->mutex);
      auto it = impl_->bridge_sessions.find(req.matches[1]);
      if (it != impl_->bridge_sessions.end()) {
        session = it->second;
        impl_->bridge_sessions.erase(it);
        impl_->bridges.erase(req.matches[1]);
      }
    }
    if (!session) return reply(res, {{"error", "unknown session"}}, 404);
    close_session(session);
    reply(res, {{"closed", true}});
  });
  if (impl.config.static_dir && !http.set_mount_point("/", impl.config.static_dir->string())) {
    throw GongzhuError("static directory not found: " + impl.config.static_dir->string());
  }

  if (impl.config.http_port == 0) {
    impl.bound_http_port = http.bind_to_any_port(impl.config.host);
  } else {
    impl.bound_http_port = http.bind_to_port(impl.config.host, impl.config.http_port) ? impl.config.http_port : -1;
  }
  if (impl.bound_http_port < 0) {
    stop();
    throw GongzhuError("port busy: cannot bind HTTP port " + std::to_string(impl.config.http_port));
  }
  impl.http_thread = std::thread([&http] { http.listen_after_bind(); });
}

void Server::stop() {
  auto& impl = *impl_;
  impl.stopping = true;
  if (impl.http) {
    impl.http->stop();
    if (impl.http_thread.joinable()) impl.http_thread.join();
    impl.http.reset();
  }
  if (impl.acceptor.joinable()) impl.acceptor.join();
  if (impl.listen_fd >= 0) {
    ::close(impl.listen_fd);
    impl.listen_fd = -1;
  }
  std::vector<std::thread> threads;
  std::vector<std::shared_ptr<Table>> tables;
  {
    std::lock_guard lock(impl.mutex);
    for (auto& weak : impl.connections) {
      if (auto c = weak.lock()) c->close();
    }
    impl.connections.clear();
    for (auto& [id, channel] : impl.bridges) channel->close();
    threads.swap(impl.connection_threads);
    for (auto& t : impl.background) threads.push_back(std::move(t));
    impl.background.clear();
    for (auto& [id, t] : impl.tables) tables.push_back(t);
  }
  for (auto& t : tables) {
    t->cv.notify_all();
    if (t->worker.joinable()) t->worker.join();
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

}  // namespace gongzhu::service
