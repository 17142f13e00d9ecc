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
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gongzhu/network.hpp"
#include "gongzhu/service/store.hpp"

namespace gongzhu::service {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxLineBytes = 64 * 1024;

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 0;                     // protocol port; 0 picks a free one
  int http_port = -1;               // -1 disables HTTP, 0 picks a free one
  std::vector<std::string> agents{"greed"};
  std::filesystem::path store = "store";
  std::optional<std::filesystem::path> static_dir;
  std::shared_ptr<const Network> network;  // needed by scrofa, scrofa-us and net
  std::chrono::milliseconds turn_timeout{30000};
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> belief_log;
};

// Outbound half of one client connection.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Json& message) = 0;
  virtual void close() = 0;
};

// Arena server: tables mixing server-side agents with remote seats over newline-delimited
// JSON, an append-only match store, and (optionally) HTTP for stats, replays, static
// files and a polling bridge onto the same protocol.
class Server {
 public:
  struct Session;
  struct Impl;

  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the listeners. Throws GongzhuError when a port is taken.
  void start();
  void stop();
  int port() const;
  int http_port() const;
  const ServerConfig& config() const;
  MatchStore& store();
  std::vector<std::string> agent_names() const;

  // One game among server-side agents, stored on completion.
  MatchRecord play_local(const std::array<std::string, kNumPlayers>& seats, std::uint64_t deal_seed,
                         const std::array<std::uint64_t, kNumPlayers>& seat_seeds);
  // Paired games between two agents, dealt and seeded exactly as `match` does.
  std::vector<MatchRecord> play_match(const std::string& a, const std::string& b, int deals, std::uint64_t seed);

  // Transport-independent session handling, shared by TCP and the HTTP bridge.
  std::shared_ptr<Session> open_session(std::shared_ptr<Channel> channel);
  // Returns false after a protocol violation; the caller must then close the session.
  bool handle_line(const std::shared_ptr<Session>& session, std::string_view line);
  void close_session(const std::shared_ptr<Session>& session);

  // Waits until no table is running or waiting for players; false on timeout.
  bool wait_idle(std::chrono::milliseconds timeout);

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace gongzhu::service
