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
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gongzhu/eval.hpp"
#include "gongzhu/json_io.hpp"

namespace gongzhu::service {

inline constexpr const char* kMatchSchema = "gongzhu.match/1";

struct MatchRecord {
  std::string id;
  std::array<std::string, kNumPlayers> seats;  // agent or player name per seat
  std::string deal;    // shared by both games of a paired deal
  std::string record;  // engine record text
  std::array<int, kNumPlayers> scores{};
  std::int64_t started_ms = 0;
  std::int64_t finished_ms = 0;

  // Parses the record and checks it re-scores to `scores`.
  bool replays() const;
};

Json to_json(const MatchRecord& m);
// Throws ParseError on missing or mistyped fields.
MatchRecord match_from_json(const Json& j);
MatchRecord make_record(std::string id, const std::array<std::string, kNumPlayers>& seats, const GameState& final_state,
                        std::int64_t started_ms, std::int64_t finished_ms);

// Append-only log of finished games (one JSON object per line) with an in-memory index
// rebuilt from the log on open. Lines that fail to parse or re-score are skipped and
// counted. Thread-safe.
class MatchStore {
 public:
  explicit MatchStore(std::filesystem::path dir);

  void append(const MatchRecord& m);
  std::vector<MatchRecord> records() const;
  std::optional<MatchRecord> find(const std::string& id) const;
  std::size_t size() const;
  std::size_t rejected() const { return rejected_; }
  std::string next_id();
  const std::filesystem::path& path() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::vector<MatchRecord> records_;
  std::size_t rejected_ = 0;
  std::uint64_t counter_ = 0;
};

// Games between two uniform teams (both seats of a team played by the same agent),
// oriented from `a`'s side and grouped by deal.
std::vector<GameResult> head_to_head_games(const std::vector<MatchRecord>& records, const std::string& a,
                                           const std::string& b);
EvalReport head_to_head(const std::vector<MatchRecord>& records, const std::string& a, const std::string& b);

// Names that occupy a whole team in at least one record, sorted.
std::vector<std::string> team_agents(const std::vector<MatchRecord>& records);

Json leaderboard_json(const std::vector<MatchRecord>& records, const std::string& reference = "greed");
Json matrix_json(const std::vector<MatchRecord>& records, const std::vector<std::string>& agents);
// ε over the agents whose every pairing has games; null with fewer than three.
Json epsilon_json(const std::vector<MatchRecord>& records, const std::vector<std::string>& agents);

}  // namespace gongzhu::service
