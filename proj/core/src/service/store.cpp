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

#include "gongzhu/service/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "gongzhu/errors.hpp"
#include "gongzhu/record.hpp"

namespace gongzhu::service {

bool MatchRecord::replays() const {
  try {
    GameState s = parse_game(record);
    return s.finished() && score(s.piles()).per_player == scores;
  } catch (const GongzhuError&) {
    return false;
  }
}

Json to_json(const MatchRecord& m) {
  return {{"schema", kMatchSchema}, {"id", m.id},       {"seats", m.seats},
          {"deal", m.deal},         {"record", m.record}, {"scores", m.scores},
          {"started_ms", m.started_ms}, {"finished_ms", m.finished_ms}};
}

MatchRecord match_from_json(const Json& j) {
  try {
    MatchRecord m;
    if (j.at("schema").get<std::string>() != kMatchSchema) throw ParseError(0, "unknown match schema");
    m.id = j.at("id").get<std::string>();
    m.seats = j.at("seats").get<std::array<std::string, kNumPlayers>>();
    m.deal = j.at("deal").get<std::string>();
    m.record = j.at("record").get<std::string>();
    m.scores = j.at("scores").get<std::array<int, kNumPlayers>>();
    m.started_ms = j.at("started_ms").get<std::int64_t>();
    m.finished_ms = j.at("finished_ms").get<std::int64_t>();
    return m;
  } catch (const Json::exception& e) {
    throw ParseError(0, std::string("bad match record: ") + e.what());
  }
}

MatchRecord make_record(std::string id, const std::array<std::string, kNumPlayers>& seats, const GameState& final_state,
                        std::int64_t started_ms, std::int64_t finished_ms) {
  if (!final_state.finished()) throw GongzhuError("only finished games are recorded");
  MatchRecord m;
  m.id = std::move(id);
  m.seats = seats;
  m.record = serialize_game(final_state);
  m.deal = m.record.substr(0, m.record.find(" ;"));
  m.scores = score(final_state.piles()).per_player;
  m.started_ms = started_ms;
  m.finished_ms = finished_ms;
  return m;
}

MatchStore::MatchStore(std::filesystem::path dir) {
  std::filesystem::create_directories(dir);
  file_ = dir / "matches.jsonl";
  std::ifstream in(file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      MatchRecord m = match_from_json(Json::parse(line));
      if (!m.replays()) {
        ++rejected_;
        continue;
      }
      records_.push_back(std::move(m));
    } catch (const std::exception&) {
      ++rejected_;
    }
  }
  counter_ = records_.size() + rejected_;
}

void MatchStore::append(const MatchRecord& m) {
  if (!m.replays()) throw InconsistencyError("refusing to store a record that does not re-score: " + m.id);
  std::lock_guard lock(mutex_);
  std::ofstream out(file_, std::ios::app);
  out << to_json(m).dump() << '\n';
  out.flush();
  if (!out) throw GongzhuError("failed to append to " + file_.string());
  records_.push_back(m);
}

std::vector<MatchRecord> MatchStore::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::optional<MatchRecord> MatchStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  for (const auto& m : records_) {
    if (m.id == id) return m;
  }
  return std::nullopt;
}

std::size_t MatchStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::string MatchStore::next_id() {
  std::lock_guard lock(mutex_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%08llu", static_cast<unsigned long long>(++counter_));
  return buf;
}

namespace {

std::optional<std::pair<std::string, std::string>> teams(const MatchRecord& m) {
  if (m.seats[0] != m.seats[2] || m.seats[1] != m.seats[3]) return std::nullopt;
  return std::make_pair(m.seats[0], m.seats[1]);
}

}  // namespace

std::vector<GameResult> head_to_head_games(const std::vector<MatchRecord>& records, const std::string& a,
                                           const std::string& b) {
  std::map<std::string, int> deal_index;
  std::vector<GameResult> out;
  for (const auto& m : records) {
    auto t = teams(m);
    if (!t) continue;
    bool forward = t->first == a && t->second == b;
    bool reverse = t->first == b && t->second == a;
    if (!forward && !reverse) continue;
    auto [it, fresh] = deal_index.try_emplace(m.deal, static_cast<int>(deal_index.size()));
    GameResult g;
    g.deal = it->second;
    int team0 = m.scores[0] + m.scores[2];
    int team1 = m.scores[1] + m.scores[3];
    g.team_a_points = forward ? team0 : team1;
    g.team_b_points = forward ? team1 : team0;
    out.push_back(g);
  }
  return out;
}

EvalReport head_to_head(const std::vector<MatchRecord>& records, const std::string& a, const std::string& b) {
  auto games = head_to_head_games(records, a, b);
  return summarize(games);
}

std::vector<std::string> team_agents(const std::vector<MatchRecord>& records) {
  std::set<std::string> names;
  for (const auto& m : records) {
    if (auto t = teams(m)) {
      names.insert(t->first);
      names.insert(t->second);
    }
  }
  return {names.begin(), names.end()};
}

Json leaderboard_json(const std::vector<MatchRecord>& records, const std::string& reference) {
  Json rows = Json::array();
  for (const auto& name : team_agents(records)) {
    if (name == reference) continue;
    EvalReport r = head_to_head(records, name, reference);
    if (r.games == 0) continue;
    rows.push_back({{"agent", name},
                    {"wpg", r.wpg},
                    {"stderr", r.stderr_},
                    {"deals", r.deals},
                    {"games", r.games},
                    {"win_rate", r.win_rate},
                    {"draw_rate", r.draw_rate}});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Json& x, const Json& y) { return x["wpg"].get<double>() > y["wpg"].get<double>(); });
  return {{"reference", reference}, {"rows", rows}};
}

Json matrix_json(const std::vector<MatchRecord>& records, const std::vector<std::string>& agents) {
  Json xi = Json::array();
  Json games = Json::array();
  for (const auto& a : agents) {
    Json row = Json::array(), count = Json::array();
    for (const auto& b : agents) {
      if (a == b) {
        row.push_back(0.0);
        count.push_back(0);
        continue;
      }
      EvalReport r = head_to_head(records, a, b);
      row.push_back(r.games ? Json(r.wpg) : Json(nullptr));
      count.push_back(r.games);
    }
    xi.push_back(row);
    games.push_back(count);
  }
  return {{"agents", agents}, {"xi", xi}, {"games", games}};
}

Json epsilon_json(const std::vector<MatchRecord>& records, const std::vector<std::string>& agents) {
  std::vector<std::string> complete;
  for (const auto& a : agents) {
    bool ok = true;
    for (const auto& b : complete) ok = ok && head_to_head(records, a, b).games > 0;
    if (ok) complete.push_back(a);
  }
  if (complete.size() < 3) return {{"agents", complete}, {"epsilon", nullptr}};
  PairwiseScore xi(complete.size());
  for (std::size_t i = 0; i < complete.size(); ++i) {
    for (std::size_t j = i + 1; j < complete.size(); ++j) xi.set(i, j, head_to_head(records, complete[i], complete[j]).wpg);
  }
  return {{"agents", complete}, {"epsilon", epsilon(xi)}};
}

}  // namespace gongzhu::service
