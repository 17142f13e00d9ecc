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

#include "gongzhu/record.hpp"

#include <charconv>
#include <vector>

#include "gongzhu/errors.hpp"

namespace gongzhu {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == text_.size(); }

  void skip_spaces() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }

  // Next space-delimited word; empty at end of input.
  std::string_view word() {
    skip_spaces();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ' ') ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string_view peek_word() {
    std::size_t saved = pos_;
    auto w = word();
    pos_ = saved;
    return w;
  }

  void expect(std::string_view keyword) {
    skip_spaces();
    std::size_t at = pos_;
    if (word() != keyword) fail(at, "expected '" + std::string(keyword) + "'");
  }

  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw ParseError(at, what);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Card parse_card(Reader& in, std::string_view token, std::size_t at) {
  auto card = Card::parse(token);
  if (!card) in.fail(at, "bad card token '" + std::string(token) + "'");
  return *card;
}

template <typename Int>
Int parse_int(Reader& in, std::string_view token, std::size_t at) {
  Int value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    in.fail(at, "bad integer '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::string serialize_game(const GameState& state) {
  std::string out = "DEAL L";
  out += static_cast<char>('0' + state.first_leader());
  for (const CardSet& hand : state.initial_hands()) {
    out += ' ';
    for (Card c : hand) out += c.to_string();
  }
  out += " ; PLAYS";
  for (const PlayEvent& e : state.history()) {
    out += ' ';
    out += e.card.to_string();
  }
  out += " ; SCORE";
  if (state.finished()) {
    for (int points : score(state.piles()).per_player) {
      out += ' ';
      out += std::to_string(points);
    }
  } else {
    out += " -";
  }
  return out;
}

GameState parse_game(std::string_view record) {
  while (!record.empty() && (record.back() == '\n' || record.back() == '\r')) {
    record.remove_suffix(1);
  }
  Reader in(record);
  in.expect("DEAL");

  in.skip_spaces();
  std::size_t at = in.pos();
  std::string_view head = in.word();
  GameState state = deal(0);
  if (head.size() >= 2 && head[0] == 'S') {
    state = deal(parse_int<std::uint64_t>(in, head.substr(1), at + 1));
  } else if (head.size() == 2 && head[0] == 'L' && head[1] >= '0' && head[1] <= '3') {
    PlayerId leader = head[1] - '0';
    std::array<CardSet, kNumPlayers> hands;
    CardSet seen;
    for (PlayerId p = 0; p < kNumPlayers; ++p) {
      in.skip_spaces();
      std::size_t hand_at = in.pos();
      std::string_view text = in.word();
      if (text.size() != 2 * kHandSize) {
        in.fail(hand_at, "hand " + std::to_string(p) + " must list 13 cards");
      }
      for (std::size_t k = 0; k < text.size(); k += 2) {
        Card c = parse_card(in, text.substr(k, 2), hand_at + k);
        if (seen.contains(c)) in.fail(hand_at + k, "duplicate card " + c.to_string());
        seen.insert(c);
        hands[p].insert(c);
      }
    }
    state = GameState::from_hands(hands, leader);
  } else {
    in.fail(at, "expected 'L<leader>' or 'S<seed>' after DEAL");
  }

  in.expect(";");
  in.expect("PLAYS");
  while (true) {
    in.skip_spaces();
    std::size_t card_at = in.pos();
    std::string_view token = in.word();
    if (token.empty()) in.fail(card_at, "truncated record: missing SCORE section");
    if (token == ";") break;
    Card c = parse_card(in, token, card_at);
    try {
      state = state.play(c);
    } catch (const IllegalMoveError& e) {
      in.fail(card_at, std::string("illegal play: ") + e.what());
    }
  }

  in.expect("SCORE");
  in.skip_spaces();
  std::size_t score_at = in.pos();
  if (in.peek_word() == "-") {
    in.word();
    if (state.finished()) in.fail(score_at, "finished game must carry a score");
  } else {
    if (!state.finished()) in.fail(score_at, "truncated record: fewer than 52 plays");
    std::array<int, kNumPlayers> stored{};
    for (int& v : stored) {
      in.skip_spaces();
      std::size_t v_at = in.pos();
      std::string_view token = in.word();
      if (token.empty()) in.fail(v_at, "truncated record: SCORE needs 4 integers");
      v = parse_int<int>(in, token, v_at);
    }
    if (stored != score(state.piles()).per_player) {
      in.fail(score_at, "stored SCORE disagrees with the replayed game");
    }
  }
  in.skip_spaces();
  if (!in.at_end()) in.fail(in.pos(), "trailing characters");
  return state;
}

}  // namespace gongzhu
