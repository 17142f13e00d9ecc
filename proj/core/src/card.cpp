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

#include "gongzhu/card.hpp"

namespace gongzhu {
namespace {

constexpr std::string_view kSuitChars = "SHDC";
constexpr std::string_view kRankChars = "23456789TJQKA";

}  // namespace

char suit_char(Suit suit) { return kSuitChars[static_cast<int>(suit)]; }

std::optional<Card> Card::parse(std::string_view token) {
  if (token.size() != 2) return std::nullopt;
  auto s = kSuitChars.find(token[0]);
  auto r = kRankChars.find(token[1]);
  if (s == std::string_view::npos || r == std::string_view::npos) return std::nullopt;
  return Card(static_cast<Suit>(s), static_cast<int>(r) + 2);
}

std::string Card::to_string() const {
  return {suit_char(suit()), kRankChars[static_cast<std::size_t>(rank() - 2)]};
}

Card CardSet::nth(int n) const {
  std::uint64_t b = bits_;
  for (int i = 0; i < n; ++i) b &= b - 1;
  return Card::from_index(std::countr_zero(b));
}

std::string CardSet::to_string() const {
  std::string out;
  for (Card c : *this) {
    if (!out.empty()) out += ' ';
    out += c.to_string();
  }
  return out;
}

int point_card_slot(Card c) {
  if (!kPointCards.contains(c)) return -1;
  std::uint64_t below = kPointCards.bits() & ((std::uint64_t{1} << c.index()) - 1);
  return std::popcount(below);
}

int heart_value(Card c) {
  if (c.suit() != Suit::kHeart) return 0;
  switch (c.rank()) {
    case 14: return -50;
    case 13: return -40;
    case 12: return -30;
    case 11: return -20;
    default: return c.rank() >= 5 ? -10 : 0;
  }
}

}  // namespace gongzhu
