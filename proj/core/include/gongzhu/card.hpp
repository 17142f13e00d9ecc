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
#include <bit>
#include <compare>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>

namespace gongzhu {

inline constexpr int kNumPlayers = 4;
inline constexpr int kNumSuits = 4;
inline constexpr int kNumRanks = 13;
inline constexpr int kNumCards = 52;
inline constexpr int kHandSize = 13;
inline constexpr int kNumTricks = 13;

using PlayerId = int;

// Suits in canonical order. Card index = suit * 13 + (rank - 2).
enum class Suit : std::uint8_t { kSpade = 0, kHeart = 1, kDiamond = 2, kClub = 3 };

inline constexpr std::array<Suit, kNumSuits> kAllSuits = {
    Suit::kSpade, Suit::kHeart, Suit::kDiamond, Suit::kClub};

char suit_char(Suit suit);

inline constexpr int team_of(PlayerId p) { return p & 1; }
inline constexpr PlayerId next_player(PlayerId p) { return (p + 1) % kNumPlayers; }
inline constexpr PlayerId partner_of(PlayerId p) { return (p + 2) % kNumPlayers; }

class Card {
 public:
  // Rank is 2..14 (11=J, 12=Q, 13=K, 14=A).
  constexpr Card(Suit suit, int rank)
      : index_(static_cast<std::uint8_t>(static_cast<int>(suit) * kNumRanks + rank - 2)) {}

  static constexpr Card from_index(int index) {
    Card c;
    c.index_ = static_cast<std::uint8_t>(index);
    return c;
  }

  // Two-character token such as "SQ", "HT", "D2"; case-sensitive.
  static std::optional<Card> parse(std::string_view token);

  constexpr int index() const { return index_; }
  constexpr Suit suit() const { return static_cast<Suit>(index_ / kNumRanks); }
  constexpr int rank() const { return index_ % kNumRanks + 2; }

  std::string to_string() const;

  constexpr auto operator<=>(const Card&) const = default;

 private:
  constexpr Card() = default;
  std::uint8_t index_ = 0;
};

namespace cards {
inline constexpr Card kSQ{Suit::kSpade, 12};
inline constexpr Card kSK{Suit::kSpade, 13};
inline constexpr Card kSA{Suit::kSpade, 14};
inline constexpr Card kDJ{Suit::kDiamond, 11};
inline constexpr Card kDQ{Suit::kDiamond, 12};
inline constexpr Card kDK{Suit::kDiamond, 13};
inline constexpr Card kDA{Suit::kDiamond, 14};
inline constexpr Card kC10{Suit::kClub, 10};
inline constexpr Card kCJ{Suit::kClub, 11};
inline constexpr Card kCQ{Suit::kClub, 12};
inline constexpr Card kCK{Suit::kClub, 13};
inline constexpr Card kCA{Suit::kClub, 14};
inline constexpr Card kHK{Suit::kHeart, 13};
inline constexpr Card kHA{Suit::kHeart, 14};
}  // namespace cards

// Set of cards backed by a 52-bit mask. Iteration is in ascending card index.
class CardSet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Card;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = Card;

    iterator() = default;
    explicit iterator(std::uint64_t bits) : bits_(bits) {}
    Card operator*() const { return Card::from_index(std::countr_zero(bits_)); }
    iterator& operator++() {
      bits_ &= bits_ - 1;
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator&) const = default;

   private:
    std::uint64_t bits_ = 0;
  };

  constexpr CardSet() = default;
  constexpr explicit CardSet(std::uint64_t bits) : bits_(bits) {}
  CardSet(std::initializer_list<Card> cards) {
    for (Card c : cards) insert(c);
  }

  static constexpr CardSet full() { return CardSet((std::uint64_t{1} << kNumCards) - 1); }
  static constexpr CardSet of_suit(Suit suit) {
    return CardSet(((std::uint64_t{1} << kNumRanks) - 1) << (static_cast<int>(suit) * kNumRanks));
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(Card c) const { return (bits_ >> c.index()) & 1; }
  constexpr void insert(Card c) { bits_ |= std::uint64_t{1} << c.index(); }
  constexpr void erase(Card c) { bits_ &= ~(std::uint64_t{1} << c.index()); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }

  constexpr CardSet in_suit(Suit suit) const { return *this & of_suit(suit); }
  constexpr bool has_suit(Suit suit) const { return !in_suit(suit).empty(); }

  // Undefined on an empty set.
  Card lowest() const { return Card::from_index(std::countr_zero(bits_)); }
  Card highest() const { return Card::from_index(63 - std::countl_zero(bits_)); }
  // n-th card in ascending order, 0-based; n < size().
  Card nth(int n) const;

  iterator begin() const { return iterator(bits_); }
  iterator end() const { return iterator(0); }

  constexpr CardSet operator|(CardSet o) const { return CardSet(bits_ | o.bits_); }
  constexpr CardSet operator&(CardSet o) const { return CardSet(bits_ & o.bits_); }
  constexpr CardSet operator-(CardSet o) const { return CardSet(bits_ & ~o.bits_); }
  constexpr CardSet& operator|=(CardSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr CardSet& operator&=(CardSet o) {
    bits_ &= o.bits_;
    return *this;
  }
  constexpr CardSet& operator-=(CardSet o) {
    bits_ &= ~o.bits_;
    return *this;
  }
  constexpr bool operator==(const CardSet&) const = default;

  std::string to_string() const;

 private:
  std::uint64_t bits_ = 0;
};

// Hearts, SQ, DJ and C10.
inline constexpr CardSet kPointCards =
    CardSet(CardSet::of_suit(Suit::kHeart).bits() | (std::uint64_t{1} << cards::kSQ.index()) |
            (std::uint64_t{1} << cards::kDJ.index()) | (std::uint64_t{1} << cards::kC10.index()));

inline constexpr int kNumPointCards = 16;

// Position of a point card in the 16-slot point block (ascending card index), -1 otherwise.
int point_card_slot(Card c);

// Face value of a heart (HA -50, HK -40, HQ -30, HJ -20, H5..H10 -10, H2..H4 0); 0 for non-hearts.
int heart_value(Card c);

}  // namespace gongzhu
