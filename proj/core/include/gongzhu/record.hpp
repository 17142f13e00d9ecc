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

#include <string>
#include <string_view>

#include "gongzhu/game_state.hpp"

namespace gongzhu {

// One game per line:
//
//   DEAL L<leader> <hand0> <hand1> <hand2> <hand3> ; PLAYS <card>* ; SCORE <p0> <p1> <p2> <p3>
//
// Each hand is its 13 initial cards as concatenated two-character tokens in ascending
// card index (e.g. "S2S9SQH4..."). PLAYS lists every card played so far in order.
// SCORE is "-" while the game is unfinished. The deal may also be written "DEAL S<seed>",
// which expands to deal(seed); serialize_game always writes the explicit form.
std::string serialize_game(const GameState& state);

// Throws ParseError (with byte offset) on malformed input, duplicate or missing cards,
// illegal plays, or a SCORE that disagrees with the replayed game.
GameState parse_game(std::string_view record);

}  // namespace gongzhu
