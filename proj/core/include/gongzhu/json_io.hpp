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

#include <json.hpp>
#include <string>

#include "gongzhu/belief.hpp"
#include "gongzhu/eval.hpp"

namespace gongzhu {

using Json = nlohmann::json;

inline constexpr const char* kEvalSchema = "gongzhu.eval/1";
inline constexpr const char* kBeliefSchema = "gongzhu.belief/1";

Json cards_to_json(CardSet cards);
// Throws ParseError on anything but a valid two-character token.
Card card_from_json(const Json& j);
// Throws ParseError on anything but an array of card tokens.
CardSet cards_from_json(const Json& j);
Json history_to_json(std::span<const PlayEvent> events);

// One evaluation run. `observations` adds the per-deal values.
Json eval_report_to_json(const EvalReport& report, const std::string& a, const std::string& b,
                         std::uint64_t seed, bool paired, bool observations = false);

// Inspector payload for one decision: strata with their total weight, scenarios with
// hands, scores, factors and values, and the aggregated value per legal card.
Json belief_to_json(const BeliefDecision& decision);

}  // namespace gongzhu
