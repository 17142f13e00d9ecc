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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gongzhu {

class GongzhuError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation requires a game that is still in progress.
class TerminalStateError : public GongzhuError {
 public:
  using GongzhuError::GongzhuError;
};

class IllegalMoveError : public GongzhuError {
 public:
  enum class Rule { kNotInHand, kMustFollowSuit, kOutOfTurn, kGameFinished };
  IllegalMoveError(Rule rule, const std::string& what) : GongzhuError(what), rule_(rule) {}
  Rule rule() const { return rule_; }

 private:
  Rule rule_;
};

class InvalidTrickError : public GongzhuError {
 public:
  using GongzhuError::GongzhuError;
};

// Point cards counted twice across piles, or a stored score that disagrees with the record.
class InconsistencyError : public GongzhuError {
 public:
  using GongzhuError::GongzhuError;
};

class ParseError : public GongzhuError {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : GongzhuError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// No hidden-hand assignment satisfies the constraints.
class InfeasibleError : public GongzhuError {
 public:
  using GongzhuError::GongzhuError;
};

class ModelError : public GongzhuError {
 public:
  using GongzhuError::GongzhuError;
};

class TrainingDivergedError : public GongzhuError {
 public:
  using GongzhuError::GongzhuError;
};

}  // namespace gongzhu
