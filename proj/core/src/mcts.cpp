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

#include "gongzhu/mcts.hpp"

#include <cmath>
#include <limits>

#include "gongzhu/errors.hpp"

namespace gongzhu {

double PileEvaluator::value(const GameState& state) const {
  return score(state.piles()).team_differential();
}

double NetworkEvaluator::value(const GameState& state) const {
  if (state.finished()) return score(state.piles()).team_differential();
  PlayerId mover = state.to_play();
  double v = net_->forward(encode(state, mover)).value;
  return team_of(mover) == 0 ? v : -v;
}

double ucb_score(double mean, int visits, int parent_visits, double exploration) {
  return mean + exploration * std::sqrt(std::log(static_cast<double>(parent_visits)) / visits);
}

std::size_t select_child(std::span<const ChildStats> children, int parent_visits, double exploration) {
  if (children.empty()) throw GongzhuError("select_child on a node without children");
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (children[i].visits == 0) return i;
  }
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < children.size(); ++i) {
    double s = ucb_score(children[i].mean, children[i].visits, parent_visits, exploration);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

namespace {

struct Node {
  GameState state;
  int first_child = -1;
  int num_children = 0;
  int visits = 0;
  double total = 0.0;  // team differential summed over visits
  Card card = Card::from_index(0);
  // Set once every line below the node has been searched to the end; `exact` is then
  // its minimax value.
  bool solved = false;
  double exact = 0.0;
};

class Tree {
 public:
  Tree(const GameState& root, const Evaluator& evaluator, double exploration)
      : evaluator_(evaluator), exploration_(exploration) {
    nodes_.push_back({root});
    expand(0);
  }

  void simulate() {
    path_.clear();
    int at = 0;
    double value;
    for (;;) {
      path_.push_back(at);
      Node& n = nodes_[static_cast<std::size_t>(at)];
      // The root always descends so every simulation lands on one of its children.
      if (n.solved && at != 0) {
        value = n.exact;
        break;
      }
      if (at != 0 && n.visits == 0) {
        value = evaluator_.value(n.state);
        break;
      }
      if (n.first_child < 0) expand(at);
      at = pick(at);
    }
    for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
      Node& n = nodes_[static_cast<std::size_t>(*it)];
      ++n.visits;
      n.total += value;
      if (!n.solved && n.first_child >= 0) try_solve(n);
    }
  }

  const Node& root() const { return nodes_[0]; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

 private:
  void expand(int at) {
    GameState s = nodes_[static_cast<std::size_t>(at)].state;
    CardSet legal = legal_moves(s);
    int first = static_cast<int>(nodes_.size());
    for (Card c : legal) {
      Node child{s.play(c)};
      child.card = c;
      if (child.state.finished()) {
        child.solved = true;
        child.exact = score(child.state.piles()).team_differential();
      }
      nodes_.push_back(child);
    }
    Node& n = nodes_[static_cast<std::size_t>(at)];
    n.first_child = first;
    n.num_children = static_cast<int>(legal.size());
  }

  void try_solve(Node& n) {
    const bool maximize = team_of(n.state.to_play()) == 0;
    double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (int k = 0; k < n.num_children; ++k) {
      const Node& c = nodes_[static_cast<std::size_t>(n.first_child + k)];
      if (!c.solved) return;
      best = maximize ? std::max(best, c.exact) : std::min(best, c.exact);
    }
    n.solved = true;
    n.exact = best;
  }

  int pick(int at) {
    const Node& n = nodes_[static_cast<std::size_t>(at)];
    const double sign = team_of(n.state.to_play()) == 0 ? 1.0 : -1.0;
    stats_.clear();
    int total = 0;
    for (int k = 0; k < n.num_children; ++k) {
      const Node& c = nodes_[static_cast<std::size_t>(n.first_child + k)];
      double mean = c.solved ? c.exact : (c.visits ? c.total / c.visits : 0.0);
      stats_.push_back({c.card, c.visits, sign * mean});
      total += c.visits;
    }
    return n.first_child + static_cast<int>(select_child(stats_, std::max(total, 1), exploration_));
  }

  const Evaluator& evaluator_;
  double exploration_;
  std::vector<Node> nodes_;
  std::vector<int> path_;
  std::vector<ChildStats> stats_;
};

}  // namespace

SearchResult search(const GameState& root, const Evaluator& evaluator, const SearchConfig& config,
                    int simulations) {
  if (root.finished()) throw TerminalStateError("search from a finished game");
  if (simulations <= 0) simulations = config.simulations(static_cast<int>(legal_moves(root).size()));
  Tree tree(root, evaluator, config.exploration);
  for (int i = 0; i < simulations; ++i) tree.simulate();

  SearchResult r;
  r.simulations = simulations;
  r.mover = root.to_play();
  const auto& top = tree.root();
  r.root_value = top.solved ? top.exact : top.total / top.visits;
  for (int k = 0; k < top.num_children; ++k) {
    const auto& c = tree.node(top.first_child + k);
    r.children.push_back({c.card, c.visits, c.solved ? c.exact : (c.visits ? c.total / c.visits : 0.0)});
    r.policy[static_cast<std::size_t>(c.card.index())] = static_cast<double>(c.visits) / simulations;
  }
  return r;
}

Card sample_from_visits(const SearchResult& result, double temperature, Rng& rng) {
  if (result.children.empty()) throw GongzhuError("no moves to sample from");
  if (temperature <= 0.0) {
    const ChildStats* best = &result.children.front();
    for (const auto& c : result.children) {
      if (c.visits > best->visits) best = &c;
    }
    return best->card;
  }
  std::vector<double> weights;
  for (const auto& c : result.children) weights.push_back(std::pow(static_cast<double>(c.visits), 1.0 / temperature));
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return result.children[pick(rng)].card;
}

Card mcts_play(const GameState& state, const Evaluator& evaluator, const SearchConfig& config,
               double temperature, Rng& rng) {
  CardSet legal = legal_moves(state);
  if (legal.size() == 1) return legal.lowest();
  return sample_from_visits(search(state, evaluator, config), temperature, rng);
}

}  // namespace gongzhu
