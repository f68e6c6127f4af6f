#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmcoop/algebra.hpp"
#include "rmcoop/reward_machine.hpp"

namespace rmc {

/// Index of an agent-local environment state (a grid cell for gridworlds).
using LocalState = std::uint32_t;
/// One local state per agent.
using JointState = std::vector<LocalState>;

/// `agent` is (or with `negated`, is not) in local state `state`.
struct Atom {
  std::size_t agent;
  LocalState state;
  bool negated = false;
};

/// Emits `event` when every atom holds and the RM state passes the guard.
/// Without an explicit guard the rule is active in the RM states where
/// `event` has a transition.
struct LabelRule {
  Event event;
  std::vector<Atom> atoms;
  std::optional<std::vector<StateIndex>> guard;
};

/// For every event, the agents whose local event set contains it.
class CollaboratorIndex {
 public:
  CollaboratorIndex() = default;
  /// Throws InputError if some team event belongs to no local set.
  CollaboratorIndex(const EventAlphabet& team, const std::vector<EventAlphabet>& local_sets);

  std::size_t num_agents() const { return local_sets_.size(); }
  const std::vector<std::size_t>& agents(Event e) const;
  bool is_shared(Event e) const { return agents(e).size() > 1; }
  const EventAlphabet& local_set(std::size_t agent) const { return local_sets_[agent]; }
  const EventAlphabet& team_alphabet() const { return team_; }

 private:
  EventAlphabet team_;
  std::vector<EventAlphabet> local_sets_;
  std::vector<std::vector<std::size_t>> agents_by_pos_;
};

enum class Scope { team, local };

/// Declarative labeling function. Team scope reads joint states and team
/// RM states; local scope reads one agent's state (atoms use agent 0) and
/// projected RM states.
class LabelingRuleSet {
 public:
  /// Team labeling. Output events are ordered by their lowest collaborating
  /// agent, then by alphabet position.
  static LabelingRuleSet team(const RewardMachine& rm, std::vector<LabelRule> rules,
                              const CollaboratorIndex& idx);
  /// Local labeling of `agent` over its projected machine. Atoms must refer
  /// to agent 0 and guards to projected states.
  static LabelingRuleSet local(std::size_t agent, const RewardMachine& projected,
                               std::vector<LabelRule> rules);

  /// Existential local labeling: a team rule contributes to agent i when its
  /// event is in Σ_i, its atoms on teammates can be satisfied by some states
  /// in `teammate_states`, and its guard meets the projected block.
  static LabelingRuleSet derive_local(const LabelingRuleSet& team, const ProjectedRM& projection,
                                      std::size_t agent,
                                      const std::vector<std::vector<LocalState>>& teammate_states);

  Scope scope() const { return scope_; }
  std::size_t agent() const { return agent_; }
  const std::vector<LabelRule>& rules() const { return rules_; }
  std::size_t num_rm_states() const { return num_rm_states_; }

  /// Appends every matching event (deduplicated) to `out`.
  void label(std::span<const LocalState> state, StateIndex u, std::vector<Event>& out) const;
  std::vector<Event> label(std::span<const LocalState> state, StateIndex u) const {
    std::vector<Event> out;
    label(state, u, out);
    return out;
  }

  /// Pairs of rule indices that could fire together for one agent's event
  /// set (same Σ_i, overlapping guards, compatible atoms).
  std::vector<std::string> co_fire_warnings(const CollaboratorIndex& idx) const;

 private:
  bool matches(const LabelRule& r, std::size_t rule_index, std::span<const LocalState> s,
               StateIndex u) const;

  Scope scope_ = Scope::team;
  std::size_t agent_ = 0;
  std::size_t num_rm_states_ = 0;
  std::vector<LabelRule> rules_;
  std::vector<std::vector<char>> active_;  // per rule, per RM state
  std::vector<int> order_key_;             // per rule
};

/// Team labeling L(s, u).
std::vector<Event> label_team(const LabelingRuleSet& team, std::span<const LocalState> s,
                              StateIndex u);
/// Local labeling L_i(s_i, u^i).
std::vector<Event> label_local(const LabelingRuleSet& local, LocalState s_i, StateIndex u_i);

/// Shared-event barrier: agent i keeps its proposal e iff every agent in
/// I_e proposed e in the same step.
std::vector<std::vector<Event>> synchronize(const std::vector<std::vector<Event>>& proposals,
                                            const CollaboratorIndex& idx);

struct LabeledStep {
  JointState state;  // a single entry for local trajectories
  StateIndex rm_state;
  std::vector<Event> label;
};

struct LabeledTrajectory {
  std::vector<LabeledStep> steps;
  EventString events;

  StateIndex final_rm_state() const { return steps.back().rm_state; }
};

/// Labels s_{t+1} against u_t, then folds l_{t+1} into u_t to get u_{t+1};
/// l_0 is empty and u_0 the initial state.
LabeledTrajectory team_labeled_trajectory(std::span<const JointState> trajectory,
                                          const RewardMachine& rm, const LabelingRuleSet& team);

/// Per-agent version with local labeling functions and the synchronization
/// step. `trajectories[i]` is agent i's local state sequence.
std::vector<LabeledTrajectory> local_labeled_trajectories(
    const std::vector<std::vector<LocalState>>& trajectories,
    const std::vector<const RewardMachine*>& projected,
    const std::vector<const LabelingRuleSet*>& locals, const CollaboratorIndex& idx);

/// Lock-step invariant: for all t and i, l_t ∩ Σ_i equals agent i's
/// synchronized label and u_t lies in agent i's projected state.
bool lockstep_consistent(const LabeledTrajectory& team,
                         const std::vector<LabeledTrajectory>& locals,
                         const std::vector<ProjectedRM>& projections,
                         const CollaboratorIndex& idx, std::string* why = nullptr);

struct LabelCheckReport {
  bool enumerated = false;
  double pairs = 0;  // |joint states| x |U|
  bool condition1 = true;  // |L(s,u) ∩ Σ_i| <= 1
  bool condition2 = true;  // unique local output over the consistent set
  bool condition3 = true;  // e ∉ L(s,u) => some i in I_e never sees e
  bool forward = true;     // e ∈ L(s,u) => all i in I_e see e
  bool local_rules_match = true;  // derived L_i equals the existential construction
  std::vector<std::string> violations;  // first violation per check

  bool ok() const { return condition1 && condition2 && condition3 && forward && local_rules_match; }
};

inline constexpr double kDefaultLabelCheckBudget = 1e7;

/// Brute force over every joint state (product of `agent_states`) and team
/// RM state. Throws BudgetError when the number of pairs exceeds `budget`.
LabelCheckReport check_label_decomposability(
    const RewardMachine& rm, const LabelingRuleSet& team,
    const std::vector<ProjectedRM>& projections, const std::vector<LabelingRuleSet>& locals,
    const CollaboratorIndex& idx, const std::vector<std::vector<LocalState>>& agent_states,
    double budget = kDefaultLabelCheckBudget);

std::string format_report(const LabelCheckReport& report);

}  // namespace rmc
