#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rmcoop/event.hpp"

namespace rmc {

using StateIndex = std::uint32_t;
inline constexpr StateIndex kNoState = std::numeric_limits<StateIndex>::max();

struct Transition {
  StateIndex from;
  Event event;
  StateIndex to;
};

/// Task-completion reward machine: a finite Mealy machine with a partial
/// transition function whose only nonzero output is 1 on entry into F.
///
/// Construction checks referential integrity (indices, alphabet membership,
/// names) and throws InputError. Determinism and absorbing final states are
/// semantic properties reported by validate(), so an ill-formed machine can
/// still be represented and diagnosed. For a nondeterministic (u, e) the
/// first listed transition is the one step() follows.
///
/// Instances are immutable once built.
class RewardMachine {
 public:
  /// One non-final state "u0", empty alphabet.
  RewardMachine() : RewardMachine({"u0"}, 0, EventAlphabet{}, {}, {}) {}
  RewardMachine(std::vector<std::string> state_names, StateIndex initial, EventAlphabet alphabet,
                std::vector<Transition> transitions, std::vector<StateIndex> final_states);

  struct NamedTransition {
    std::string from;
    std::string event;
    std::string to;
  };
  static RewardMachine from_names(std::vector<std::string> state_names, std::string_view initial,
                                  const std::vector<std::string>& alphabet,
                                  const std::vector<NamedTransition>& transitions,
                                  const std::vector<std::string>& final_states);

  std::size_t num_states() const { return names_.size(); }
  StateIndex initial() const { return initial_; }
  const EventAlphabet& alphabet() const { return alphabet_; }
  const std::vector<Transition>& transitions() const { return edges_; }
  const std::vector<std::string>& state_names() const { return names_; }
  const std::string& state_name(StateIndex u) const { return names_.at(u); }
  std::optional<StateIndex> find_state(std::string_view name) const;
  /// Throws InputError for unknown names.
  StateIndex state_index(std::string_view name) const;

  bool is_final(StateIndex u) const { return final_[u] != 0; }
  const std::vector<StateIndex>& final_states() const { return finals_; }

  /// Successor by alphabet position; kNoState when undefined. Unchecked.
  StateIndex next(StateIndex u, std::size_t event_pos) const {
    return table_[static_cast<std::size_t>(u) * alphabet_.size() + event_pos];
  }
  /// Successor for any event; kNoState when undefined or `e` is not in the
  /// alphabet. Unchecked on `u`.
  StateIndex next(StateIndex u, Event e) const {
    int p = alphabet_.position(e);
    return p < 0 ? kNoState : next(u, static_cast<std::size_t>(p));
  }
  bool enabled(StateIndex u, Event e) const { return next(u, e) != kNoState; }

  /// Structural equality: same state names and order, initial state,
  /// alphabet order, final set and transition set.
  friend bool operator==(const RewardMachine& a, const RewardMachine& b);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, StateIndex> index_;
  StateIndex initial_;
  EventAlphabet alphabet_;
  std::vector<Transition> edges_;
  std::vector<StateIndex> table_;
  std::vector<char> final_;
  std::vector<StateIndex> finals_;
};

struct StepResult {
  StateIndex next;
  int reward;
};

/// One transition. std::nullopt means "no transition" for a known event;
/// unknown states or events throw InputError.
std::optional<StepResult> step(const RewardMachine& rm, StateIndex u, Event e);

struct RunResult {
  StateIndex final_state;
  bool completed;
};

/// Runs from the initial state. Undefined transitions leave the state
/// unchanged; events after reaching F are ignored.
RunResult run(const RewardMachine& rm, const EventString& xi);

/// Extended transition function, same skip-undefined convention as run().
StateIndex delta_extended(const RewardMachine& rm, StateIndex u, const EventString& xi);

struct FoldResult {
  StateIndex state;
  int reward;
};

/// Applies a set of concurrent events in order. Events outside the
/// alphabet or without a transition are skipped; nothing moves once F is
/// reached. Reward is 1 iff the fold enters F from outside it. Unchecked.
FoldResult fold_events(const RewardMachine& rm, StateIndex u, std::span<const Event> events);

/// Violations of the task-completion invariants; empty iff well formed.
std::vector<std::string> validate(const RewardMachine& rm);

/// Subsequence of `xi` restricted to `sigma`, order preserved.
EventString natural_projection(const EventString& xi, const EventAlphabet& sigma);

/// Line-oriented text format:
///   states: u_I u_1 ...
///   initial: u_I
///   alphabet: YB GB ...
///   final: u_7
///   u_I -YB-> u_1
/// `#` starts a comment. Throws ParseError with the offending line number.
RewardMachine parse_rm(std::string_view text);
/// Canonical text: header sections in the order above, then transitions
/// sorted lexicographically by (source, event, target).
std::string serialize_rm(const RewardMachine& rm);

/// Reads and parses a file, then rejects machines failing validate().
RewardMachine load_rm(const std::string& path);

/// Names may not contain whitespace or any of `-:>#,`.
bool is_valid_identifier(std::string_view name);

}  // namespace rmc
