#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmcoop/reward_machine.hpp"

namespace rmc {

/// Equivalence classes over the states of one reward machine.
struct Partition {
  /// Each block is sorted ascending; blocks are ordered by their smallest
  /// member, so block 0 always contains state 0.
  std::vector<std::vector<StateIndex>> blocks;
  std::vector<std::size_t> block_of;

  std::size_t size() const { return blocks.size(); }
  bool same_block(StateIndex a, StateIndex b) const { return block_of[a] == block_of[b]; }
};

/// Least equivalence such that (1) states joined by an edge labelled outside
/// `sigma_i` are equivalent and (2) equivalent states reach equivalent states
/// on any shared event of `sigma_i`. Computed as a union-find fixed point.
/// Throws InputError if `sigma_i` is not a subset of the alphabet.
Partition local_equivalence(const RewardMachine& rm, const EventAlphabet& sigma_i);

struct ProjectedRM {
  RewardMachine rm;
  /// Original state -> projected state.
  std::vector<StateIndex> block_map;
  Partition partition;

  /// Original states merged into projected state `b`.
  const std::vector<StateIndex>& members(StateIndex b) const { return partition.blocks[b]; }
};

/// Quotient of `rm` by local_equivalence(rm, sigma_i). Projected states are
/// named by their sorted member names joined with '+'. Throws
/// ProjectionError when the quotient is nondeterministic or a final block
/// has an outgoing transition.
ProjectedRM project(const RewardMachine& rm, const EventAlphabet& sigma_i);

/// Synchronous product: shared events move both sides, private events
/// interleave. Only states reachable from the initial pair are kept; the
/// pair (a, b) is named "(a|b)".
RewardMachine parallel_compose(const RewardMachine& a, const RewardMachine& b);
/// R_1 || (R_2 || (... || R_N)). Requires a nonempty list.
RewardMachine parallel_compose(std::span<const RewardMachine> machines);

struct BisimWitness {
  bool bisimilar = false;
  /// Empty when bisimilar, otherwise why the check failed.
  std::string reason;
  /// Pairs (state of first, state of second) visited by the check. When
  /// bisimilar, its equivalence closure is a bisimulation.
  std::vector<std::pair<StateIndex, StateIndex>> relation;
  /// A string after which the two machines disagree on final-state
  /// membership or on whether the next event is defined. May be absent
  /// only for an alphabet mismatch with otherwise matching behaviour.
  std::optional<EventString> counterexample;
};

/// Union-find (Hopcroft-Karp style) bisimilarity over partial transition
/// functions. Differing alphabets are never bisimilar; a counterexample is
/// still searched for over the union alphabet.
BisimWitness is_bisimilar(const RewardMachine& a, const RewardMachine& b);

struct DecompositionReport {
  bool cover_ok = false;
  /// Events of the team alphabet that no local event set contains.
  std::vector<Event> uncovered;
  std::vector<ProjectedRM> projections;
  std::optional<RewardMachine> composition;
  bool bisimilar = false;
  BisimWitness witness;
  /// Set when a projection was ill-formed.
  std::optional<std::string> error;
};

/// Checks the local event sets cover the alphabet, projects onto each,
/// composes the projections and compares against `rm`. A cover failure
/// stops the check early. Throws InputError when a local set contains an
/// event outside the alphabet.
DecompositionReport check_decomposition(const RewardMachine& rm,
                                        const std::vector<EventAlphabet>& sigmas);

std::string format_report(const DecompositionReport& report);

}  // namespace rmc
