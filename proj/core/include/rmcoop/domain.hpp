#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmcoop/algebra.hpp"
#include "rmcoop/gridworld.hpp"
#include "rmcoop/labeling.hpp"

namespace rmc {

/// High-level option for the hierarchical baseline. A hold option keeps the
/// agent in place; a goto option drives it to `target`. The option is
/// offered only when every `requires` event and no `excludes` event is in
/// the memory.
struct OptionSpec {
  enum class Kind { hold, go_to };
  std::string name;
  Kind kind = Kind::hold;
  LocalState target = 0;
  std::vector<Event> requires_events;
  std::vector<Event> excludes_events;
};

/// A gridworld Markov game wired to its team task: dynamics, team RM,
/// local event sets and projections, team and local labeling rules, gate
/// tables, baseline memory events and option sets. Immutable after load.
struct Domain {
  std::string name;
  GridWorld grid;
  std::vector<std::string> agents;
  std::vector<LocalState> starts;
  std::map<std::string, LocalState> cells;

  RewardMachine team_rm;
  std::vector<EventAlphabet> local_sets;
  CollaboratorIndex idx;
  LabelingRuleSet team_labels;
  std::vector<ProjectedRM> projections;
  std::vector<LabelingRuleSet> local_labels;

  GateTable team_gates;
  std::vector<GateTable> local_gates;

  /// Events whose occurrence makes up the baselines' memory state.
  std::vector<Event> memory_events;
  std::vector<std::vector<OptionSpec>> options;
  /// Desk-scale training budgets per algorithm, in plotted training steps.
  std::map<std::string, std::uint64_t> desk_budget;

  std::size_t num_agents() const { return agents.size(); }
  LocalState named_cell(const std::string& name) const;

  /// One representative cell per class of cells that the team labeling
  /// rules cannot tell apart, per agent. Labels depend on an agent's cell
  /// only through the cells its atoms mention, so checking these is the
  /// same as checking every free cell.
  std::vector<std::vector<LocalState>> label_classes() const;
};

/// Builds every derived part (projections, derived local labels, gates) of
/// a domain from its primary parts. Throws ProjectionError when a local
/// event set gives an ill-formed projection.
void wire_domain(Domain& d, std::vector<LabelRule> team_rules);

/// Parses a domain config. `read_rm` resolves the team_rm reference to
/// machine text. Throws ConfigError naming the offending field path.
Domain parse_domain(const std::string& json_text,
                    const std::function<std::string(const std::string&)>& read_rm);

/// Shipped names: "buttons", "rendezvous-2", "rendezvous-10". Anything else
/// is treated as a path to a config file whose team_rm is resolved relative
/// to the file's directory.
Domain make_domain(const std::string& name_or_path);
std::vector<std::string> shipped_domain_names();
/// Contents of a file shipped inside the library (e.g. "buttons_team.rm").
std::optional<std::string> shipped_file(const std::string& file_name);

struct DomainCertificate {
  DecompositionReport decomposition;
  std::optional<LabelCheckReport> labels;
  /// Set when the label check was skipped (budget) or failed to run.
  std::string label_note;

  bool ok() const {
    return decomposition.bisimilar && (!labels || labels->ok());
  }
};

/// Runs both decomposition checkers. The label check runs over the
/// label classes and is skipped with a note when over `label_budget`.
DomainCertificate certify(const Domain& d, double label_budget = kDefaultLabelCheckBudget);

}  // namespace rmc
