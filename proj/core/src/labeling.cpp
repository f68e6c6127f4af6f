#include "rmcoop/labeling.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "rmcoop/error.hpp"

namespace rmc {

CollaboratorIndex::CollaboratorIndex(const EventAlphabet& team,
                                     const std::vector<EventAlphabet>& local_sets)
    : team_(team), local_sets_(local_sets), agents_by_pos_(team.size()) {
  for (std::size_t i = 0; i < local_sets_.size(); ++i) {
    for (auto e : local_sets_[i]) {
      int p = team_.position(e);
      if (p < 0) throw InputError("local event " + e.name() + " is not a team event");
      agents_by_pos_[p].push_back(i);
    }
  }
  for (std::size_t p = 0; p < team_.size(); ++p)
    if (agents_by_pos_[p].empty())
      throw InputError("event " + team_[p].name() + " belongs to no local event set");
}

const std::vector<std::size_t>& CollaboratorIndex::agents(Event e) const {
  int p = team_.position(e);
  if (p < 0) throw InputError("event " + e.name() + " is not a team event");
  return agents_by_pos_[p];
}

namespace {

std::vector<char> guard_mask(const RewardMachine& rm, const LabelRule& r) {
  std::vector<char> mask(rm.num_states(), 0);
  if (r.guard) {
    for (auto u : *r.guard) {
      if (u >= rm.num_states()) throw InputError("rule guard state out of range");
      mask[u] = 1;
    }
  } else {
    for (StateIndex u = 0; u < rm.num_states(); ++u) mask[u] = rm.enabled(u, r.event) ? 1 : 0;
  }
  return mask;
}

bool atoms_compatible(const std::vector<Atom>& atoms, std::size_t agent, LocalState s) {
  for (const auto& a : atoms)
    if (a.agent == agent && ((a.state == s) == a.negated)) return false;
  return true;
}

}  // namespace

LabelingRuleSet LabelingRuleSet::team(const RewardMachine& rm, std::vector<LabelRule> rules,
                                      const CollaboratorIndex& idx) {
  LabelingRuleSet set;
  set.scope_ = Scope::team;
  set.num_rm_states_ = rm.num_states();
  const int width = static_cast<int>(rm.alphabet().size());
  for (const auto& r : rules) {
    int pos = rm.alphabet().position(r.event);
    if (pos < 0) throw InputError("rule event " + r.event.name() + " not in team alphabet");
    for (const auto& a : r.atoms)
      if (a.agent >= idx.num_agents())
        throw InputError("rule for " + r.event.name() + " refers to unknown agent");
    set.active_.push_back(guard_mask(rm, r));
    set.order_key_.push_back(static_cast<int>(idx.agents(r.event).front()) * width + pos);
  }
  set.rules_ = std::move(rules);
  return set;
}

LabelingRuleSet LabelingRuleSet::local(std::size_t agent, const RewardMachine& projected,
                                       std::vector<LabelRule> rules) {
  LabelingRuleSet set;
  set.scope_ = Scope::local;
  set.agent_ = agent;
  set.num_rm_states_ = projected.num_states();
  for (std::size_t k = 0; k < rules.size(); ++k) {
    const auto& r = rules[k];
    if (!projected.alphabet().contains(r.event))
      throw InputError("local rule event " + r.event.name() + " not in local event set");
    for (const auto& a : r.atoms)
      if (a.agent != 0) throw InputError("local rules may only refer to agent 0");
    set.active_.push_back(guard_mask(projected, r));
    set.order_key_.push_back(static_cast<int>(k));
  }
  set.rules_ = std::move(rules);
  return set;
}

LabelingRuleSet LabelingRuleSet::derive_local(
    const LabelingRuleSet& team, const ProjectedRM& projection, std::size_t agent,
    const std::vector<std::vector<LocalState>>& teammate_states) {
  if (team.scope_ != Scope::team) throw InputError("derive_local needs a team rule set");
  const auto& sigma_i = projection.rm.alphabet();
  std::vector<LabelRule> rules;
  for (std::size_t k = 0; k < team.rules_.size(); ++k) {
    const auto& r = team.rules_[k];
    if (!sigma_i.contains(r.event)) continue;

    bool satisfiable = true;
    for (std::size_t j = 0; j < teammate_states.size() && satisfiable; ++j) {
      if (j == agent) continue;
      const auto& states = teammate_states[j];
      satisfiable = std::any_of(states.begin(), states.end(),
                                [&](LocalState s) { return atoms_compatible(r.atoms, j, s); });
    }
    if (!satisfiable) continue;

    LabelRule local{r.event, {}, std::vector<StateIndex>{}};
    for (const auto& a : r.atoms)
      if (a.agent == agent) local.atoms.push_back({0, a.state, a.negated});
    for (StateIndex b = 0; b < projection.rm.num_states(); ++b) {
      const auto& members = projection.members(b);
      if (std::any_of(members.begin(), members.end(),
                      [&](StateIndex u) { return team.active_[k][u] != 0; }))
        local.guard->push_back(b);
    }
    if (local.guard->empty()) continue;
    rules.push_back(std::move(local));
  }
  return LabelingRuleSet::local(agent, projection.rm, std::move(rules));
}

bool LabelingRuleSet::matches(const LabelRule& r, std::size_t k, std::span<const LocalState> s,
                              StateIndex u) const {
  if (u >= num_rm_states_ || !active_[k][u]) return false;
  for (const auto& a : r.atoms) {
    if (a.agent >= s.size()) return false;
    if ((s[a.agent] == a.state) == a.negated) return false;
  }
  return true;
}

void LabelingRuleSet::label(std::span<const LocalState> s, StateIndex u,
                            std::vector<Event>& out) const {
  const std::size_t first = out.size();
  int last_key = -1;
  bool sorted = true;
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    if (!matches(rules_[k], k, s, u)) continue;
    Event e = rules_[k].event;
    if (std::find(out.begin() + first, out.end(), e) != out.end()) continue;
    if (order_key_[k] < last_key) sorted = false;
    last_key = std::max(last_key, order_key_[k]);
    out.push_back(e);
  }
  if (!sorted) {
    // Rare: rules declared out of agent order.
    auto key_of = [&](Event e) {
      for (std::size_t k = 0; k < rules_.size(); ++k)
        if (rules_[k].event == e) return order_key_[k];
      return 0;
    };
    std::stable_sort(out.begin() + first, out.end(),
                     [&](Event a, Event b) { return key_of(a) < key_of(b); });
  }
}

std::vector<std::string> LabelingRuleSet::co_fire_warnings(const CollaboratorIndex& idx) const {
  std::vector<std::string> out;
  for (std::size_t a = 0; a < rules_.size(); ++a) {
    for (std::size_t b = a + 1; b < rules_.size(); ++b) {
      const auto& ra = rules_[a];
      const auto& rb = rules_[b];
      if (ra.event == rb.event) continue;
      bool same_agent_set = false;
      if (scope_ == Scope::local) {
        same_agent_set = true;
      } else {
        for (auto i : idx.agents(ra.event)) {
          const auto& other = idx.agents(rb.event);
          if (std::find(other.begin(), other.end(), i) != other.end()) same_agent_set = true;
        }
      }
      if (!same_agent_set) continue;
      bool guards_overlap = false;
      for (std::size_t u = 0; u < num_rm_states_; ++u)
        if (active_[a][u] && active_[b][u]) guards_overlap = true;
      if (!guards_overlap) continue;
      bool contradictory = false;
      for (const auto& x : ra.atoms)
        for (const auto& y : rb.atoms)
          if (x.agent == y.agent && ((!x.negated && !y.negated && x.state != y.state) ||
                                     (x.negated != y.negated && x.state == y.state)))
            contradictory = true;
      if (!contradictory)
        out.push_back("rules " + std::to_string(a) + " (" + ra.event.name() + ") and " +
                      std::to_string(b) + " (" + rb.event.name() +
                      ") may fire together for one agent");
    }
  }
  return out;
}

std::vector<Event> label_team(const LabelingRuleSet& team, std::span<const LocalState> s,
                              StateIndex u) {
  if (team.scope() != Scope::team) throw InputError("label_team needs a team rule set");
  return team.label(s, u);
}

std::vector<Event> label_local(const LabelingRuleSet& local, LocalState s_i, StateIndex u_i) {
  if (local.scope() != Scope::local) throw InputError("label_local needs a local rule set");
  return local.label(std::span<const LocalState>(&s_i, 1), u_i);
}

std::vector<std::vector<Event>> synchronize(const std::vector<std::vector<Event>>& proposals,
                                            const CollaboratorIndex& idx) {
  if (proposals.size() != idx.num_agents())
    throw InputError("one proposal set per agent expected");
  std::vector<std::vector<Event>> out(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    for (auto e : proposals[i]) {
      const auto& collaborators = idx.agents(e);
      bool agreed = std::all_of(collaborators.begin(), collaborators.end(), [&](std::size_t j) {
        return std::find(proposals[j].begin(), proposals[j].end(), e) != proposals[j].end();
      });
      if (agreed) out[i].push_back(e);
    }
  }
  return out;
}

LabeledTrajectory team_labeled_trajectory(std::span<const JointState> trajectory,
                                          const RewardMachine& rm, const LabelingRuleSet& team) {
  if (trajectory.empty()) throw InputError("empty trajectory");
  LabeledTrajectory out;
  out.steps.reserve(trajectory.size());
  out.steps.push_back({trajectory[0], rm.initial(), {}});
  StateIndex u = rm.initial();
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    auto l = team.label(trajectory[t + 1], u);
    u = fold_events(rm, u, l).state;
    out.events.insert(out.events.end(), l.begin(), l.end());
    out.steps.push_back({trajectory[t + 1], u, std::move(l)});
  }
  return out;
}

std::vector<LabeledTrajectory> local_labeled_trajectories(
    const std::vector<std::vector<LocalState>>& trajectories,
    const std::vector<const RewardMachine*>& projected,
    const std::vector<const LabelingRuleSet*>& locals, const CollaboratorIndex& idx) {
  const std::size_t n = trajectories.size();
  if (n == 0 || projected.size() != n || locals.size() != n || idx.num_agents() != n)
    throw InputError("one trajectory, projected machine and local labeling per agent expected");
  const std::size_t len = trajectories[0].size();
  if (len == 0) throw InputError("empty trajectory");
  for (const auto& tr : trajectories)
    if (tr.size() != len) throw InputError("local trajectories differ in length");

  std::vector<LabeledTrajectory> out(n);
  std::vector<StateIndex> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = projected[i]->initial();
    out[i].steps.reserve(len);
    out[i].steps.push_back({{trajectories[i][0]}, u[i], {}});
  }
  std::vector<std::vector<Event>> proposals(n);
  for (std::size_t t = 0; t + 1 < len; ++t) {
    for (std::size_t i = 0; i < n; ++i) proposals[i] = label_local(*locals[i], trajectories[i][t + 1], u[i]);
    auto synced = synchronize(proposals, idx);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = fold_events(*projected[i], u[i], synced[i]).state;
      out[i].events.insert(out[i].events.end(), synced[i].begin(), synced[i].end());
      out[i].steps.push_back({{trajectories[i][t + 1]}, u[i], std::move(synced[i])});
    }
  }
  return out;
}

bool lockstep_consistent(const LabeledTrajectory& team,
                         const std::vector<LabeledTrajectory>& locals,
                         const std::vector<ProjectedRM>& projections,
                         const CollaboratorIndex& idx, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].steps.size() != team.steps.size()) return fail("length mismatch");
    const auto& sigma_i = idx.local_set(i);
    for (std::size_t t = 0; t < team.steps.size(); ++t) {
      std::vector<Event> a;
      for (auto e : team.steps[t].label)
        if (sigma_i.contains(e)) a.push_back(e);
      std::vector<Event> b = locals[i].steps[t].label;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b)
        return fail("agent " + std::to_string(i) + " label differs at t=" + std::to_string(t));
      if (projections[i].block_map[team.steps[t].rm_state] != locals[i].steps[t].rm_state)
        return fail("agent " + std::to_string(i) + " RM state not in its block at t=" +
                    std::to_string(t));
    }
  }
  return true;
}

namespace {

std::uint64_t to_mask(const EventAlphabet& team, const std::vector<Event>& events) {
  std::uint64_t m = 0;
  for (auto e : events) {
    int p = team.position(e);
    if (p >= 0) m |= std::uint64_t{1} << p;
  }
  return m;
}

std::string describe_joint(std::span<const LocalState> s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

}  // namespace

LabelCheckReport check_label_decomposability(
    const RewardMachine& rm, const LabelingRuleSet& team,
    const std::vector<ProjectedRM>& projections, const std::vector<LabelingRuleSet>& locals,
    const CollaboratorIndex& idx, const std::vector<std::vector<LocalState>>& agent_states,
    double budget) {
  LabelCheckReport report;
  const std::size_t n = agent_states.size();
  if (projections.size() != n || locals.size() != n || idx.num_agents() != n)
    throw InputError("one projection, local rule set and state list per agent expected");
  const auto& sigma = rm.alphabet();
  if (sigma.size() > 64) throw InputError("label check supports at most 64 events");

  double pairs = static_cast<double>(rm.num_states());
  for (const auto& s : agent_states) pairs *= static_cast<double>(s.size());
  report.pairs = pairs;
  if (pairs > budget) {
    std::ostringstream msg;
    msg << "label check would enumerate " << pairs << " (state, RM state) pairs, budget is "
        << budget;
    throw BudgetError(msg.str(), pairs);
  }
  report.enumerated = true;

  auto note = [&](bool& flag, const std::string& msg) {
    if (flag) report.violations.push_back(msg);
    flag = false;
  };

  std::vector<std::uint64_t> sigma_mask(n);
  for (std::size_t i = 0; i < n; ++i) sigma_mask[i] = to_mask(sigma, idx.local_set(i).events());

  // possible[i][pos * |U_i| + block]: events of Σ_i that L can emit from
  // some (s, u) consistent with agent i seeing (s_i, block).
  std::vector<std::vector<std::uint64_t>> possible(n);
  for (std::size_t i = 0; i < n; ++i)
    possible[i].assign(agent_states[i].size() * projections[i].rm.num_states(), 0);

  std::vector<std::size_t> pos(n, 0);
  JointState s(n);
  std::vector<Event> buf;
  auto for_each_joint = [&](auto&& body) {
    std::fill(pos.begin(), pos.end(), 0);
    if (std::any_of(agent_states.begin(), agent_states.end(), [](auto& v) { return v.empty(); }))
      return;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) s[i] = agent_states[i][pos[i]];
      body();
      std::size_t k = 0;
      while (k < n && ++pos[k] == agent_states[k].size()) pos[k++] = 0;
      if (k == n) break;
    }
  };

  for_each_joint([&] {
    for (StateIndex u = 0; u < rm.num_states(); ++u) {
      buf.clear();
      team.label(s, u, buf);
      std::uint64_t m = to_mask(sigma, buf);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t mi = m & sigma_mask[i];
        if (std::popcount(mi) > 1 && report.condition1)
          note(report.condition1, "condition 1: agent " + std::to_string(i) + " sees " +
                                      std::to_string(std::popcount(mi)) + " events at s=" +
                                      describe_joint(s) + ", u=" + rm.state_name(u));
        const auto nb = projections[i].rm.num_states();
        possible[i][pos[i] * nb + projections[i].block_map[u]] |= mi;
      }
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    const auto& proj = projections[i].rm;
    const auto nb = proj.num_states();
    for (std::size_t p = 0; p < agent_states[i].size(); ++p) {
      for (StateIndex b = 0; b < nb; ++b) {
        std::uint64_t m = possible[i][p * nb + b];
        if (std::popcount(m) > 1 && report.condition2)
          note(report.condition2, "condition 2: agent " + std::to_string(i) +
                                      " has no unique local output at s_i=" +
                                      std::to_string(agent_states[i][p]) + ", u_i=" +
                                      proj.state_name(b));
        std::uint64_t derived = to_mask(sigma, label_local(locals[i], agent_states[i][p], b));
        if (derived != m && report.local_rules_match)
          note(report.local_rules_match, "local rules of agent " + std::to_string(i) +
                                             " disagree with the existential labeling at s_i=" +
                                             std::to_string(agent_states[i][p]) + ", u_i=" +
                                             proj.state_name(b));
      }
    }
  }

  for_each_joint([&] {
    if (!report.condition3 && !report.forward) return;
    for (StateIndex u = 0; u < rm.num_states(); ++u) {
      buf.clear();
      team.label(s, u, buf);
      std::uint64_t m = to_mask(sigma, buf);
      for (std::size_t p = 0; p < sigma.size(); ++p) {
        const bool emitted = (m >> p) & 1;
        bool all_see = true;
        for (auto j : idx.agents(sigma[p])) {
          const auto nb = projections[j].rm.num_states();
          if (!((possible[j][pos[j] * nb + projections[j].block_map[u]] >> p) & 1)) {
            all_see = false;
            break;
          }
        }
        if (!emitted && all_see && report.condition3)
          note(report.condition3, "condition 3: " + sigma[p].name() +
                                      " is not under any collaborator's control at s=" +
                                      describe_joint(s) + ", u=" + rm.state_name(u));
        if (emitted && !all_see && report.forward)
          note(report.forward, "decomposability: " + sigma[p].name() +
                                   " emitted but not seen by every collaborator at s=" +
                                   describe_joint(s) + ", u=" + rm.state_name(u));
      }
    }
  });
  return report;
}

std::string format_report(const LabelCheckReport& r) {
  std::ostringstream out;
  out << "pairs enumerated: " << r.pairs << '\n';
  auto line = [&](const char* name, bool ok) { out << name << ": " << (ok ? "ok" : "VIOLATED") << '\n'; };
  line("condition 1 (one local event per step)", r.condition1);
  line("condition 2 (unique local output)", r.condition2);
  line("condition 3 (every event controlled)", r.condition3);
  line("emitted events seen by collaborators", r.forward);
  line("derived local rules", r.local_rules_match);
  for (const auto& v : r.violations) out << "  " << v << '\n';
  out << "decomposable: " << (r.ok() ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace rmc
