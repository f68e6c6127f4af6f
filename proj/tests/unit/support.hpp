#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rmcoop/domain.hpp"
#include "rmcoop/reward_machine.hpp"
#include "rmcoop/rng.hpp"

namespace rmc::oracle {

inline RewardMachine buttons_rm() { return parse_rm(*shipped_file("buttons_team.rm")); }

inline std::vector<EventAlphabet> buttons_sigmas() {
  return {EventAlphabet{"YB", "RB", "Goal"}, EventAlphabet{"YB", "GB", "A2RB", "A2NRB", "RB"},
          EventAlphabet{"GB", "A3RB", "A3NRB", "RB"}};
}

/// Random deterministic task-completion RM: states q0..q{n-1}, the last one
/// final and absorbing, each (state, event) defined with probability p.
inline RewardMachine random_rm(Rng& rng, std::size_t n, std::size_t events, double p) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < n; ++k) names.push_back("q" + std::to_string(k));
  std::vector<std::string> alpha;
  for (std::size_t k = 0; k < events; ++k) alpha.push_back("e" + std::to_string(k));
  std::vector<RewardMachine::NamedTransition> ts;
  for (std::size_t u = 0; u + 1 < n; ++u)
    for (std::size_t e = 0; e < events; ++e)
      if (rng.bernoulli(p)) ts.push_back({names[u], alpha[e], names[rng.below(n)]});
  return RewardMachine::from_names(names, "q0", alpha, ts, {names.back()});
}

/// Smallest equivalence with (1) u ~ delta(u, e) for e outside sigma and
/// (2) u ~ v, both e-defined, e in sigma => successors equivalent. Plain
/// boolean-matrix closure iterated to a fixed point.
inline std::vector<std::vector<bool>> brute_force_equivalence(const RewardMachine& rm,
                                                              const EventAlphabet& sigma) {
  const std::size_t n = rm.num_states();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t u = 0; u < n; ++u) r[u][u] = true;
  for (const auto& t : rm.transitions())
    if (!sigma.contains(t.event)) r[t.from][t.to] = r[t.to][t.from] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          if (r[a][k] && r[k][b] && !r[a][b]) r[a][b] = changed = true;
    for (Event e : sigma)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (!r[a][b]) continue;
          StateIndex x = rm.next(static_cast<StateIndex>(a), e), y = rm.next(static_cast<StateIndex>(b), e);
          if (x == kNoState || y == kNoState || r[x][y]) continue;
          r[x][y] = r[y][x] = changed = true;
        }
  }
  return r;
}

/// Exhaustive search over every event string up to `depth` (strings that
/// reach the same state pair are merged). Returns true when some string
/// makes the machines disagree on finality or on whether the next event
/// is defined. Undefined events leave a machine in place.
inline bool distinguishable_within(const RewardMachine& a, const RewardMachine& b, std::size_t depth) {
  EventAlphabet sigma = a.alphabet().united(b.alphabet());
  std::set<std::pair<StateIndex, StateIndex>> frontier{{a.initial(), b.initial()}}, seen = frontier;
  for (std::size_t d = 0; d <= depth; ++d) {
    std::set<std::pair<StateIndex, StateIndex>> next;
    for (auto [x, y] : frontier) {
      if (a.is_final(x) != b.is_final(y)) return true;
      for (Event e : sigma) {
        if (a.enabled(x, e) != b.enabled(y, e)) return true;
        std::pair<StateIndex, StateIndex> s{a.enabled(x, e) ? a.next(x, e) : x, b.enabled(y, e) ? b.next(y, e) : y};
        if (seen.insert(s).second) next.insert(s);
      }
    }
    frontier.swap(next);
  }
  return false;
}

/// Independent rendezvous-N team RM generator: states r<bits> and g<bits>,
/// bit k of the name is agent k+1.
inline std::string rendezvous_rm_text(std::size_t n) {
  auto bits = [&](std::size_t m) {
    std::string s;
    for (std::size_t k = 0; k < n; ++k) s += ((m >> k) & 1) ? '1' : '0';
    return s;
  };
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::string t = "states:";
  for (char p : {'r', 'g'})
    for (std::size_t m = 0; m <= full; ++m) t += std::string(" ") + p + bits(m);
  t += "\ninitial: r" + bits(0) + "\nalphabet:";
  for (std::size_t k = 1; k <= n; ++k) t += " Rdv_" + std::to_string(k);
  for (std::size_t k = 1; k <= n; ++k) t += " NRdv_" + std::to_string(k);
  t += " Rdv";
  for (std::size_t k = 1; k <= n; ++k) t += " G_" + std::to_string(k);
  t += "\nfinal: g" + bits(full) + "\n";
  for (std::size_t m = 0; m <= full; ++m)
    for (std::size_t k = 0; k < n; ++k) {
      if ((m >> k) & 1)
        t += "r" + bits(m) + " -NRdv_" + std::to_string(k + 1) + "-> r" + bits(m & ~(std::size_t{1} << k)) + "\n";
      else
        t += "r" + bits(m) + " -Rdv_" + std::to_string(k + 1) + "-> r" + bits(m | (std::size_t{1} << k)) + "\n";
    }
  t += "r" + bits(full) + " -Rdv-> g" + bits(0) + "\n";
  for (std::size_t m = 0; m <= full; ++m)
    for (std::size_t k = 0; k < n; ++k)
      if (!((m >> k) & 1))
        t += "g" + bits(m) + " -G_" + std::to_string(k + 1) + "-> g" + bits(m | (std::size_t{1} << k)) + "\n";
  return t;
}

/// Rendezvous-N domain config on a 10x10 open grid (R at (4,5)), built
/// test-side so the shipped generator is not its own oracle.
inline std::string rendezvous_config(std::size_t n) {
  std::string agents, labels, opts, cells = "\"R\": [4, 5]";
  for (std::size_t k = 1; k <= n; ++k) {
    std::string i = std::to_string(k), a = "A" + i;
    cells += ", \"G" + i + "\": [" + std::to_string(k % 10) + ", 9]";
    agents += std::string(k > 1 ? "," : "") + "{\"name\": \"" + a + "\", \"start\": [" + std::to_string(k % 10) +
              ", 0], \"events\": [\"Rdv_" + i + "\", \"NRdv_" + i + "\", \"Rdv\", \"G_" + i + "\"]}";
    labels += "{\"event\": \"Rdv_" + i + "\", \"at\": {\"" + a + "\": \"R\"}},";
    labels += "{\"event\": \"NRdv_" + i + "\", \"not_at\": {\"" + a + "\": \"R\"}},";
    labels += "{\"event\": \"G_" + i + "\", \"at\": {\"" + a + "\": \"G" + i + "\"}},";
    opts += std::string(k > 1 ? "," : "") + "\"" + a + "\": [{\"name\": \"hold\"}]";
  }
  std::string all;
  for (std::size_t k = 1; k <= n; ++k) all += std::string(k > 1 ? ", " : "") + "\"A" + std::to_string(k) + "\": \"R\"";
  labels += "{\"event\": \"Rdv\", \"at\": {" + all + "}}";
  std::string memory = "\"Rdv\"";
  for (std::size_t k = 1; k <= n; ++k) memory += ", \"G_" + std::to_string(k) + "\"";
  return "{\"name\": \"rdv-test\", \"grid\": {\"rows\": 10, \"cols\": 10}, \"slip_prob\": 0.02, \"cells\": {" +
         cells + "}, \"agents\": [" + agents + "], \"team_rm\": \"team.rm\", \"labels\": [" + labels +
         "], \"memory\": [" + memory + "], \"options\": {" + opts + "}}";
}

}  // namespace rmc::oracle
