#include "rmcoop/algebra.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "rmcoop/error.hpp"

namespace rmc {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace

Partition local_equivalence(const RewardMachine& rm, const EventAlphabet& sigma_i) {
  if (!sigma_i.is_subset_of(rm.alphabet()))
    throw InputError("local event set is not a subset of the machine's alphabet");
  const std::size_t n = rm.num_states();
  UnionFind uf(n);
  std::vector<const Transition*> local_edges;
  for (const auto& t : rm.transitions()) {
    if (sigma_i.contains(t.event))
      local_edges.push_back(&t);
    else
      uf.unite(t.from, t.to);
  }

  // Merge e-successors of equivalent states until nothing changes.
  std::vector<std::size_t> succ_rep(n);
  for (bool changed = true; changed;) {
    changed = false;
    for (auto e : sigma_i) {
      std::fill(succ_rep.begin(), succ_rep.end(), SIZE_MAX);
      for (const auto* t : local_edges) {
        if (t->event != e) continue;
        auto& rep = succ_rep[uf.find(t->from)];
        if (rep == SIZE_MAX)
          rep = t->to;
        else if (uf.unite(rep, t->to))
          changed = true;
      }
    }
  }

  Partition p;
  p.block_of.assign(n, SIZE_MAX);
  std::vector<std::size_t> block_of_root(n, SIZE_MAX);
  for (StateIndex u = 0; u < n; ++u) {
    auto r = uf.find(u);
    if (block_of_root[r] == SIZE_MAX) {
      block_of_root[r] = p.blocks.size();
      p.blocks.emplace_back();
    }
    p.block_of[u] = block_of_root[r];
    p.blocks[block_of_root[r]].push_back(u);
  }
  return p;
}

ProjectedRM project(const RewardMachine& rm, const EventAlphabet& sigma_i) {
  Partition part = local_equivalence(rm, sigma_i);

  std::vector<std::string> names;
  names.reserve(part.size());
  for (const auto& block : part.blocks) {
    std::vector<std::string> member_names;
    for (auto u : block) member_names.push_back(rm.state_name(u));
    std::sort(member_names.begin(), member_names.end());
    std::string name;
    for (const auto& m : member_names) name += (name.empty() ? "" : "+") + m;
    names.push_back(std::move(name));
  }

  std::vector<StateIndex> block_map(rm.num_states());
  for (StateIndex u = 0; u < rm.num_states(); ++u)
    block_map[u] = static_cast<StateIndex>(part.block_of[u]);

  std::vector<char> final_block(part.size(), 0);
  std::vector<StateIndex> finals;
  for (auto f : rm.final_states()) {
    if (!final_block[block_map[f]]) finals.push_back(block_map[f]);
    final_block[block_map[f]] = 1;
  }

  std::map<std::pair<StateIndex, std::uint32_t>, StateIndex> succ;
  std::vector<Transition> edges;
  for (const auto& t : rm.transitions()) {
    if (!sigma_i.contains(t.event)) continue;
    StateIndex a = block_map[t.from], b = block_map[t.to];
    auto [it, inserted] = succ.emplace(std::make_pair(a, t.event.id()), b);
    if (!inserted) {
      if (it->second != b)
        throw ProjectionError("projection ill-formed: block " + names[a] + " has two successors on " +
                              t.event.name() + " (" + names[it->second] + ", " + names[b] + ")");
      continue;
    }
    if (final_block[a])
      throw ProjectionError("projection ill-formed: final block " + names[a] +
                            " has an outgoing transition on " + t.event.name() +
                            "; the local event set may need more events");
    edges.push_back({a, t.event, b});
  }

  RewardMachine projected(std::move(names), block_map[rm.initial()], sigma_i, std::move(edges),
                          std::move(finals));
  return ProjectedRM{std::move(projected), std::move(block_map), std::move(part)};
}

RewardMachine parallel_compose(const RewardMachine& a, const RewardMachine& b) {
  EventAlphabet sigma = a.alphabet().united(b.alphabet());
  std::map<std::pair<StateIndex, StateIndex>, StateIndex> index;
  std::vector<std::pair<StateIndex, StateIndex>> pairs;
  std::vector<Transition> edges;

  auto intern = [&](StateIndex x, StateIndex y) {
    auto [it, inserted] = index.emplace(std::make_pair(x, y), static_cast<StateIndex>(pairs.size()));
    if (inserted) pairs.emplace_back(x, y);
    return it->second;
  };
  intern(a.initial(), b.initial());

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [x, y] = pairs[k];
    for (auto e : sigma) {
      const bool in_a = a.alphabet().contains(e), in_b = b.alphabet().contains(e);
      StateIndex nx = in_a ? a.next(x, e) : kNoState;
      StateIndex ny = in_b ? b.next(y, e) : kNoState;
      StateIndex target;
      if (in_a && in_b) {
        if (nx == kNoState || ny == kNoState) continue;
        target = intern(nx, ny);
      } else if (in_a) {
        if (nx == kNoState) continue;
        target = intern(nx, y);
      } else {
        if (ny == kNoState) continue;
        target = intern(x, ny);
      }
      edges.push_back({static_cast<StateIndex>(k), e, target});
    }
  }

  std::vector<std::string> names;
  std::vector<StateIndex> finals;
  names.reserve(pairs.size());
  for (StateIndex k = 0; k < pairs.size(); ++k) {
    auto [x, y] = pairs[k];
    names.push_back("(" + a.state_name(x) + "|" + b.state_name(y) + ")");
    if (a.is_final(x) && b.is_final(y)) finals.push_back(k);
  }
  return RewardMachine(std::move(names), 0, std::move(sigma), std::move(edges), std::move(finals));
}

RewardMachine parallel_compose(std::span<const RewardMachine> machines) {
  if (machines.empty()) throw InputError("parallel composition of an empty list");
  RewardMachine acc = machines.back();
  for (std::size_t i = machines.size() - 1; i-- > 0;) acc = parallel_compose(machines[i], acc);
  return acc;
}

BisimWitness is_bisimilar(const RewardMachine& a, const RewardMachine& b) {
  BisimWitness w;
  const bool same_alphabet = a.alphabet().same_set(b.alphabet());
  EventAlphabet sigma = a.alphabet().united(b.alphabet());
  const std::size_t na = a.num_states();
  UnionFind uf(na + b.num_states());

  struct Node {
    StateIndex x, y;
    std::size_t parent;
    Event via;
  };
  std::vector<Node> nodes;
  nodes.push_back({a.initial(), b.initial(), SIZE_MAX, Event{}});
  uf.unite(a.initial(), na + b.initial());

  auto path_to = [&](std::size_t k) {
    EventString xi;
    for (; nodes[k].parent != SIZE_MAX; k = nodes[k].parent) xi.push_back(nodes[k].via);
    std::reverse(xi.begin(), xi.end());
    return xi;
  };

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto [x, y, parent, via] = nodes[k];
    w.relation.emplace_back(x, y);
    if (a.is_final(x) != b.is_final(y)) {
      w.reason = "final-state membership differs";
      w.counterexample = path_to(k);
      break;
    }
    bool mismatch = false;
    for (auto e : sigma) {
      StateIndex nx = a.next(x, e), ny = b.next(y, e);
      if ((nx == kNoState) != (ny == kNoState)) {
        w.reason = "event " + e.name() + " defined in only one machine";
        auto xi = path_to(k);
        xi.push_back(e);
        w.counterexample = std::move(xi);
        mismatch = true;
        break;
      }
      if (nx == kNoState) continue;
      if (uf.unite(nx, na + ny)) nodes.push_back({nx, ny, k, e});
    }
    if (mismatch) break;
  }

  if (!same_alphabet) {
    w.bisimilar = false;
    w.reason = w.reason.empty() ? "alphabet mismatch" : "alphabet mismatch; " + w.reason;
  } else {
    w.bisimilar = !w.counterexample.has_value();
  }
  return w;
}

DecompositionReport check_decomposition(const RewardMachine& rm,
                                        const std::vector<EventAlphabet>& sigmas) {
  DecompositionReport report;
  EventAlphabet covered;
  for (const auto& s : sigmas) {
    if (!s.is_subset_of(rm.alphabet()))
      throw InputError("local event set contains events outside the team alphabet");
    covered = covered.united(s);
  }
  for (auto e : rm.alphabet())
    if (!covered.contains(e)) report.uncovered.push_back(e);
  report.cover_ok = report.uncovered.empty() && !sigmas.empty();
  if (!report.cover_ok) {
    report.witness.reason = "local event sets do not cover the alphabet";
    return report;
  }

  try {
    for (const auto& s : sigmas) report.projections.push_back(project(rm, s));
  } catch (const ProjectionError& err) {
    report.error = err.what();
    report.witness.reason = err.what();
    return report;
  }

  std::vector<RewardMachine> parts;
  parts.reserve(report.projections.size());
  for (const auto& p : report.projections) parts.push_back(p.rm);
  report.composition = parallel_compose(parts);
  report.witness = is_bisimilar(rm, *report.composition);
  report.bisimilar = report.witness.bisimilar;
  return report;
}

std::string format_report(const DecompositionReport& r) {
  std::ostringstream out;
  out << "cover: " << (r.cover_ok ? "ok" : "FAILED") << '\n';
  if (!r.uncovered.empty()) {
    out << "uncovered events:";
    for (auto e : r.uncovered) out << ' ' << e.name();
    out << '\n';
  }
  for (std::size_t i = 0; i < r.projections.size(); ++i) {
    const auto& p = r.projections[i].rm;
    out << "projection " << i + 1 << ": " << p.num_states() << " states, "
        << p.transitions().size() << " transitions, final:";
    for (auto f : p.final_states()) out << ' ' << p.state_name(f);
    out << '\n';
  }
  if (r.composition)
    out << "composition: " << r.composition->num_states() << " reachable states\n";
  if (r.error) out << "error: " << *r.error << '\n';
  out << "bisimilar: " << (r.bisimilar ? "true" : "false") << '\n';
  if (!r.bisimilar && !r.witness.reason.empty()) out << "reason: " << r.witness.reason << '\n';
  if (r.witness.counterexample)
    out << "counterexample: " << to_string(*r.witness.counterexample) << '\n';
  return out.str();
}

}  // namespace rmc
