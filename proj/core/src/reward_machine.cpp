#include "rmcoop/reward_machine.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "rmcoop/error.hpp"

namespace rmc {

bool is_valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '-' || c == ':' || c == '>' ||
        c == '#' || c == ',')
      return false;
  }
  return true;
}

RewardMachine::RewardMachine(std::vector<std::string> state_names, StateIndex initial,
                             EventAlphabet alphabet, std::vector<Transition> transitions,
                             std::vector<StateIndex> final_states)
    : names_(std::move(state_names)),
      initial_(initial),
      alphabet_(std::move(alphabet)),
      edges_(std::move(transitions)) {
  if (names_.empty()) throw InputError("reward machine needs at least one state");
  for (StateIndex u = 0; u < names_.size(); ++u) {
    if (!is_valid_identifier(names_[u]))
      throw InputError("invalid state name '" + names_[u] + "'");
    if (!index_.emplace(names_[u], u).second)
      throw InputError("duplicate state '" + names_[u] + "'");
  }
  for (auto e : alphabet_)
    if (!is_valid_identifier(e.name())) throw InputError("invalid event name '" + e.name() + "'");
  const auto n = static_cast<StateIndex>(names_.size());
  if (initial_ >= n) throw InputError("initial state out of range");

  final_.assign(n, 0);
  for (auto f : final_states) {
    if (f >= n) throw InputError("final state out of range");
    if (!final_[f]) finals_.push_back(f);
    final_[f] = 1;
  }
  std::sort(finals_.begin(), finals_.end());

  table_.assign(static_cast<std::size_t>(n) * alphabet_.size(), kNoState);
  for (const auto& t : edges_) {
    if (t.from >= n || t.to >= n) throw InputError("transition endpoint out of range");
    int p = alphabet_.position(t.event);
    if (p < 0) throw InputError("transition event '" + t.event.name() + "' not in alphabet");
    auto& slot = table_[static_cast<std::size_t>(t.from) * alphabet_.size() + p];
    if (slot == kNoState) slot = t.to;
  }
}

RewardMachine RewardMachine::from_names(std::vector<std::string> state_names,
                                        std::string_view initial,
                                        const std::vector<std::string>& alphabet,
                                        const std::vector<NamedTransition>& transitions,
                                        const std::vector<std::string>& final_states) {
  std::unordered_map<std::string, StateIndex> idx;
  for (StateIndex u = 0; u < state_names.size(); ++u) idx.emplace(state_names[u], u);
  auto lookup = [&](const std::string& s) {
    auto it = idx.find(s);
    if (it == idx.end()) throw InputError("unknown state '" + s + "'");
    return it->second;
  };
  EventAlphabet sigma(alphabet);
  std::vector<Transition> edges;
  edges.reserve(transitions.size());
  for (const auto& t : transitions)
    edges.push_back({lookup(t.from), Event::intern(t.event), lookup(t.to)});
  std::vector<StateIndex> finals;
  for (const auto& f : final_states) finals.push_back(lookup(f));
  StateIndex init = lookup(std::string(initial));
  return RewardMachine(std::move(state_names), init, std::move(sigma), std::move(edges),
                       std::move(finals));
}

std::optional<StateIndex> RewardMachine::find_state(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateIndex RewardMachine::state_index(std::string_view name) const {
  auto u = find_state(name);
  if (!u) throw InputError("unknown state '" + std::string(name) + "'");
  return *u;
}

namespace {

using EdgeKey = std::tuple<std::string, std::string, std::string>;

std::vector<EdgeKey> sorted_edge_keys(const RewardMachine& rm) {
  std::vector<EdgeKey> keys;
  keys.reserve(rm.transitions().size());
  for (const auto& t : rm.transitions())
    keys.emplace_back(rm.state_name(t.from), t.event.name(), rm.state_name(t.to));
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

bool operator==(const RewardMachine& a, const RewardMachine& b) {
  return a.names_ == b.names_ && a.initial_ == b.initial_ && a.alphabet_ == b.alphabet_ &&
         a.finals_ == b.finals_ && sorted_edge_keys(a) == sorted_edge_keys(b);
}

std::optional<StepResult> step(const RewardMachine& rm, StateIndex u, Event e) {
  if (u >= rm.num_states()) throw InputError("unknown state index " + std::to_string(u));
  int p = rm.alphabet().position(e);
  if (p < 0) throw InputError("event '" + e.name() + "' not in alphabet");
  StateIndex v = rm.next(u, static_cast<std::size_t>(p));
  if (v == kNoState) return std::nullopt;
  int reward = (!rm.is_final(u) && rm.is_final(v)) ? 1 : 0;
  return StepResult{v, reward};
}

namespace {

void check_in_alphabet(const RewardMachine& rm, const EventString& xi) {
  for (auto e : xi)
    if (!rm.alphabet().contains(e)) throw InputError("event '" + e.name() + "' not in alphabet");
}

}  // namespace

StateIndex delta_extended(const RewardMachine& rm, StateIndex u, const EventString& xi) {
  if (u >= rm.num_states()) throw InputError("unknown state index " + std::to_string(u));
  check_in_alphabet(rm, xi);
  return fold_events(rm, u, xi).state;
}

RunResult run(const RewardMachine& rm, const EventString& xi) {
  StateIndex u = delta_extended(rm, rm.initial(), xi);
  return {u, rm.is_final(u)};
}

FoldResult fold_events(const RewardMachine& rm, StateIndex u, std::span<const Event> events) {
  const bool was_final = rm.is_final(u);
  for (auto e : events) {
    if (rm.is_final(u)) break;
    StateIndex v = rm.next(u, e);
    if (v != kNoState) u = v;
  }
  return {u, (!was_final && rm.is_final(u)) ? 1 : 0};
}

std::vector<std::string> validate(const RewardMachine& rm) {
  std::vector<std::string> out;
  std::map<std::pair<StateIndex, std::uint32_t>, std::vector<StateIndex>> succ;
  std::set<StateIndex> reported_final;
  for (const auto& t : rm.transitions()) {
    succ[{t.from, t.event.id()}].push_back(t.to);
    if (rm.is_final(t.from) && reported_final.insert(t.from).second)
      out.push_back("outgoing transition from final state " + rm.state_name(t.from));
  }
  for (const auto& [key, targets] : succ) {
    if (targets.size() < 2) continue;
    std::set<StateIndex> distinct(targets.begin(), targets.end());
    std::string what = distinct.size() > 1 ? "nondeterministic transition" : "duplicate transition";
    what += " (" + rm.state_name(key.first) + ", ";
    for (const auto& t : rm.transitions())
      if (t.from == key.first && t.event.id() == key.second) {
        what += t.event.name();
        break;
      }
    what += "):";
    for (auto v : distinct) what += " " + rm.state_name(v);
    out.push_back(what);
  }
  return out;
}

EventString natural_projection(const EventString& xi, const EventAlphabet& sigma) {
  EventString out;
  for (auto e : xi)
    if (sigma.contains(e)) out.push_back(e);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

RewardMachine parse_rm(std::string_view text) {
  std::optional<std::vector<std::string>> states, initial, alphabet, finals;
  struct Line {
    std::size_t no;
    std::string from, event, to;
  };
  std::vector<Line> lines;
  std::set<std::tuple<std::string, std::string, std::string>> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (auto colon = line.find(':'); colon != std::string_view::npos) {
      std::string key(trim(line.substr(0, colon)));
      auto values = split_ws(line.substr(colon + 1));
      std::optional<std::vector<std::string>>* slot = nullptr;
      if (key == "states") slot = &states;
      else if (key == "initial") slot = &initial;
      else if (key == "alphabet") slot = &alphabet;
      else if (key == "final") slot = &finals;
      else throw ParseError(line_no, "unknown section '" + key + "'");
      if (slot->has_value()) throw ParseError(line_no, "section '" + key + "' repeated");
      for (const auto& v : values)
        if (!is_valid_identifier(v)) throw ParseError(line_no, "invalid identifier '" + v + "'");
      *slot = std::move(values);
      continue;
    }

    // transition: src -EVENT-> dst, whitespace optional around the pieces
    auto arrow = line.find("->");
    auto dash = line.find('-');
    if (arrow == std::string_view::npos || dash == std::string_view::npos || dash >= arrow)
      throw ParseError(line_no, "expected 'source -EVENT-> target'");
    std::string from(trim(line.substr(0, dash)));
    std::string event(trim(line.substr(dash + 1, arrow - dash - 1)));
    std::string to(trim(line.substr(arrow + 2)));
    if (!is_valid_identifier(from) || !is_valid_identifier(event) || !is_valid_identifier(to))
      throw ParseError(line_no, "expected 'source -EVENT-> target'");
    if (!seen.emplace(from, event, to).second)
      throw ParseError(line_no, "duplicate transition " + from + " -" + event + "-> " + to);
    lines.push_back({line_no, std::move(from), std::move(event), std::move(to)});
    if (eol == text.size()) break;
  }

  if (!states) throw ParseError(0, "missing 'states:' section");
  if (!initial) throw ParseError(0, "missing 'initial:' section");
  if (!alphabet) throw ParseError(0, "missing 'alphabet:' section");
  if (!finals) throw ParseError(0, "missing 'final:' section");
  if (initial->size() != 1) throw ParseError(0, "'initial:' needs exactly one state");

  std::unordered_map<std::string, StateIndex> idx;
  for (StateIndex u = 0; u < states->size(); ++u)
    if (!idx.emplace((*states)[u], u).second)
      throw ParseError(0, "duplicate state '" + (*states)[u] + "'");
  auto lookup = [&](const std::string& s, std::size_t no) {
    auto it = idx.find(s);
    if (it == idx.end()) throw ParseError(no, "unknown state '" + s + "'");
    return it->second;
  };

  EventAlphabet sigma;
  for (const auto& a : *alphabet)
    if (!sigma.insert(Event::intern(a))) throw ParseError(0, "duplicate event '" + a + "'");

  std::vector<Transition> edges;
  edges.reserve(lines.size());
  for (const auto& l : lines) {
    Event e = Event::intern(l.event);
    if (!sigma.contains(e)) throw ParseError(l.no, "event '" + l.event + "' not in alphabet");
    edges.push_back({lookup(l.from, l.no), e, lookup(l.to, l.no)});
  }
  std::vector<StateIndex> fs;
  for (const auto& f : *finals) fs.push_back(lookup(f, 0));
  StateIndex init = lookup(initial->front(), 0);
  return RewardMachine(std::move(*states), init, std::move(sigma), std::move(edges),
                       std::move(fs));
}

std::string serialize_rm(const RewardMachine& rm) {
  std::ostringstream out;
  out << "states:";
  for (const auto& n : rm.state_names()) out << ' ' << n;
  out << "\ninitial: " << rm.state_name(rm.initial()) << "\nalphabet:";
  for (auto e : rm.alphabet()) out << ' ' << e.name();
  out << "\nfinal:";
  for (auto f : rm.final_states()) out << ' ' << rm.state_name(f);
  out << '\n';
  for (const auto& [from, ev, to] : sorted_edge_keys(rm))
    out << from << " -" << ev << "-> " << to << '\n';
  return out.str();
}

RewardMachine load_rm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RewardMachine rm = parse_rm(buf.str());
  auto problems = validate(rm);
  if (!problems.empty()) throw InputError(path + ": " + problems.front());
  return rm;
}

}  // namespace rmc
