#include "rmcoop/domain.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rmcoop/error.hpp"
#include "shipped_domains.hpp"

namespace rmc {

using nlohmann::json;

LocalState Domain::named_cell(const std::string& cell_name) const {
  auto it = cells.find(cell_name);
  if (it == cells.end()) throw InputError("unknown cell " + cell_name);
  return it->second;
}

std::vector<std::vector<LocalState>> Domain::label_classes() const {
  std::vector<std::set<LocalState>> mentioned(num_agents());
  for (const auto& r : team_labels.rules())
    for (const auto& a : r.atoms) mentioned[a.agent].insert(a.state);
  std::vector<std::vector<LocalState>> out(num_agents());
  for (std::size_t i = 0; i < num_agents(); ++i) {
    for (auto c : grid.free_cells()) {
      if (mentioned[i].count(c)) {
        out[i].push_back(c);
      }
    }
    for (auto c : grid.free_cells()) {
      if (!mentioned[i].count(c)) {
        out[i].push_back(c);
        break;
      }
    }
  }
  return out;
}

void wire_domain(Domain& d, std::vector<LabelRule> team_rules) {
  const std::size_t n = d.num_agents();
  d.idx = CollaboratorIndex(d.team_rm.alphabet(), d.local_sets);
  d.team_labels = LabelingRuleSet::team(d.team_rm, std::move(team_rules), d.idx);
  d.projections.clear();
  d.local_labels.clear();
  d.local_gates.clear();
  for (std::size_t i = 0; i < n; ++i) d.projections.push_back(project(d.team_rm, d.local_sets[i]));
  std::vector<std::vector<LocalState>> free(n, d.grid.free_cells());
  for (std::size_t i = 0; i < n; ++i) {
    d.local_labels.push_back(LabelingRuleSet::derive_local(d.team_labels, d.projections[i], i, free));
    d.local_gates.emplace_back(d.grid, d.projections[i].rm);
  }
  d.team_gates = GateTable(d.grid, d.team_rm);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }))
      fail(path + "/" + key, "unknown field");
  }
  for (const char* k : required)
    if (!obj.contains(k)) fail(path + "/" + k, "missing field");
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> get_strings(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_string(j[k], path + "/" + std::to_string(k)));
  return out;
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

GridPos get_pos(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [row, col]");
  GridPos p{get_int(j[0], path + "/0"), get_int(j[1], path + "/1")};
  if (p.row < 0 || p.row >= rows || p.col < 0 || p.col >= cols) fail(path, "cell outside the grid");
  return p;
}

// A list whose entries are [row, col] or {"rect": [r0, c0, r1, c1]}.
std::vector<GridPos> get_cells(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array()) fail(path, "expected an array of cells");
  std::vector<GridPos> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "/" + std::to_string(k);
    if (j[k].is_object()) {
      check_keys(j[k], p, {"rect"}, {"rect"});
      const auto& r = j[k]["rect"];
      if (!r.is_array() || r.size() != 4) fail(p + "/rect", "expected [r0, c0, r1, c1]");
      GridPos a = get_pos(json::array({r[0], r[1]}), p + "/rect", rows, cols);
      GridPos b = get_pos(json::array({r[2], r[3]}), p + "/rect", rows, cols);
      if (a.row > b.row || a.col > b.col) fail(p + "/rect", "empty rectangle");
      for (int row = a.row; row <= b.row; ++row)
        for (int col = a.col; col <= b.col; ++col) out.push_back({row, col});
    } else {
      out.push_back(get_pos(j[k], p, rows, cols));
    }
  }
  return out;
}

Event get_event(const json& j, const std::string& path, const RewardMachine& rm) {
  Event e = Event::intern(get_string(j, path));
  if (!rm.alphabet().contains(e)) fail(path, "event " + e.name() + " not in the team alphabet");
  return e;
}

}  // namespace

Domain parse_domain(const std::string& json_text,
                    const std::function<std::string(const std::string&)>& read_rm) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("/: invalid JSON: ") + err.what());
  }
  check_keys(root, "", {"name", "grid", "slip_prob", "walls", "regions", "cells", "agents", "team_rm",
                        "labels", "memory", "options", "desk_budget"},
             {"name", "grid", "agents", "team_rm", "labels"});

  Domain d;
  d.name = get_string(root["name"], "/name");

  check_keys(root["grid"], "/grid", {"rows", "cols"}, {"rows", "cols"});
  const int rows = get_int(root["grid"]["rows"], "/grid/rows");
  const int cols = get_int(root["grid"]["cols"], "/grid/cols");
  if (rows <= 0 || cols <= 0 || rows > 4096 || cols > 4096) fail("/grid", "size out of range");

  double slip = 0.02;
  if (root.contains("slip_prob")) {
    if (!root["slip_prob"].is_number()) fail("/slip_prob", "expected a number");
    slip = root["slip_prob"].get<double>();
    if (!(slip >= 0 && slip <= 1)) fail("/slip_prob", "must lie in [0, 1]");
  }

  std::vector<GridPos> walls;
  if (root.contains("walls")) walls = get_cells(root["walls"], "/walls", rows, cols);
  std::set<std::pair<int, int>> wall_set;
  for (auto w : walls) wall_set.insert({w.row, w.col});
  auto is_free = [&](GridPos p) { return !wall_set.count({p.row, p.col}); };
  auto to_cell = [&](GridPos p) { return static_cast<LocalState>(p.row * cols + p.col); };

  std::string rm_ref = get_string(root["team_rm"], "/team_rm");
  try {
    d.team_rm = parse_rm(read_rm(rm_ref));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    fail("/team_rm", rm_ref + ": " + err.what());
  }
  if (auto v = validate(d.team_rm); !v.empty()) fail("/team_rm", rm_ref + ": " + v.front());
  const auto& rm = d.team_rm;

  std::vector<Region> regions;
  if (root.contains("regions")) {
    const auto& jr = root["regions"];
    if (!jr.is_array()) fail("/regions", "expected an array");
    for (std::size_t k = 0; k < jr.size(); ++k) {
      const std::string p = "/regions/" + std::to_string(k);
      check_keys(jr[k], p, {"name", "gate", "cells"}, {"name", "gate", "cells"});
      Region r;
      r.name = get_string(jr[k]["name"], p + "/name");
      r.gate = get_event(jr[k]["gate"], p + "/gate", rm);
      for (auto c : get_cells(jr[k]["cells"], p + "/cells", rows, cols)) {
        if (!is_free(c)) fail(p + "/cells", "region cell is a wall");
        r.cells.push_back(to_cell(c));
      }
      regions.push_back(std::move(r));
    }
  }
  try {
    d.grid = GridWorld(rows, cols, walls, std::move(regions), slip);
  } catch (const InputError& err) {
    fail("/regions", err.what());
  }

  if (root.contains("cells")) {
    const auto& jc = root["cells"];
    if (!jc.is_object()) fail("/cells", "expected an object");
    for (const auto& [key, value] : jc.items()) {
      GridPos p = get_pos(value, "/cells/" + key, rows, cols);
      if (!is_free(p)) fail("/cells/" + key, "named cell is a wall");
      d.cells[key] = to_cell(p);
    }
  }
  auto cell_ref = [&](const json& j, const std::string& path) -> LocalState {
    if (j.is_string()) {
      auto it = d.cells.find(j.get<std::string>());
      if (it == d.cells.end()) fail(path, "unknown cell name " + j.get<std::string>());
      return it->second;
    }
    GridPos p = get_pos(j, path, rows, cols);
    if (!is_free(p)) fail(path, "cell is a wall");
    return to_cell(p);
  };

  const auto& ja = root["agents"];
  if (!ja.is_array() || ja.empty()) fail("/agents", "expected a nonempty array");
  for (std::size_t k = 0; k < ja.size(); ++k) {
    const std::string p = "/agents/" + std::to_string(k);
    check_keys(ja[k], p, {"name", "start", "events"}, {"name", "start", "events"});
    std::string agent_name = get_string(ja[k]["name"], p + "/name");
    if (std::find(d.agents.begin(), d.agents.end(), agent_name) != d.agents.end())
      fail(p + "/name", "duplicate agent " + agent_name);
    d.agents.push_back(agent_name);
    d.starts.push_back(cell_ref(ja[k]["start"], p + "/start"));
    EventAlphabet sigma;
    const auto& je = ja[k]["events"];
    if (!je.is_array()) fail(p + "/events", "expected an array");
    for (std::size_t m = 0; m < je.size(); ++m)
      sigma.insert(get_event(je[m], p + "/events/" + std::to_string(m), rm));
    d.local_sets.push_back(std::move(sigma));
  }
  auto agent_index = [&](const std::string& agent_name, const std::string& path) {
    auto it = std::find(d.agents.begin(), d.agents.end(), agent_name);
    if (it == d.agents.end()) fail(path, "unknown agent " + agent_name);
    return static_cast<std::size_t>(it - d.agents.begin());
  };

  std::vector<LabelRule> rules;
  const auto& jl = root["labels"];
  if (!jl.is_array()) fail("/labels", "expected an array");
  for (std::size_t k = 0; k < jl.size(); ++k) {
    const std::string p = "/labels/" + std::to_string(k);
    check_keys(jl[k], p, {"event", "at", "not_at", "guard"}, {"event"});
    LabelRule rule;
    rule.event = get_event(jl[k]["event"], p + "/event", rm);
    for (const char* key : {"at", "not_at"}) {
      if (!jl[k].contains(key)) continue;
      const auto& jat = jl[k][key];
      const std::string pk = p + "/" + key;
      if (!jat.is_object()) fail(pk, "expected an object mapping agents to cells");
      for (const auto& [agent_name, cell] : jat.items())
        rule.atoms.push_back({agent_index(agent_name, pk + "/" + agent_name),
                              cell_ref(cell, pk + "/" + agent_name), std::string(key) == "not_at"});
    }
    if (jl[k].contains("guard")) {
      std::vector<StateIndex> guard;
      for (const auto& s : get_strings(jl[k]["guard"], p + "/guard")) {
        auto u = rm.find_state(s);
        if (!u) fail(p + "/guard", "unknown RM state " + s);
        guard.push_back(*u);
      }
      rule.guard = std::move(guard);
    }
    rules.push_back(std::move(rule));
  }

  if (root.contains("memory")) {
    const auto& jm = root["memory"];
    if (!jm.is_array()) fail("/memory", "expected an array");
    for (std::size_t k = 0; k < jm.size(); ++k)
      d.memory_events.push_back(get_event(jm[k], "/memory/" + std::to_string(k), rm));
  }

  d.options.assign(d.num_agents(), {});
  if (root.contains("options")) {
    const auto& jo = root["options"];
    if (!jo.is_object()) fail("/options", "expected an object keyed by agent");
    for (const auto& [agent_name, list] : jo.items()) {
      const std::string p = "/options/" + agent_name;
      std::size_t i = agent_index(agent_name, p);
      if (!list.is_array()) fail(p, "expected an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string po = p + "/" + std::to_string(k);
        check_keys(list[k], po, {"name", "goto", "requires", "excludes"}, {"name"});
        OptionSpec o;
        o.name = get_string(list[k]["name"], po + "/name");
        if (list[k].contains("goto")) {
          o.kind = OptionSpec::Kind::go_to;
          o.target = cell_ref(list[k]["goto"], po + "/goto");
        }
        for (const char* key : {"requires", "excludes"}) {
          if (!list[k].contains(key)) continue;
          const auto& je = list[k][key];
          if (!je.is_array()) fail(po + "/" + key, "expected an array");
          auto& dst = std::string(key) == "requires" ? o.requires_events : o.excludes_events;
          for (std::size_t m = 0; m < je.size(); ++m) {
            Event e = get_event(je[m], po + "/" + key + "/" + std::to_string(m), rm);
            if (std::find(d.memory_events.begin(), d.memory_events.end(), e) == d.memory_events.end())
              fail(po + "/" + key, "event " + e.name() + " is not a memory event");
            dst.push_back(e);
          }
        }
        d.options[i].push_back(std::move(o));
      }
    }
  }

  if (root.contains("desk_budget")) {
    const auto& jb = root["desk_budget"];
    if (!jb.is_object()) fail("/desk_budget", "expected an object");
    for (const auto& [algo, steps] : jb.items()) {
      if (!steps.is_number_unsigned() || steps.get<std::uint64_t>() == 0)
        fail("/desk_budget/" + algo, "expected a positive integer");
      d.desk_budget[algo] = steps.get<std::uint64_t>();
    }
  }

  try {
    wire_domain(d, std::move(rules));
  } catch (const InputError& err) {
    fail("/agents", err.what());
  } catch (const ProjectionError& err) {
    fail("/agents", err.what());
  }
  return d;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::map<std::string, std::string>& shipped_names() {
  static const std::map<std::string, std::string> names = {
      {"buttons", "buttons.json"},
      {"rendezvous-2", "rendezvous2.json"},
      {"rendezvous-10", "rendezvous10.json"},
  };
  return names;
}

}  // namespace

std::optional<std::string> shipped_file(const std::string& file_name) {
  for (const auto& f : detail::shipped_files())
    if (f.name == file_name) return std::string(f.content);
  return std::nullopt;
}

std::vector<std::string> shipped_domain_names() {
  std::vector<std::string> out;
  for (const auto& [name, file] : shipped_names()) out.push_back(name);
  return out;
}

Domain make_domain(const std::string& name_or_path) {
  auto it = shipped_names().find(name_or_path);
  if (it != shipped_names().end()) {
    return parse_domain(*shipped_file(it->second), [](const std::string& ref) {
      auto text = shipped_file(ref);
      if (!text) throw ConfigError("/team_rm: no shipped machine " + ref);
      return *text;
    });
  }
  namespace fs = std::filesystem;
  if (!fs::exists(name_or_path))
    throw ConfigError(name_or_path + ": neither a shipped domain nor an existing file");
  fs::path dir = fs::path(name_or_path).parent_path();
  return parse_domain(read_file(name_or_path), [&](const std::string& ref) {
    fs::path p = dir / ref;
    if (fs::exists(p)) return read_file(p.string());
    if (auto text = shipped_file(ref)) return *text;
    throw ConfigError("/team_rm: cannot find " + ref);
  });
}

DomainCertificate certify(const Domain& d, double label_budget) {
  DomainCertificate cert;
  cert.decomposition = check_decomposition(d.team_rm, d.local_sets);
  if (!cert.decomposition.bisimilar) {
    cert.label_note = "label check not run: machine decomposition failed";
    return cert;
  }
  try {
    cert.labels = check_label_decomposability(d.team_rm, d.team_labels, d.projections,
                                              d.local_labels, d.idx, d.label_classes(), label_budget);
  } catch (const BudgetError& err) {
    cert.label_note = std::string("label check skipped: ") + err.what();
  }
  return cert;
}

}  // namespace rmc
