// Acceptance suite: one PASS/FAIL line per criterion, details indented below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <iostream>
#include <sstream>
#include <string>

#include "../unit/support.hpp"
#include "rmcoop/algebra.hpp"
#include "rmcoop/domain.hpp"
#include "rmcoop/error.hpp"
#include "rmcoop/experiments.hpp"
#include "rmcoop/learners.hpp"
#include "rmcoop/qrm.hpp"

using namespace rmc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> notes;
};

int failures = 0;

void report(int n, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.summary = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  bool in_time = secs < limit_s;
  bool ok = o.pass && in_time;
  failures += !ok;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << o.summary << " [" << secs << " s, limit "
       << limit_s << " s" << (in_time ? "" : ", OVER TIME") << "]";
  std::cout << line.str() << "\n";
  for (const auto& note : o.notes) std::cout << "    " << note << "\n";
  std::cout.flush();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Hand-written projections of the buttons task onto the three local sets.
std::vector<RewardMachine> expected_buttons_projections() {
  return {
      RewardMachine::from_names({"p0", "p1", "p2", "p3"}, "p0", {"YB", "RB", "Goal"},
                                {{"p0", "YB", "p1"}, {"p1", "RB", "p2"}, {"p2", "Goal", "p3"}}, {"p3"}),
      RewardMachine::from_names({"p0", "p1", "p2", "p3", "p4"}, "p0", {"YB", "GB", "A2RB", "A2NRB", "RB"},
                                {{"p0", "YB", "p1"},
                                 {"p1", "GB", "p2"},
                                 {"p2", "A2RB", "p3"},
                                 {"p3", "A2NRB", "p2"},
                                 {"p3", "RB", "p4"}},
                                {"p4"}),
      RewardMachine::from_names({"p0", "p1", "p2", "p3"}, "p0", {"GB", "A3RB", "A3NRB", "RB"},
                                {{"p0", "GB", "p1"}, {"p1", "A3RB", "p2"}, {"p2", "A3NRB", "p1"}, {"p2", "RB", "p3"}},
                                {"p3"}),
  };
}

Outcome criterion1() {
  RewardMachine rm = oracle::buttons_rm();
  auto sig = oracle::buttons_sigmas();
  DecompositionReport rep = check_decomposition(rm, sig);
  Outcome o;
  std::vector<std::size_t> sizes;
  bool partitions_ok = true, shapes_ok = true;
  auto expected = expected_buttons_projections();
  for (std::size_t i = 0; i < rep.projections.size(); ++i) {
    sizes.push_back(rep.projections[i].rm.num_states());
    auto closure = oracle::brute_force_equivalence(rm, sig[i]);
    for (StateIndex a = 0; a < rm.num_states(); ++a)
      for (StateIndex b = 0; b < rm.num_states(); ++b)
        partitions_ok = partitions_ok && rep.projections[i].partition.same_block(a, b) == closure[a][b];
    // Both are deterministic, trim and minimal: bisimilar with equal size
    // means isomorphic.
    shapes_ok = shapes_ok && rep.projections[i].rm.num_states() == expected[i].num_states() &&
                is_bisimilar(rep.projections[i].rm, expected[i]).bisimilar;
  }
  bool no_string = rep.composition && !oracle::distinguishable_within(*rep.composition, rm, 12);
  bool sizes_ok = sizes == std::vector<std::size_t>{4, 5, 4};
  o.pass = rep.bisimilar && sizes_ok && partitions_ok && shapes_ok && no_string;
  o.summary = "buttons certificate: bisimilar=" + std::string(rep.bisimilar ? "true" : "false") + ", projection sizes " +
              std::to_string(sizes.size() > 0 ? sizes[0] : 0) + "/" + std::to_string(sizes.size() > 1 ? sizes[1] : 0) +
              "/" + std::to_string(sizes.size() > 2 ? sizes[2] : 0);
  o.notes.push_back(std::string("partitions match brute-force closure: ") + (partitions_ok ? "yes" : "no"));
  o.notes.push_back(std::string("projections isomorphic to hand-written machines: ") + (shapes_ok ? "yes" : "no"));
  o.notes.push_back(std::string("no distinguishing string up to depth 12: ") + (no_string ? "yes" : "no"));
  return o;
}

Outcome criterion2() {
  auto sig = oracle::buttons_sigmas();
  sig[0] = sig[0].without(Event::intern("YB"));
  RewardMachine rm = oracle::buttons_rm();
  DecompositionReport rep = check_decomposition(rm, sig);
  Outcome o;
  bool oracle_distinct = rep.composition && oracle::distinguishable_within(*rep.composition, rm, 12);
  o.pass = !rep.bisimilar && rep.witness.counterexample.has_value();
  o.summary = "Sigma_1 without YB: bisimilar=" + std::string(rep.bisimilar ? "true" : "false") +
              (rep.witness.counterexample ? ", counterexample \"" + to_string(*rep.witness.counterexample) + "\""
                                          : ", no counterexample");
  o.notes.push_back(std::string("exhaustive search to depth 12 finds a distinguishing string: ") +
                    (oracle_distinct ? "yes" : "no"));
  if (rep.bisimilar)
    o.notes.push_back("expected red: YB stays in Sigma_2, so the composition still orders YB before GB");

  // Diagnostic only: the failure shows up at the labeling level.
  Domain d = make_domain("buttons");
  d.local_sets[0] = d.local_sets[0].without(Event::intern("YB"));
  wire_domain(d, d.team_labels.rules());
  LabelCheckReport lc = check_label_decomposability(d.team_rm, d.team_labels, d.projections, d.local_labels, d.idx,
                                                    d.label_classes());
  o.notes.push_back(std::string("diagnostic (not counted): labeling check with Sigma_1 without YB: ") +
                    (lc.ok() ? "accepted" : "rejected") + ", condition 3 " + (lc.condition3 ? "holds" : "violated"));
  if (!lc.violations.empty()) o.notes.push_back("    " + lc.violations.front());
  return o;
}

// Precomputed slip-free distances to every named cell, ignoring gates.
struct Attractors {
  std::vector<LocalState> cells;
  std::vector<std::vector<int>> dist;
  explicit Attractors(const Domain& d) {
    for (const auto& [name, c] : d.cells) {
      cells.push_back(c);
      dist.push_back(d.grid.distances(c, 0));
    }
  }
};

// One team trajectory. Pure walks draw uniform actions; biased walks move
// each agent toward a randomly chosen named cell most of the time and
// linger there, so that many trajectories complete the task.
std::vector<JointState> random_walk(const Domain& d, const Attractors& at, bool biased, Rng& rng,
                                    std::size_t max_len) {
  const std::size_t n = d.num_agents();
  std::vector<JointState> traj{d.starts};
  std::vector<std::size_t> target(n);
  for (auto& t : target) t = rng.below(at.cells.size());
  StateIndex u = d.team_rm.initial();
  std::vector<Event> buf;
  for (std::size_t t = 0; t < max_len && !d.team_rm.is_final(u); ++t) {
    const JointState& s = traj.back();
    JointState s2(n);
    RegionMask closed = d.team_gates.closed(u);
    for (std::size_t i = 0; i < n; ++i) {
      Action a = kActions[rng.below(kNumActions)];
      if (biased) {
        if (s[i] == at.cells[target[i]] ? rng.bernoulli(0.15) : rng.bernoulli(0.01))
          target[i] = rng.below(at.cells.size());
        if (rng.bernoulli(0.8)) {
          const auto& dist = at.dist[target[i]];
          a = Action::stay;
          int best = dist[s[i]];
          for (Action b : kActions) {
            LocalState c = d.grid.target(s[i], b);
            if (dist[c] >= 0 && dist[c] < best) {
              best = dist[c];
              a = b;
            }
          }
        }
      }
      s2[i] = step_agent(d.grid, s[i], a, closed, rng);
    }
    buf = label_team(d.team_labels, s2, u);
    u = fold_events(d.team_rm, u, buf).state;
    traj.push_back(std::move(s2));
  }
  return traj;
}

Outcome criterion3() {
  Outcome o;
  o.pass = true;
  std::size_t total = 0;
  for (const char* name : {"buttons", "rendezvous-2"}) {
    Domain d = make_domain(name);
    Attractors at(d);
    Rng rng(Rng::mix(3, total));
    std::vector<const RewardMachine*> pr;
    std::vector<const LabelingRuleSet*> ls;
    for (std::size_t i = 0; i < d.num_agents(); ++i) {
      pr.push_back(&d.projections[i].rm);
      ls.push_back(&d.local_labels[i]);
    }
    const std::size_t trajectories = 10000;
    std::size_t violations = 0, lockstep = 0, completed = 0, longest = 0;
    for (std::size_t k = 0; k < trajectories; ++k) {
      auto traj = random_walk(d, at, k % 2 == 1, rng, 1000);
      longest = std::max(longest, traj.size() - 1);
      auto team = team_labeled_trajectory(traj, d.team_rm, d.team_labels);
      std::vector<std::vector<LocalState>> per(d.num_agents());
      for (const auto& s : traj)
        for (std::size_t i = 0; i < d.num_agents(); ++i) per[i].push_back(s[i]);
      auto locals = local_labeled_trajectories(per, pr, ls, d.idx);
      bool team_done = d.team_rm.is_final(team.final_rm_state());
      bool all_local = true;
      for (std::size_t i = 0; i < d.num_agents(); ++i)
        all_local = all_local && d.projections[i].rm.is_final(locals[i].final_rm_state());
      violations += team_done != all_local;
      lockstep += !lockstep_consistent(team, locals, d.projections, d.idx);
      completed += team_done;
    }
    total += trajectories;
    o.pass = o.pass && violations == 0 && lockstep == 0 && completed > 0;
    o.notes.push_back(std::string(name) + ": " + std::to_string(trajectories) + " trajectories (max length " +
                      std::to_string(longest) + "), " + std::to_string(completed) + " completed, " +
                      std::to_string(violations) + " verdict violations, " + std::to_string(lockstep) +
                      " lock-step violations");
  }
  o.summary = "team verdict equals conjunction of projected verdicts on " + std::to_string(total) + " trajectories";
  return o;
}

struct MonteCarlo {
  double v = 0;
  std::vector<double> vi;
};

MonteCarlo estimate(const Domain& d, const std::vector<QBank>& banks, bool greedy, std::size_t episodes,
                    std::uint64_t seed) {
  TrainerConfig cfg;
  Rng rng(seed);
  MonteCarlo m;
  m.vi.assign(d.num_agents(), 0);
  for (std::size_t e = 0; e < episodes; ++e) {
    EpisodeResult r = dqprm_execute(d, banks, cfg, greedy, rng);
    m.v += r.completed;
    for (std::size_t i = 0; i < d.num_agents(); ++i) m.vi[i] += r.local_completed[i];
  }
  m.v /= static_cast<double>(episodes);
  for (double& x : m.vi) x /= static_cast<double>(episodes);
  return m;
}

Outcome criterion4() {
  const Domain d = make_domain("rendezvous-2");
  const std::size_t episodes = 10000;
  // Some desk-scale runs stay stuck at the horizon (see criterion 6's q75);
  // take the first seed whose greedy test completes so V is not trivially 0.
  TrainerConfig cfg;
  std::unique_ptr<DqprmLearner> trained;
  std::uint64_t seed = 0;
  for (; seed < 10; ++seed) {
    cfg.seed = seed;
    trained = std::make_unique<DqprmLearner>(d, cfg);
    trained->train(d.desk_budget.at("dqprm"));
    Rng probe(seed);
    if (trained->test(probe).completed) break;
  }
  DqprmLearner untrained(d, cfg);
  Outcome o;
  o.pass = true;
  auto se = [&](double p) { return std::sqrt(p * (1 - p) / static_cast<double>(episodes)); };
  struct Case {
    const char* name;
    std::vector<QBank> banks;
    bool greedy;
  };
  for (const Case& c : {Case{"trained DQPRM (greedy)", trained->snapshot(), true},
                        Case{"untrained (uniform random)", untrained.snapshot(), false}}) {
    MonteCarlo m = estimate(d, c.banks, c.greedy, episodes, 77);
    double lower = -static_cast<double>(d.num_agents() - 1), upper = 1, var_sum = 0;
    for (double p : m.vi) {
      lower += p;
      upper = std::min(upper, p);
      var_sum += se(p) * se(p);
    }
    lower = std::max(0.0, lower);
    double sigma = std::sqrt(se(m.v) * se(m.v) + var_sum);
    bool ok = m.v >= lower - 3 * sigma && m.v <= upper + 3 * sigma;
    o.pass = o.pass && ok;
    std::string vis;
    for (double p : m.vi) vis += (vis.empty() ? "" : ", ") + fmt(p);
    o.notes.push_back(std::string(c.name) + ": V=" + fmt(m.v) + ", V_i=[" + vis + "], bounds [" + fmt(lower) + ", " +
                      fmt(upper) + "], 3 sigma=" + fmt(3 * sigma) + (ok ? "" : "  VIOLATED"));
  }
  o.summary = "Frechet bounds on rendezvous-2 over " + std::to_string(episodes) + " episodes per policy";
  o.notes.insert(o.notes.begin(), "trained policy: seed " + std::to_string(seed) + ", " +
                                      std::to_string(d.desk_budget.at("dqprm")) + " steps");
  return o;
}

// 5-cell corridor x 3-state RM: go right to emit a at cell 4, then left to
// emit b at cell 0.
class Corridor : public QrmEnv {
 public:
  Corridor()
      : rm_(RewardMachine::from_names({"u0", "u1", "u2"}, "u0", {"a", "b"}, {{"u0", "a", "u1"}, {"u1", "b", "u2"}},
                                      {"u2"})) {}
  std::size_t num_states() const override { return 5; }
  std::size_t num_actions() const override { return 2; }
  const RewardMachine& machine() const override { return rm_; }
  std::uint32_t reset(Rng&) override { return 0; }
  std::uint32_t step(std::uint32_t s, std::size_t a, StateIndex, Rng&) override { return next(s, a); }
  void label(std::uint32_t s, StateIndex, bool, std::vector<Event>& out) const override {
    if (s == 4) out.push_back(Event::intern("a"));
    if (s == 0) out.push_back(Event::intern("b"));
  }
  static std::uint32_t next(std::uint32_t s, std::size_t a) { return a == 0 ? (s == 0 ? 0 : s - 1) : (s == 4 ? 4 : s + 1); }

 private:
  RewardMachine rm_;
};

Outcome criterion5() {
  Corridor env;
  const RewardMachine& rm = env.machine();
  TrainerConfig cfg;
  cfg.alpha = 0.1;
  cfg.tau = 1.0;
  cfg.episode_len = 40;
  Outcome o;

  // Instrumented training: writes per step, termination at F.
  QrmTrainer t(env, cfg, Rng(1));
  std::uint64_t writes_this_step = 0;
  bool write_count_ok = true;
  t.on_write = [&](StateIndex, std::uint32_t, std::size_t, double) { ++writes_this_step; };
  std::uint64_t early_ends = 0, episodes = 0, terminations_ok = 0;
  while (t.counters().steps < 200000) {
    std::uint64_t before_completions = t.counters().completions;
    std::uint64_t writes_before = t.counters().q_writes, steps_before = t.counters().steps;
    writes_this_step = 0;
    std::uint64_t len = t.train_episode();
    std::uint64_t steps = t.counters().steps - steps_before;
    write_count_ok = write_count_ok && writes_this_step == rm.num_states() * steps &&
                     t.counters().q_writes - writes_before == rm.num_states() * steps;
    bool completed = t.counters().completions > before_completions;
    ++episodes;
    if (len < cfg.episode_len) {
      ++early_ends;
      terminations_ok += completed;
    } else {
      terminations_ok += 1;
    }
  }
  bool termination_ok = terminations_ok == episodes && early_ends > 0;

  // Value iteration on the 15-state product.
  QBank star(rm.num_states(), 5, 2);
  for (int it = 0; it < 2000; ++it) {
    QBank nq = star;
    for (StateIndex u = 0; u < rm.num_states(); ++u)
      for (std::uint32_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
          std::uint32_t s2 = Corridor::next(s, a);
          std::vector<Event> l;
          env.label(s2, u, true, l);
          StateIndex v = u;
          double r = 0;
          for (Event e : l) {
            StateIndex w = rm.is_final(v) ? kNoState : rm.next(v, e);
            if (w == kNoState) continue;
            if (rm.is_final(w)) r = 1;
            v = w;
          }
          nq.at(u, s, a) = r + (rm.is_final(v) ? 0 : cfg.gamma * std::max(star.at(v, s2, 0), star.at(v, s2, 1)));
        }
    star = nq;
  }
  // Value of the learned greedy policy from every product state, by rollout
  // on the deterministic product.
  double worst = 0, q_err = 0;
  const QBank& q = t.q();
  for (StateIndex u0 = 0; u0 < rm.num_states(); ++u0)
    for (std::uint32_t s0 = 0; s0 < 5; ++s0) {
      if (rm.is_final(u0)) continue;
      StateIndex u = u0;
      std::uint32_t s = s0;
      double value = 0, disc = 1;
      for (int k = 0; k < 200 && !rm.is_final(u); ++k) {
        std::size_t a = greedy_select(q.row(u, s));
        s = Corridor::next(s, a);
        std::vector<Event> l;
        env.label(s, u, true, l);
        FoldResult f = fold_events(rm, u, l);
        value += disc * f.reward;
        disc *= cfg.gamma;
        u = f.state;
      }
      double vstar = std::max(star.at(u0, s0, 0), star.at(u0, s0, 1));
      worst = std::max(worst, std::abs(value - vstar));
      for (std::size_t a = 0; a < 2; ++a) q_err = std::max(q_err, std::abs(q.at(u0, s0, a) - star.at(u0, s0, a)));
    }
  o.pass = write_count_ok && termination_ok && worst <= 1e-3;
  o.summary = "QRM fidelity: " + std::to_string(rm.num_states()) + " writes per step, greedy value error " + fmt(worst);
  o.notes.push_back(std::string("exactly |U| writes per step over ") + std::to_string(t.counters().steps) +
                    " steps: " + (write_count_ok ? "yes" : "no"));
  o.notes.push_back("episodes ending before the horizon: " + std::to_string(early_ends) + " of " +
                    std::to_string(episodes) + ", all of them at F: " + (termination_ok ? "yes" : "no"));
  o.notes.push_back("max |Q - Q*| over the 15 product states: " + fmt(q_err));
  return o;
}

ExperimentSpec desk_spec(const std::string& domain, Algorithm a) {
  ExperimentSpec s;
  s.domain = domain;
  s.algorithm = a;
  s.num_runs = 10;
  return s;
}

std::string curve_note(const std::string& label, const ExperimentResult& r) {
  const auto& c = r.curve;
  if (c.median.empty()) return label + ": no successful runs";
  return label + ": final median " + fmt(c.median.back()) + " (q25 " + fmt(c.q25.back()) + ", q75 " +
         fmt(c.q75.back()) + ") after " + std::to_string(c.steps.back()) + " steps";
}

ExperimentResult criterion6_result;
std::string criterion6_csv;

Outcome criterion6() {
  Domain d = make_domain("rendezvous-2");
  std::uint64_t bound = *shortest_completion(d);
  ExperimentResult r = run_experiment(desk_spec("rendezvous-2", Algorithm::dqprm), 1);
  criterion6_result = r;
  criterion6_csv = runs_csv(r) + curves_csv({r.curve});
  Outcome o;
  double m = r.curve.median.empty() ? 1e9 : r.curve.median.back();
  o.pass = m < 1000 && m <= 1.5 * static_cast<double>(bound);
  o.summary = "rendezvous-2 DQPRM final median " + fmt(m) + " vs 1.5 x BFS bound " + fmt(1.5 * bound) + " (bound " +
              std::to_string(bound) + ")";
  o.notes.push_back(curve_note("dqprm", r));
  return o;
}

Outcome criterion7() {
  Outcome o;
  auto dq = run_experiment(desk_spec("rendezvous-10", Algorithm::dqprm));
  auto iql = run_experiment(desk_spec("rendezvous-10", Algorithm::iql));
  auto hil = run_experiment(desk_spec("rendezvous-10", Algorithm::hil));
  auto last = [](const ExperimentResult& r) { return r.curve.median.empty() ? 1000.0 : r.curve.median.back(); };
  const double horizon = 1000;
  o.pass = last(dq) < horizon && last(iql) >= horizon && last(hil) >= horizon;
  o.summary = "rendezvous-10 final medians: dqprm " + fmt(last(dq)) + ", iql " + fmt(last(iql)) + ", hil " +
              fmt(last(hil)) + " (horizon 1000)";
  o.notes.push_back(curve_note("dqprm", dq));
  o.notes.push_back(curve_note("iql", iql));
  o.notes.push_back(curve_note("hil", hil));
  ExperimentSpec slow = desk_spec("rendezvous-10", Algorithm::dqprm);
  slow.config.alpha = 0.1;
  auto diag = run_experiment(slow);
  o.notes.push_back("diagnostic (not counted): " + curve_note("dqprm with alpha 0.1", diag));
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto dq = run_experiment(desk_spec("buttons", Algorithm::dqprm));
  auto hil = run_experiment(desk_spec("buttons", Algorithm::hil));
  double a = dq.curve.median.empty() ? 1000 : dq.curve.median.back();
  double b = hil.curve.median.empty() ? 1000 : hil.curve.median.back();
  o.pass = a < 1000 && b - a >= 5;
  o.summary = "buttons final medians: dqprm " + fmt(a) + ", hil " + fmt(b) + ", gap " + fmt(b - a) + " (need >= 5)";
  o.notes.push_back(curve_note("dqprm", dq));
  o.notes.push_back(curve_note("hil", hil));
  o.notes.push_back("BFS lower bound: " + std::to_string(*shortest_completion(make_domain("buttons"))));
  return o;
}

Outcome criterion9() {
  Outcome o;
  Domain d = make_domain("buttons");
  try {
    auto l = make_learner(Algorithm::cqrm, d, TrainerConfig{});
    o.summary = "cqrm accepted buttons";
    return o;
  } catch (const BudgetError& e) {
    double ratio = e.estimate() / 2e9;
    o.pass = ratio >= 0.25 && ratio <= 4;
    o.summary = "cqrm refused buttons, estimate " + fmt(e.estimate()) + " values (ratio to 2e9: " + fmt(ratio) + ")";
    o.notes.push_back(e.what());
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  ExperimentResult many = run_experiment(desk_spec("rendezvous-2", Algorithm::dqprm), 8);
  std::string csv8 = runs_csv(many) + curves_csv({many.curve});
  o.pass = !criterion6_csv.empty() && csv8 == criterion6_csv;
  o.summary = std::string("rendezvous-2 DQPRM CSVs with 1 and 8 workers are ") +
              (o.pass ? "byte-identical" : "different") + " (" + std::to_string(csv8.size()) + " bytes)";
  return o;
}

}  // namespace

int main() {
  std::cout << "acceptance suite (desk-scale budgets, 10 runs where training is involved)\n";
  report(1, 1, criterion1);
  report(2, 1, criterion2);
  report(3, 120, criterion3);
  report(4, 300, criterion4);
  report(5, 60, criterion5);
  report(6, 600, criterion6);
  report(7, 1800, criterion7);
  report(8, 900, criterion8);
  report(9, 1, criterion9);
  report(10, 600, criterion10);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
