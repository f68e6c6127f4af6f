#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <map>

#include "rmcoop/error.hpp"
#include "rmcoop/learners.hpp"

using namespace rmc;

namespace {

Event ev(const char* s) { return Event::intern(s); }

const Domain& buttons() {
  static const Domain d = make_domain("buttons");
  return d;
}
const Domain& rendezvous2() {
  static const Domain d = make_domain("rendezvous-2");
  return d;
}

TrainerConfig small(std::uint64_t seed = 0) {
  TrainerConfig c;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(MemoryModel, ButtonsMemoryStates) {
  const Domain& d = buttons();
  MemoryModel m(d.team_rm, d.memory_events);
  EXPECT_EQ(m.size(), 4u);
  auto idx = [&](const char* s) { return m.index(d.team_rm.state_index(s)); };
  EXPECT_EQ(idx("u_2"), idx("u_5"));
  EXPECT_NE(idx("u_1"), idx("u_2"));
  EXPECT_EQ(idx("u_6"), idx("u_7"));
  EXPECT_TRUE(m.has(idx("u_3"), ev("GB")));
  EXPECT_FALSE(m.has(idx("u_3"), ev("RB")));
}

TEST(MemoryModel, RejectsAmbiguousStates) {
  // s is reached both with and without x having happened.
  auto rm = RewardMachine::from_names({"i", "s", "f"}, "i", {"x", "y", "z"},
                                      {{"i", "x", "s"}, {"i", "y", "s"}, {"s", "z", "f"}}, {"f"});
  EXPECT_THROW(MemoryModel(rm, {ev("x")}), ConfigError);
}

TEST(Hil, GoalOptionNeedsRed) {
  const Domain& d = buttons();
  HilLearner h(d, small());
  const auto& m = h.memory();
  auto names = [&](std::size_t agent, const char* u) {
    std::vector<std::string> out;
    for (std::size_t o : h.available(agent, m.index(d.team_rm.state_index(u)))) out.push_back(d.options[agent][o].name);
    return out;
  };
  auto has = [](const std::vector<std::string>& v, const char* n) { return std::find(v.begin(), v.end(), n) != v.end(); };
  EXPECT_FALSE(has(names(0, "u_I"), "goal"));
  EXPECT_FALSE(has(names(0, "u_5"), "goal"));
  EXPECT_TRUE(has(names(0, "u_6"), "goal"));
  EXPECT_TRUE(has(names(0, "u_I"), "yellow"));
  EXPECT_FALSE(has(names(0, "u_1"), "yellow"));
  EXPECT_TRUE(has(names(0, "u_1"), "hold"));
}

TEST(Cqrm, RefusesButtonsButFitsRendezvousTwo) {
  double est = cqrm_size_estimate(buttons());
  const double cells = static_cast<double>(buttons().grid.num_cells());
  EXPECT_DOUBLE_EQ(est, cells * cells * cells * 125 * 8);
  try {
    CqrmLearner l(buttons(), small());
    FAIL();
  } catch (const BudgetError& e) {
    EXPECT_DOUBLE_EQ(e.estimate(), est);
  }
  EXPECT_DOUBLE_EQ(cqrm_size_estimate(rendezvous2()), 100.0 * 100 * 25 * 8);
  EXPECT_NO_THROW(CqrmLearner(rendezvous2(), small()));
}

TEST(JointEnv, EncodeDecodeRoundTrip) {
  JointEnv env(rendezvous2());
  std::vector<LocalState> c{37, 82}, back(2);
  env.decode(env.encode(c), back);
  EXPECT_EQ(back, c);
  EXPECT_EQ(env.num_actions(), 25u);
}

TEST(Dqprm, VerdictsAgreeAndCompletionMatchesLocal) {
  for (const Domain* d : {&buttons(), &rendezvous2()}) {
    DqprmLearner l(*d, small(1));
    l.train(50000);
    Rng rng(4);
    auto banks = l.snapshot();
    for (int k = 0; k < 20; ++k) {
      EpisodeResult r = dqprm_execute(*d, banks, small(), false, rng);
      EXPECT_TRUE(r.verdicts_agree) << d->name;
      bool all = std::all_of(r.local_completed.begin(), r.local_completed.end(), [](bool b) { return b; });
      EXPECT_EQ(r.completed, all) << d->name;
    }
  }
}

TEST(Dqprm, SnapshotRestoreGivesSameTests) {
  const Domain& d = rendezvous2();
  DqprmLearner a(d, small(2));
  a.train(20000);
  DqprmLearner b(d, small(99));
  b.restore(a.snapshot());
  EXPECT_EQ(a.snapshot(), b.snapshot());
  Rng r1(3), r2(3);
  EXPECT_EQ(a.test(r1).steps, b.test(r2).steps);
  EXPECT_THROW(b.restore({QBank(1, 1, 1)}), InputError);
}

TEST(Learners, RestoreRejectsWrongShapes) {
  for (Algorithm a : {Algorithm::iql, Algorithm::hil}) {
    auto l = make_learner(a, rendezvous2(), small());
    auto snap = l->snapshot();
    EXPECT_NO_THROW(l->restore(snap));
    snap.pop_back();
    EXPECT_THROW(l->restore(snap), InputError) << algorithm_name(a);
  }
}

TEST(Learners, SameSeedSameTables) {
  for (Algorithm a : {Algorithm::dqprm, Algorithm::iql, Algorithm::hil, Algorithm::cqrm}) {
    auto x = make_learner(a, rendezvous2(), small(8));
    auto y = make_learner(a, rendezvous2(), small(8));
    x->train(3000);
    y->train(1000);
    y->train(2000);
    EXPECT_EQ(x->snapshot(), y->snapshot()) << algorithm_name(a);
  }
}

TEST(Learners, AlgorithmNames) {
  for (Algorithm a : {Algorithm::dqprm, Algorithm::iql, Algorithm::hil, Algorithm::cqrm})
    EXPECT_EQ(parse_algorithm(algorithm_name(a)), a);
  EXPECT_THROW(parse_algorithm("ppo"), ConfigError);
}

TEST(ShortestCompletion, KnownDomains) {
  EXPECT_EQ(shortest_completion(buttons()), 17u);
  EXPECT_EQ(shortest_completion(rendezvous2()), 20u);
}

TEST(ShortestCompletion, RendezvousTwoByHand) {
  // Open grid: both agents meet at R, then each walks to its goal. Labels
  // are read against the previous RM state, so Rdv fires one step after
  // the last arrival is recorded.
  const Domain& d = rendezvous2();
  auto manhattan = [&](LocalState a, LocalState b) {
    GridPos p = d.grid.pos(a), q = d.grid.pos(b);
    return std::abs(p.row - q.row) + std::abs(p.col - q.col);
  };
  LocalState r = d.named_cell("R");
  int meet = std::max(manhattan(d.starts[0], r), manhattan(d.starts[1], r));
  int out = std::max(manhattan(r, d.named_cell("G1")), manhattan(r, d.named_cell("G2")));
  EXPECT_EQ(*shortest_completion(d), static_cast<std::uint64_t>(meet + 1 + out));
}
