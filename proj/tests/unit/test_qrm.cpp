#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rmcoop/error.hpp"
#include "rmcoop/qrm.hpp"

using namespace rmc;

namespace {

// Deterministic 5-cell corridor; action 0 moves left, 1 moves right.
// Event a at the right end, b at the left end. Task: a then b.
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
  void label(std::uint32_t s, StateIndex, bool sync, std::vector<Event>& out) const override {
    if (use_sync_ && !sync) return;
    if (s == 4) out.push_back(Event::intern("a"));
    if (s == 0) out.push_back(Event::intern("b"));
  }
  bool uses_sync() const override { return use_sync_; }

  static std::uint32_t next(std::uint32_t s, std::size_t a) {
    if (a == 0) return s == 0 ? 0 : s - 1;
    return s == 4 ? 4 : s + 1;
  }
  bool use_sync_ = false;

 private:
  RewardMachine rm_;
};

// Q* by value iteration over (u, s) with the same labeling and reward.
QBank value_iteration(const Corridor& env, double gamma) {
  const RewardMachine& rm = env.machine();
  QBank q(rm.num_states(), 5, 2);
  for (int it = 0; it < 2000; ++it) {
    QBank n = q;
    for (StateIndex u = 0; u < rm.num_states(); ++u)
      for (std::uint32_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
          std::uint32_t s2 = Corridor::next(s, a);
          std::vector<Event> l;
          env.label(s2, u, true, l);
          StateIndex v = u;
          double r = 0;
          for (Event e : l) {
            if (rm.is_final(v)) break;
            StateIndex w = rm.next(v, e);
            if (w == kNoState) continue;
            if (rm.is_final(w)) r = 1;
            v = w;
          }
          double best = 0;
          if (!rm.is_final(v)) best = std::max(q.at(v, s2, 0), q.at(v, s2, 1));
          n.at(u, s, a) = r + gamma * best;
        }
    q = n;
  }
  return q;
}

TrainerConfig explore_config() {
  TrainerConfig c;
  c.alpha = 0.1;
  c.tau = 1.0;
  c.episode_len = 40;
  c.total_steps = 200000;
  return c;
}

}  // namespace

TEST(Softmax, EqualValuesAreUniform) {
  Rng rng(1);
  std::vector<double> q(4, 0.3);
  std::vector<int> n(4, 0);
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) ++n[softmax_select(q, 0.02, rng)];
  for (int c : n) EXPECT_NEAR(c / double(draws), 0.25, 0.01);
}

TEST(Softmax, LargeGapPicksArgmax) {
  // exp(-1 / 0.02) = exp(-50): the other actions are never drawn in practice.
  Rng rng(2);
  std::vector<double> q{0.0, 1.0, 0.0, 0.0};
  for (int k = 0; k < 10000; ++k) ASSERT_EQ(softmax_select(q, 0.02, rng), 1u);
}

TEST(Softmax, ShiftInvariant) {
  std::vector<double> a{0.1, 0.5, 0.3}, b{100.1, 100.5, 100.3};
  Rng r1(7), r2(7);
  for (int k = 0; k < 2000; ++k) ASSERT_EQ(softmax_select(a, 0.2, r1), softmax_select(b, 0.2, r2));
}

TEST(Softmax, GreedyTiesBreakLow) {
  std::vector<double> q{0.2, 0.7, 0.7};
  EXPECT_EQ(greedy_select(q), 1u);
  EXPECT_DOUBLE_EQ(max_value(q), 0.7);
}

TEST(QrmTrainer, WritesEveryRmStatePerStep) {
  Corridor env;
  TrainerConfig c = explore_config();
  QrmTrainer t(env, c, Rng(3));
  std::vector<int> per_u(3, 0);
  t.on_write = [&](StateIndex u, std::uint32_t, std::size_t, double) { ++per_u[u]; };
  t.train(1234);
  EXPECT_EQ(t.counters().steps, 1234u);
  EXPECT_EQ(t.counters().q_writes, 3u * 1234u);
  for (int n : per_u) EXPECT_EQ(n, 1234);
}

TEST(QrmTrainer, FinalInitialStateTakesNoSteps) {
  class Done : public Corridor {
   public:
    Done() : rm2_(RewardMachine::from_names({"f"}, "f", {"a"}, {}, {"f"})) {}
    const RewardMachine& machine() const override { return rm2_; }
    RewardMachine rm2_;
  } env;
  QrmTrainer t(env, explore_config(), Rng(0));
  t.train(100);
  EXPECT_EQ(t.counters().steps, 0u);
}

TEST(QrmTrainer, ConvergesToValueIteration) {
  Corridor env;
  TrainerConfig c = explore_config();
  QBank q = qrm_train(env, c);
  QBank star = value_iteration(env, c.gamma);
  for (StateIndex u = 0; u < 3; ++u)
    for (std::uint32_t s = 0; s < 5; ++s)
      for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(q.at(u, s, a), star.at(u, s, a), 1e-3) << u << " " << s << " " << a;
  Rng rng(0);
  GreedyRollout r = qrm_rollout(env, q, 100, rng);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.steps, 8u);
}

TEST(QrmTrainer, ValuesStayInUnitInterval) {
  Corridor env;
  env.use_sync_ = true;
  TrainerConfig c;
  c.total_steps = 20000;
  QrmTrainer t(env, c, Rng(9));
  t.on_write = [](StateIndex, std::uint32_t, std::size_t, double v) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  };
  t.train(c.total_steps);
}

TEST(QrmTrainer, ResumedTrainingIsBitIdentical) {
  Corridor env;
  env.use_sync_ = true;
  TrainerConfig c = explore_config();
  QrmTrainer once(env, c, Rng(5)), split(env, c, Rng(5));
  once.train(5000);
  split.train(1234);
  split.train(17);
  split.train(5000 - 1234 - 17);
  EXPECT_EQ(once.q(), split.q());
  EXPECT_EQ(once.counters().episodes, split.counters().episodes);
}

TEST(QrmTrainer, SyncWaitsAreGeometric) {
  // Record the sync draws through a probing env and measure the gaps
  // between successes; mean 1/p for p = 0.3.
  class Probe : public Corridor {
   public:
    void label(std::uint32_t, StateIndex u, bool sync, std::vector<Event>&) const override {
      if (u == 0) draws.push_back(sync);
    }
    bool uses_sync() const override { return true; }
    mutable std::vector<bool> draws;
  } env;
  TrainerConfig c;
  QrmTrainer t(env, c, Rng(12));
  std::size_t waits = 0, total = 0, run = 0;
  while (waits < 10000) {
    t.train(1000);
    for (bool s : env.draws) {
      ++run;
      if (s) {
        total += run;
        run = 0;
        ++waits;
      }
    }
    env.draws.clear();
  }
  EXPECT_NEAR(double(total) / waits, 1 / 0.3, (1 / 0.3) * 0.05);
}

TEST(Snapshot, RoundTrip) {
  std::vector<QBank> banks{QBank(2, 3, 5), QBank(1, 4, 2)};
  banks[0].at(1, 2, 3) = 0.125;
  banks[1].at(0, 3, 1) = 1.0 / 3;
  std::stringstream ss;
  save_qbanks(ss, banks);
  EXPECT_EQ(ss.str().substr(0, 4), "RMQB");
  EXPECT_EQ(load_qbanks(ss), banks);
}

TEST(Snapshot, BadMagicAndTruncation) {
  std::stringstream bad("XXXX0000");
  EXPECT_THROW(load_qbanks(bad), ParseError);
  std::stringstream ss;
  save_qbanks(ss, {QBank(1, 2, 2)});
  std::string s = ss.str();
  std::stringstream cut(s.substr(0, s.size() - 3));
  EXPECT_THROW(load_qbanks(cut), ParseError);
}

TEST(TrainerConfig, RejectsOutOfRange) {
  TrainerConfig c;
  c.alpha = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainerConfig{};
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainerConfig{};
  c.tau = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(TrainerConfig{}.validate());
}
