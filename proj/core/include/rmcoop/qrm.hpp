#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rmcoop/reward_machine.hpp"
#include "rmcoop/rng.hpp"

namespace rmc {

/// One q-table per RM state, each over env states x actions, stored densely.
class QBank {
 public:
  QBank() = default;
  QBank(std::size_t tables, std::size_t states, std::size_t actions)
      : tables_(tables), states_(states), actions_(actions), v_(tables * states * actions, 0.0) {}

  std::size_t num_tables() const { return tables_; }
  std::size_t num_states() const { return states_; }
  std::size_t num_actions() const { return actions_; }

  std::span<double> row(std::size_t u, std::size_t s) {
    return {v_.data() + (u * states_ + s) * actions_, actions_};
  }
  std::span<const double> row(std::size_t u, std::size_t s) const {
    return {v_.data() + (u * states_ + s) * actions_, actions_};
  }
  double& at(std::size_t u, std::size_t s, std::size_t a) { return v_[(u * states_ + s) * actions_ + a]; }
  double at(std::size_t u, std::size_t s, std::size_t a) const {
    return v_[(u * states_ + s) * actions_ + a];
  }
  const std::vector<double>& values() const { return v_; }

  friend bool operator==(const QBank&, const QBank&) = default;

 private:
  std::size_t tables_ = 0;
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> v_;
};

double max_value(std::span<const double> q);
/// Lowest index among the maxima.
std::size_t greedy_select(std::span<const double> q);
/// Samples index k with probability proportional to exp(q[k] / tau),
/// computed after subtracting the maximum.
std::size_t softmax_select(std::span<const double> q, double tau, Rng& rng);

/// Snapshot format: "RMQB", u32 version (1), u32 bank count, then per bank
/// u64 tables, states, actions and the values as IEEE-754 doubles, all
/// little-endian.
void save_qbanks(std::ostream& out, const std::vector<QBank>& banks);
std::vector<QBank> load_qbanks(std::istream& in);
void save_qbanks(const std::string& path, const std::vector<QBank>& banks);
std::vector<QBank> load_qbanks(const std::string& path);

struct TrainerConfig {
  double gamma = 0.9;
  double alpha = 0.8;
  double tau = 0.02;
  double sync_prob = 0.3;
  std::uint64_t episode_len = 1000;
  std::uint64_t total_steps = 100000;
  std::uint64_t test_every = 1000;
  std::uint64_t test_episodes = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is outside its range.
  void validate() const;
};

/// Single-agent environment seen by QRM. States and actions are dense
/// indices; the RM state is passed to step() for region gating.
class QrmEnv {
 public:
  virtual ~QrmEnv() = default;
  virtual std::size_t num_states() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual const RewardMachine& machine() const = 0;
  virtual std::uint32_t reset(Rng& rng) = 0;
  virtual std::uint32_t step(std::uint32_t s, std::size_t a, StateIndex u, Rng& rng) = 0;
  /// Events at env state s for RM state u. `sync` is this step's simulated
  /// synchronization draw, shared by every RM state's evaluation.
  virtual void label(std::uint32_t s, StateIndex u, bool sync, std::vector<Event>& out) const = 0;
  /// Whether label() reads `sync`; when false no draw is made.
  virtual bool uses_sync() const { return false; }
};

struct QrmCounters {
  std::uint64_t steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t completions = 0;
  std::uint64_t q_writes = 0;
};

/// Q-learning with reward machines. Every environment step updates the
/// q-table of every RM state with that state's own hypothetical transition
/// and reward; the episode ends when the real RM state reaches F or after
/// episode_len steps. Training can be resumed step-exactly.
class QrmTrainer {
 public:
  QrmTrainer(QrmEnv& env, const TrainerConfig& cfg, Rng rng);

  /// Runs `steps` more environment steps, continuing the current episode.
  /// Returns at once when the initial RM state is already final.
  void train(std::uint64_t steps);
  /// Runs until one episode ends; returns the steps it took.
  std::uint64_t train_episode();

  const QBank& q() const { return q_; }
  QBank& q() { return q_; }
  const QrmCounters& counters() const { return counters_; }

  /// Called for every q-table write with (u, s, a, new value).
  std::function<void(StateIndex, std::uint32_t, std::size_t, double)> on_write;

 private:
  bool step_once();

  QrmEnv& env_;
  TrainerConfig cfg_;
  Rng rng_;
  QBank q_;
  QrmCounters counters_;
  bool in_episode_ = false;
  std::uint32_t s_ = 0;
  StateIndex u_ = 0;
  std::uint64_t t_ = 0;
  std::vector<Event> buf_;
};

/// Trains for cfg.total_steps with a stream seeded from cfg.seed.
QBank qrm_train(QrmEnv& env, const TrainerConfig& cfg);

struct GreedyRollout {
  bool completed = false;
  std::uint64_t steps = 0;
};
/// Greedy (lowest-index tie-break) rollout of a QBank, sync draws true.
GreedyRollout qrm_rollout(QrmEnv& env, const QBank& q, std::uint64_t max_steps, Rng& rng);

}  // namespace rmc
