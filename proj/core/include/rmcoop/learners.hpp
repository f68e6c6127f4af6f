#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmcoop/domain.hpp"
#include "rmcoop/qrm.hpp"

namespace rmc {

/// Agent i of a domain trained alone against its projected RM and local
/// labeling. Shared events it proposes reach the RM only when the step's
/// synchronization draw succeeds.
class LocalAgentEnv : public QrmEnv {
 public:
  LocalAgentEnv(const Domain& d, std::size_t agent) : d_(d), agent_(agent) {}
  std::size_t num_states() const override { return d_.grid.num_cells(); }
  std::size_t num_actions() const override { return kNumActions; }
  const RewardMachine& machine() const override { return d_.projections[agent_].rm; }
  std::uint32_t reset(Rng&) override { return d_.starts[agent_]; }
  std::uint32_t step(std::uint32_t s, std::size_t a, StateIndex u, Rng& rng) override;
  void label(std::uint32_t s, StateIndex u, bool sync, std::vector<Event>& out) const override;
  bool uses_sync() const override { return true; }

 private:
  const Domain& d_;
  std::size_t agent_;
};

/// The whole team as one agent: joint cells in mixed radix, joint actions
/// in base 5, team RM and team labeling.
class JointEnv : public QrmEnv {
 public:
  explicit JointEnv(const Domain& d);
  std::size_t num_states() const override { return num_states_; }
  std::size_t num_actions() const override { return num_actions_; }
  const RewardMachine& machine() const override { return d_.team_rm; }
  std::uint32_t reset(Rng& rng) override;
  std::uint32_t step(std::uint32_t s, std::size_t a, StateIndex u, Rng& rng) override;
  void label(std::uint32_t s, StateIndex u, bool sync, std::vector<Event>& out) const override;

  std::uint32_t encode(std::span<const LocalState> cells) const;
  void decode(std::uint32_t s, std::span<LocalState> cells) const;

 private:
  const Domain& d_;
  std::size_t num_states_;
  std::size_t num_actions_;
  mutable std::vector<LocalState> scratch_;
};

/// Value count of a centralized q-function: cells^N * 5^N * |U|.
double cqrm_size_estimate(const Domain& d);
inline constexpr double kDefaultCqrmBudget = 1e8;

struct EpisodeResult {
  bool completed = false;
  /// Steps to team completion, or the horizon when incomplete.
  std::uint64_t steps = 0;
  /// Projected-RM completion per agent (DQPRM only).
  std::vector<bool> local_completed;
  /// False when some step had the team verdict differ from the
  /// conjunction of the local verdicts.
  bool verdicts_agree = true;
};

/// DQPRM team execution: agents act on (s_i, u_i) only, proposals go
/// through the synchronization barrier, and the team RM is tracked on the
/// same trajectory to decide completion. `greedy` false samples softmax.
EpisodeResult dqprm_execute(const Domain& d, const std::vector<QBank>& banks,
                            const TrainerConfig& cfg, bool greedy, Rng& rng);

/// Memory state of the baselines: which memory events occurred, read off
/// the team RM state. Throws ConfigError when some RM state can be reached
/// with two different memory sets.
class MemoryModel {
 public:
  MemoryModel() = default;
  MemoryModel(const RewardMachine& rm, const std::vector<Event>& events);
  std::size_t size() const { return masks_.size(); }
  std::size_t index(StateIndex u) const { return index_of_state_[u]; }
  std::uint64_t mask(std::size_t m) const { return masks_[m]; }
  bool has(std::size_t m, Event e) const;

 private:
  std::vector<Event> events_;
  std::vector<std::uint64_t> masks_;
  std::vector<std::size_t> index_of_state_;
};

/// Common interface for the experiment harness. train() counts plotted
/// training steps: per-agent steps for DQPRM, team steps otherwise.
class TeamLearner {
 public:
  virtual ~TeamLearner() = default;
  virtual void train(std::uint64_t steps) = 0;
  /// One greedy test episode from the start state.
  virtual EpisodeResult test(Rng& rng) const = 0;
  /// Tables for snapshots (one per agent, or one for CQRM).
  virtual std::vector<QBank> snapshot() const = 0;
  /// Loads tables written by snapshot(). Throws InputError on a count or
  /// shape mismatch.
  virtual void restore(const std::vector<QBank>& banks) = 0;
};

class DqprmLearner : public TeamLearner {
 public:
  /// Throws ConfigError when the domain's decomposition is not certified,
  /// unless `allow_uncertified`.
  DqprmLearner(const Domain& d, const TrainerConfig& cfg, bool allow_uncertified = false);
  void train(std::uint64_t steps) override;
  EpisodeResult test(Rng& rng) const override;
  std::vector<QBank> snapshot() const override;
  void restore(const std::vector<QBank>& banks) override;
  const QrmTrainer& agent(std::size_t i) const { return *trainers_[i]; }

 private:
  const Domain& d_;
  TrainerConfig cfg_;
  std::vector<std::unique_ptr<LocalAgentEnv>> envs_;
  std::vector<std::unique_ptr<QrmTrainer>> trainers_;
};

class IqlLearner : public TeamLearner {
 public:
  IqlLearner(const Domain& d, const TrainerConfig& cfg);
  void train(std::uint64_t steps) override;
  EpisodeResult test(Rng& rng) const override;
  std::vector<QBank> snapshot() const override { return q_; }
  void restore(const std::vector<QBank>& banks) override;
  const MemoryModel& memory() const { return memory_; }

 private:
  struct Episode {
    std::vector<LocalState> s, s2;
    std::vector<std::size_t> a;
    StateIndex u = 0, u2 = 0;
    double reward = 0;
    std::uint64_t t = 0;
    std::vector<Event> buf;
  };
  void begin(Episode& ep) const;
  /// Chooses actions, steps the team and the team RM into ep.s2 / ep.u2.
  void act(Episode& ep, bool greedy, std::vector<Rng>& rngs) const;

  const Domain& d_;
  TrainerConfig cfg_;
  MemoryModel memory_;
  std::vector<QBank> q_;  // per agent: tables = memory states
  std::vector<Rng> rngs_;
  Episode ep_;
  bool in_episode_ = false;
};

class HilLearner : public TeamLearner {
 public:
  /// Throws ConfigError when some agent has no options or some memory
  /// state offers an agent no option.
  HilLearner(const Domain& d, const TrainerConfig& cfg);
  void train(std::uint64_t steps) override;
  EpisodeResult test(Rng& rng) const override;
  std::vector<QBank> snapshot() const override;
  void restore(const std::vector<QBank>& banks) override;

  /// Options of agent i available in memory state m.
  std::vector<std::size_t> available(std::size_t agent, std::size_t m) const;
  const MemoryModel& memory() const { return memory_; }

 private:
  struct Running {
    bool active = false;
    std::size_t option = 0;
    std::size_t start_memory = 0;
    double reward = 0;    // discounted team reward since the option started
    double discount = 1;  // gamma^duration
    bool at_target_stay = false;
  };
  struct Episode {
    std::vector<LocalState> s, s2;
    std::vector<Action> a;
    std::vector<Running> running;
    StateIndex u = 0, u2 = 0;
    double reward = 0;
    std::uint64_t t = 0;
    std::vector<Event> buf;
  };
  void begin(Episode& ep) const;
  /// Starts options where none runs, chooses actions, steps the team and
  /// the team RM into ep.s2 / ep.u2.
  void act(Episode& ep, bool greedy, std::vector<Rng>& rngs) const;
  /// Whether agent i's option ends after the step just taken.
  bool ends(const Episode& ep, std::size_t i, bool done) const;
  /// Meta-level update for a finished option.
  void finish(std::size_t i, Running& r, std::size_t m_next, bool done);

  const Domain& d_;
  TrainerConfig cfg_;
  MemoryModel memory_;
  std::vector<std::vector<std::vector<std::size_t>>> available_;  // [agent][memory]
  std::vector<QBank> meta_;                   // per agent: 1 table, memory x options
  std::vector<std::vector<QBank>> option_q_;  // per agent, per option: 1 table, cells x actions
  std::vector<Rng> rngs_;
  Episode ep_;
  bool in_episode_ = false;
};

class CqrmLearner : public TeamLearner {
 public:
  /// Throws BudgetError with the size estimate when over `budget` values.
  CqrmLearner(const Domain& d, const TrainerConfig& cfg, double budget = kDefaultCqrmBudget);
  void train(std::uint64_t steps) override { trainer_->train(steps); }
  EpisodeResult test(Rng& rng) const override;
  std::vector<QBank> snapshot() const override { return {trainer_->q()}; }
  void restore(const std::vector<QBank>& banks) override;

 private:
  const Domain& d_;
  TrainerConfig cfg_;
  std::unique_ptr<JointEnv> env_;
  std::unique_ptr<QrmTrainer> trainer_;
};

enum class Algorithm { dqprm, iql, hil, cqrm };
std::string algorithm_name(Algorithm a);
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(const std::string& name);
std::unique_ptr<TeamLearner> make_learner(Algorithm a, const Domain& d, const TrainerConfig& cfg,
                                          double cqrm_budget = kDefaultCqrmBudget);

/// Fewest team steps to complete the task with slip-free moves, by BFS over
/// joint cells and team RM states under the online labeling semantics.
/// std::nullopt when unreachable; BudgetError above `state_limit` states.
std::optional<std::uint64_t> shortest_completion(const Domain& d, double state_limit = 5e7);

}  // namespace rmc
