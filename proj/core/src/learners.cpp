#include "rmcoop/learners.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "rmcoop/error.hpp"

namespace rmc {

std::uint32_t LocalAgentEnv::step(std::uint32_t s, std::size_t a, StateIndex u, Rng& rng) {
  return step_agent(d_.grid, s, static_cast<Action>(a), d_.local_gates[agent_].closed(u), rng);
}

void LocalAgentEnv::label(std::uint32_t s, StateIndex u, bool sync, std::vector<Event>& out) const {
  const std::size_t first = out.size();
  d_.local_labels[agent_].label(std::span<const LocalState>(&s, 1), u, out);
  if (sync) return;
  auto keep_end = std::remove_if(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                                 [&](Event e) { return d_.idx.is_shared(e); });
  out.erase(keep_end, out.end());
}

double cqrm_size_estimate(const Domain& d) {
  const double n = static_cast<double>(d.num_agents());
  return std::pow(static_cast<double>(d.grid.num_cells()), n) * std::pow(5.0, n) *
         static_cast<double>(d.team_rm.num_states());
}

JointEnv::JointEnv(const Domain& d) : d_(d), scratch_(d.num_agents()) {
  double states = std::pow(static_cast<double>(d.grid.num_cells()), static_cast<double>(d.num_agents()));
  double actions = std::pow(5.0, static_cast<double>(d.num_agents()));
  if (states * actions > 4e9) throw BudgetError("joint state-action space too large", states * actions);
  num_states_ = static_cast<std::size_t>(states);
  num_actions_ = static_cast<std::size_t>(actions);
}

std::uint32_t JointEnv::encode(std::span<const LocalState> cells) const {
  std::uint64_t code = 0;
  for (std::size_t i = cells.size(); i-- > 0;) code = code * d_.grid.num_cells() + cells[i];
  return static_cast<std::uint32_t>(code);
}

void JointEnv::decode(std::uint32_t s, std::span<LocalState> cells) const {
  for (auto& c : cells) {
    c = static_cast<LocalState>(s % d_.grid.num_cells());
    s /= static_cast<std::uint32_t>(d_.grid.num_cells());
  }
}

std::uint32_t JointEnv::reset(Rng&) { return encode(d_.starts); }

std::uint32_t JointEnv::step(std::uint32_t s, std::size_t a, StateIndex u, Rng& rng) {
  decode(s, scratch_);
  const RegionMask closed = d_.team_gates.closed(u);
  for (auto& c : scratch_) {
    c = step_agent(d_.grid, c, static_cast<Action>(a % kNumActions), closed, rng);
    a /= kNumActions;
  }
  return encode(scratch_);
}

void JointEnv::label(std::uint32_t s, StateIndex u, bool, std::vector<Event>& out) const {
  decode(s, scratch_);
  d_.team_labels.label(scratch_, u, out);
}

EpisodeResult dqprm_execute(const Domain& d, const std::vector<QBank>& banks,
                            const TrainerConfig& cfg, bool greedy, Rng& rng) {
  const std::size_t n = d.num_agents();
  if (banks.size() != n) throw InputError("one q-bank per agent expected");
  for (std::size_t i = 0; i < n; ++i)
    if (banks[i].num_tables() != d.projections[i].rm.num_states() ||
        banks[i].num_states() != d.grid.num_cells() || banks[i].num_actions() != kNumActions)
      throw InputError("q-bank " + std::to_string(i) + " does not match the domain");

  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < n; ++i) rngs.emplace_back(rng.next());
  std::vector<LocalState> s = d.starts;
  std::vector<StateIndex> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = d.projections[i].rm.initial();
  StateIndex team_u = d.team_rm.initial();
  std::vector<std::vector<Event>> proposals(n);
  std::vector<Event> team_label;

  EpisodeResult res;
  res.local_completed.assign(n, false);
  for (std::uint64_t t = 1; t <= cfg.episode_len; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = banks[i].row(u[i], s[i]);
      auto a = static_cast<Action>(greedy ? greedy_select(row) : softmax_select(row, cfg.tau, rngs[i]));
      s[i] = step_agent(d.grid, s[i], a, d.local_gates[i].closed(u[i]), rngs[i]);
      proposals[i] = label_local(d.local_labels[i], s[i], u[i]);
    }
    auto synced = synchronize(proposals, d.idx);
    bool all_local = true;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = fold_events(d.projections[i].rm, u[i], synced[i]).state;
      res.local_completed[i] = d.projections[i].rm.is_final(u[i]);
      all_local = all_local && res.local_completed[i];
    }
    team_label.clear();
    d.team_labels.label(s, team_u, team_label);
    team_u = fold_events(d.team_rm, team_u, team_label).state;
    const bool team_done = d.team_rm.is_final(team_u);
    if (team_done != all_local) res.verdicts_agree = false;
    if (team_done) {
      res.completed = true;
      res.steps = t;
      return res;
    }
  }
  res.steps = cfg.episode_len;
  return res;
}

MemoryModel::MemoryModel(const RewardMachine& rm, const std::vector<Event>& events)
    : events_(events) {
  if (events.size() > 64) throw ConfigError("/memory: at most 64 memory events");
  std::vector<std::int64_t> mask_of(rm.num_states(), -1);
  std::vector<std::uint64_t> bit(rm.alphabet().size(), 0);
  for (std::size_t k = 0; k < events.size(); ++k) {
    int p = rm.alphabet().position(events[k]);
    if (p < 0) throw ConfigError("/memory: event " + events[k].name() + " not in the team alphabet");
    bit[p] = std::uint64_t{1} << k;
  }
  std::deque<StateIndex> queue{rm.initial()};
  mask_of[rm.initial()] = 0;
  while (!queue.empty()) {
    StateIndex u = queue.front();
    queue.pop_front();
    for (std::size_t p = 0; p < rm.alphabet().size(); ++p) {
      StateIndex v = rm.next(u, p);
      if (v == kNoState) continue;
      auto m = static_cast<std::int64_t>(static_cast<std::uint64_t>(mask_of[u]) | bit[p]);
      if (mask_of[v] < 0) {
        mask_of[v] = m;
        queue.push_back(v);
      } else if (mask_of[v] != m) {
        throw ConfigError("/memory: RM state " + rm.state_name(v) +
                          " is reachable with two different memory sets");
      }
    }
  }
  for (auto m : mask_of)
    if (m >= 0) masks_.push_back(static_cast<std::uint64_t>(m));
  std::sort(masks_.begin(), masks_.end());
  masks_.erase(std::unique(masks_.begin(), masks_.end()), masks_.end());
  index_of_state_.assign(rm.num_states(), 0);
  for (StateIndex u = 0; u < rm.num_states(); ++u)
    if (mask_of[u] >= 0)
      index_of_state_[u] = static_cast<std::size_t>(
          std::lower_bound(masks_.begin(), masks_.end(), static_cast<std::uint64_t>(mask_of[u])) -
          masks_.begin());
}

bool MemoryModel::has(std::size_t m, Event e) const {
  for (std::size_t k = 0; k < events_.size(); ++k)
    if (events_[k] == e) return (masks_[m] >> k) & 1;
  return false;
}

// DQPRM

DqprmLearner::DqprmLearner(const Domain& d, const TrainerConfig& cfg, bool allow_uncertified)
    : d_(d), cfg_(cfg) {
  cfg_.validate();
  if (!allow_uncertified) {
    auto cert = certify(d);
    if (!cert.ok()) {
      std::string why = cert.decomposition.bisimilar ? "labeling is not decomposable"
                                                     : cert.decomposition.witness.reason;
      throw ConfigError("decomposition of " + d.name + " is not certified: " + why);
    }
  }
  for (std::size_t i = 0; i < d.num_agents(); ++i) {
    envs_.push_back(std::make_unique<LocalAgentEnv>(d, i));
    trainers_.push_back(std::make_unique<QrmTrainer>(*envs_.back(), cfg_, Rng::derive(cfg_.seed, i)));
  }
}

void DqprmLearner::train(std::uint64_t steps) {
  for (auto& t : trainers_) t->train(steps);
}

std::vector<QBank> DqprmLearner::snapshot() const {
  std::vector<QBank> out;
  for (const auto& t : trainers_) out.push_back(t->q());
  return out;
}

namespace {

void copy_checked(QBank& dst, const QBank& src) {
  if (dst.num_tables() != src.num_tables() || dst.num_states() != src.num_states() ||
      dst.num_actions() != src.num_actions())
    throw InputError("snapshot table has the wrong shape for this domain");
  dst = src;
}

void expect_count(const std::vector<QBank>& banks, std::size_t n) {
  if (banks.size() != n)
    throw InputError("snapshot holds " + std::to_string(banks.size()) + " tables, expected " +
                     std::to_string(n));
}

}  // namespace

void DqprmLearner::restore(const std::vector<QBank>& banks) {
  expect_count(banks, trainers_.size());
  for (std::size_t i = 0; i < banks.size(); ++i) copy_checked(trainers_[i]->q(), banks[i]);
}

EpisodeResult DqprmLearner::test(Rng& rng) const {
  return dqprm_execute(d_, snapshot(), cfg_, true, rng);
}

// IQL

IqlLearner::IqlLearner(const Domain& d, const TrainerConfig& cfg)
    : d_(d), cfg_(cfg), memory_(d.team_rm, d.memory_events) {
  cfg_.validate();
  for (std::size_t i = 0; i < d.num_agents(); ++i) {
    q_.emplace_back(memory_.size(), d.grid.num_cells(), kNumActions);
    rngs_.push_back(Rng::derive(cfg_.seed, i));
  }
}

void IqlLearner::begin(Episode& ep) const {
  ep.s = d_.starts;
  ep.s2.resize(d_.num_agents());
  ep.a.resize(d_.num_agents());
  ep.u = d_.team_rm.initial();
  ep.t = 0;
}

void IqlLearner::act(Episode& ep, bool greedy, std::vector<Rng>& rngs) const {
  const std::size_t m = memory_.index(ep.u);
  const RegionMask closed = d_.team_gates.closed(ep.u);
  for (std::size_t i = 0; i < d_.num_agents(); ++i) {
    auto row = q_[i].row(m, ep.s[i]);
    ep.a[i] = greedy ? greedy_select(row) : softmax_select(row, cfg_.tau, rngs[i]);
    ep.s2[i] = step_agent(d_.grid, ep.s[i], static_cast<Action>(ep.a[i]), closed, rngs[i]);
  }
  ep.buf.clear();
  d_.team_labels.label(ep.s2, ep.u, ep.buf);
  FoldResult f = fold_events(d_.team_rm, ep.u, ep.buf);
  ep.u2 = f.state;
  ep.reward = f.reward;
}

void IqlLearner::train(std::uint64_t steps) {
  for (std::uint64_t k = 0; k < steps; ++k) {
    if (!in_episode_) {
      begin(ep_);
      in_episode_ = true;
    }
    act(ep_, false, rngs_);
    const bool done = d_.team_rm.is_final(ep_.u2);
    const std::size_t m = memory_.index(ep_.u), m2 = memory_.index(ep_.u2);
    for (std::size_t i = 0; i < d_.num_agents(); ++i) {
      double target = ep_.reward;
      if (!done) target += cfg_.gamma * max_value(q_[i].row(m2, ep_.s2[i]));
      double& q = q_[i].at(m, ep_.s[i], ep_.a[i]);
      q += cfg_.alpha * (target - q);
    }
    ep_.s.swap(ep_.s2);
    ep_.u = ep_.u2;
    if (done || ++ep_.t >= cfg_.episode_len) in_episode_ = false;
  }
}

void IqlLearner::restore(const std::vector<QBank>& banks) {
  expect_count(banks, q_.size());
  for (std::size_t i = 0; i < banks.size(); ++i) copy_checked(q_[i], banks[i]);
  in_episode_ = false;
}

EpisodeResult IqlLearner::test(Rng& rng) const {
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < d_.num_agents(); ++i) rngs.emplace_back(rng.next());
  Episode ep;
  begin(ep);
  EpisodeResult res;
  for (std::uint64_t t = 1; t <= cfg_.episode_len; ++t) {
    act(ep, true, rngs);
    ep.s.swap(ep.s2);
    ep.u = ep.u2;
    if (d_.team_rm.is_final(ep.u)) {
      res.completed = true;
      res.steps = t;
      return res;
    }
  }
  res.steps = cfg_.episode_len;
  return res;
}

// h-IL

HilLearner::HilLearner(const Domain& d, const TrainerConfig& cfg)
    : d_(d), cfg_(cfg), memory_(d.team_rm, d.memory_events) {
  cfg_.validate();
  const std::size_t n = d.num_agents();
  available_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& opts = d.options[i];
    if (opts.empty()) throw ConfigError("/options/" + d.agents[i] + ": agent has no options");
    for (std::size_t m = 0; m < memory_.size(); ++m) {
      std::vector<std::size_t> avail;
      for (std::size_t o = 0; o < opts.size(); ++o) {
        bool ok = std::all_of(opts[o].requires_events.begin(), opts[o].requires_events.end(),
                              [&](Event e) { return memory_.has(m, e); }) &&
                  std::none_of(opts[o].excludes_events.begin(), opts[o].excludes_events.end(),
                               [&](Event e) { return memory_.has(m, e); });
        if (ok) avail.push_back(o);
      }
      if (avail.empty())
        throw ConfigError("/options/" + d.agents[i] + ": no option available in memory state " +
                          std::to_string(m));
      available_[i].push_back(std::move(avail));
    }
    meta_.emplace_back(1, memory_.size(), opts.size());
    option_q_.emplace_back();
    for (const auto& o : opts)
      option_q_[i].push_back(o.kind == OptionSpec::Kind::go_to ? QBank(1, d.grid.num_cells(), kNumActions)
                                                               : QBank());
    rngs_.push_back(Rng::derive(cfg_.seed, i));
  }
}

std::vector<std::size_t> HilLearner::available(std::size_t agent, std::size_t m) const {
  return available_[agent][m];
}

std::vector<QBank> HilLearner::snapshot() const {
  std::vector<QBank> out;
  for (std::size_t i = 0; i < d_.num_agents(); ++i) {
    out.push_back(meta_[i]);
    for (const auto& q : option_q_[i])
      if (q.num_tables()) out.push_back(q);
  }
  return out;
}

void HilLearner::restore(const std::vector<QBank>& banks) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < d_.num_agents(); ++i) {
    ++n;
    for (const auto& q : option_q_[i]) n += q.num_tables() ? 1 : 0;
  }
  expect_count(banks, n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d_.num_agents(); ++i) {
    copy_checked(meta_[i], banks[k++]);
    for (auto& q : option_q_[i])
      if (q.num_tables()) copy_checked(q, banks[k++]);
  }
  in_episode_ = false;
}

void HilLearner::begin(Episode& ep) const {
  const std::size_t n = d_.num_agents();
  ep.s = d_.starts;
  ep.s2.resize(n);
  ep.a.resize(n);
  ep.running.assign(n, Running{});
  ep.u = d_.team_rm.initial();
  ep.t = 0;
}

void HilLearner::act(Episode& ep, bool greedy, std::vector<Rng>& rngs) const {
  const std::size_t m = memory_.index(ep.u);
  const RegionMask closed = d_.team_gates.closed(ep.u);
  double values[64];
  for (std::size_t i = 0; i < d_.num_agents(); ++i) {
    Running& r = ep.running[i];
    if (!r.active) {
      const auto& avail = available_[i][m];
      auto row = meta_[i].row(0, m);
      const std::size_t k = std::min<std::size_t>(avail.size(), 64);
      for (std::size_t j = 0; j < k; ++j) values[j] = row[avail[j]];
      std::span<const double> sub(values, k);
      std::size_t pick = greedy ? greedy_select(sub) : softmax_select(sub, cfg_.tau, rngs[i]);
      r = Running{true, avail[pick], m, 0.0, 1.0, false};
    }
    const OptionSpec& o = d_.options[i][r.option];
    Action a = Action::stay;
    r.at_target_stay = false;
    if (o.kind == OptionSpec::Kind::go_to) {
      if (ep.s[i] == o.target) {
        r.at_target_stay = true;
      } else {
        auto row = option_q_[i][r.option].row(0, ep.s[i]);
        a = static_cast<Action>(greedy ? greedy_select(row) : softmax_select(row, cfg_.tau, rngs[i]));
      }
    }
    ep.a[i] = a;
    ep.s2[i] = step_agent(d_.grid, ep.s[i], a, closed, rngs[i]);
  }
  ep.buf.clear();
  d_.team_labels.label(ep.s2, ep.u, ep.buf);
  FoldResult f = fold_events(d_.team_rm, ep.u, ep.buf);
  ep.u2 = f.state;
  ep.reward = f.reward;
}

bool HilLearner::ends(const Episode& ep, std::size_t i, bool done) const {
  const Running& r = ep.running[i];
  const OptionSpec& o = d_.options[i][r.option];
  if (done || memory_.index(ep.u2) != r.start_memory) return true;
  // A hold lasts one step, after which the meta-policy chooses again.
  if (o.kind == OptionSpec::Kind::hold) return true;
  return r.at_target_stay || ep.s2[i] == o.target;
}

void HilLearner::finish(std::size_t i, Running& r, std::size_t m_next, bool done) {
  double target = r.reward;
  if (!done) {
    auto row = meta_[i].row(0, m_next);
    double best = -1e300;
    for (auto o : available_[i][m_next]) best = std::max(best, row[o]);
    target += r.discount * best;
  }
  double& q = meta_[i].at(0, r.start_memory, r.option);
  q += cfg_.alpha * (target - q);
  r.active = false;
}

void HilLearner::train(std::uint64_t steps) {
  const std::size_t n = d_.num_agents();
  for (std::uint64_t k = 0; k < steps; ++k) {
    if (!in_episode_) {
      begin(ep_);
      in_episode_ = true;
    }
    act(ep_, false, rngs_);
    const bool done = d_.team_rm.is_final(ep_.u2);
    const bool truncated = !done && ep_.t + 1 >= cfg_.episode_len;
    const std::size_t m2 = memory_.index(ep_.u2);
    for (std::size_t i = 0; i < n; ++i) {
      Running& r = ep_.running[i];
      const OptionSpec& o = d_.options[i][r.option];
      if (o.kind == OptionSpec::Kind::go_to && !r.at_target_stay) {
        const bool reached = ep_.s2[i] == o.target;
        auto& oq = option_q_[i][r.option];
        double target = reached ? 1.0 : cfg_.gamma * max_value(oq.row(0, ep_.s2[i]));
        double& q = oq.at(0, ep_.s[i], static_cast<std::size_t>(ep_.a[i]));
        q += cfg_.alpha * (target - q);
      }
      r.reward += r.discount * ep_.reward;
      r.discount *= cfg_.gamma;
      if (ends(ep_, i, done) || truncated) finish(i, r, m2, done);
    }
    ep_.s.swap(ep_.s2);
    ep_.u = ep_.u2;
    ++ep_.t;
    if (done || truncated) in_episode_ = false;
  }
}

EpisodeResult HilLearner::test(Rng& rng) const {
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < d_.num_agents(); ++i) rngs.emplace_back(rng.next());
  Episode ep;
  begin(ep);
  EpisodeResult res;
  for (std::uint64_t t = 1; t <= cfg_.episode_len; ++t) {
    act(ep, true, rngs);
    const bool done = d_.team_rm.is_final(ep.u2);
    for (std::size_t i = 0; i < d_.num_agents(); ++i)
      if (ends(ep, i, done)) ep.running[i].active = false;
    ep.s.swap(ep.s2);
    ep.u = ep.u2;
    if (done) {
      res.completed = true;
      res.steps = t;
      return res;
    }
  }
  res.steps = cfg_.episode_len;
  return res;
}

// CQRM

CqrmLearner::CqrmLearner(const Domain& d, const TrainerConfig& cfg, double budget) : d_(d), cfg_(cfg) {
  cfg_.validate();
  const double estimate = cqrm_size_estimate(d);
  if (estimate > budget) {
    std::ostringstream msg;
    msg << "centralized q-function for " << d.name << " needs about " << estimate
        << " values (budget " << budget << ")";
    throw BudgetError(msg.str(), estimate);
  }
  env_ = std::make_unique<JointEnv>(d);
  trainer_ = std::make_unique<QrmTrainer>(*env_, cfg_, Rng(cfg_.seed));
}

void CqrmLearner::restore(const std::vector<QBank>& banks) {
  expect_count(banks, 1);
  copy_checked(trainer_->q(), banks[0]);
}

EpisodeResult CqrmLearner::test(Rng& rng) const {
  GreedyRollout r = qrm_rollout(*env_, trainer_->q(), cfg_.episode_len, rng);
  EpisodeResult res;
  res.completed = r.completed;
  res.steps = r.completed ? r.steps : cfg_.episode_len;
  return res;
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::dqprm: return "dqprm";
    case Algorithm::iql: return "iql";
    case Algorithm::hil: return "hil";
    case Algorithm::cqrm: return "cqrm";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "dqprm") return Algorithm::dqprm;
  if (name == "iql") return Algorithm::iql;
  if (name == "hil" || name == "h-il") return Algorithm::hil;
  if (name == "cqrm") return Algorithm::cqrm;
  throw ConfigError("algorithm: unknown algorithm " + name + " (dqprm, iql, hil, cqrm)");
}

std::unique_ptr<TeamLearner> make_learner(Algorithm a, const Domain& d, const TrainerConfig& cfg,
                                          double cqrm_budget) {
  switch (a) {
    case Algorithm::dqprm: return std::make_unique<DqprmLearner>(d, cfg);
    case Algorithm::iql: return std::make_unique<IqlLearner>(d, cfg);
    case Algorithm::hil: return std::make_unique<HilLearner>(d, cfg);
    case Algorithm::cqrm: return std::make_unique<CqrmLearner>(d, cfg, cqrm_budget);
  }
  throw ConfigError("algorithm: unknown");
}

std::optional<std::uint64_t> shortest_completion(const Domain& d, double state_limit) {
  const std::size_t n = d.num_agents();
  const std::uint64_t cells = d.grid.num_cells();
  const std::uint64_t rm_states = d.team_rm.num_states();
  const double total = std::pow(static_cast<double>(cells), static_cast<double>(n)) *
                       static_cast<double>(rm_states);
  if (total > state_limit)
    throw BudgetError("joint search space of " + d.name + " exceeds the state limit", total);
  if (d.team_rm.is_final(d.team_rm.initial())) return 0;

  auto encode = [&](std::span<const LocalState> c, StateIndex u) {
    std::uint64_t code = 0;
    for (std::size_t i = n; i-- > 0;) code = code * cells + c[i];
    return code * rm_states + u;
  };
  std::vector<char> seen(static_cast<std::size_t>(total), 0);
  std::vector<std::uint64_t> frontier{encode(d.starts, d.team_rm.initial())}, next;
  seen[frontier[0]] = 1;
  std::vector<LocalState> c(n), c2(n);
  std::vector<Event> buf;
  std::uint64_t joint_actions = 1;
  for (std::size_t i = 0; i < n; ++i) joint_actions *= kNumActions;

  for (std::uint64_t depth = 1; !frontier.empty(); ++depth) {
    next.clear();
    for (auto code : frontier) {
      StateIndex u = static_cast<StateIndex>(code % rm_states);
      std::uint64_t rest = code / rm_states;
      for (std::size_t i = 0; i < n; ++i) {
        c[i] = static_cast<LocalState>(rest % cells);
        rest /= cells;
      }
      const RegionMask closed = d.team_gates.closed(u);
      for (std::uint64_t ja = 0; ja < joint_actions; ++ja) {
        std::uint64_t a = ja;
        for (std::size_t i = 0; i < n; ++i) {
          c2[i] = d.grid.move(c[i], static_cast<Action>(a % kNumActions), closed);
          a /= kNumActions;
        }
        buf.clear();
        d.team_labels.label(c2, u, buf);
        StateIndex u2 = fold_events(d.team_rm, u, buf).state;
        if (d.team_rm.is_final(u2)) return depth;
        std::uint64_t id = encode(c2, u2);
        if (!seen[id]) {
          seen[id] = 1;
          next.push_back(id);
        }
      }
    }
    frontier.swap(next);
  }
  return std::nullopt;
}

}  // namespace rmc
