#include "rmcoop/qrm.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rmcoop/error.hpp"

namespace rmc {

double max_value(std::span<const double> q) {
  double m = q[0];
  for (std::size_t k = 1; k < q.size(); ++k) m = std::max(m, q[k]);
  return m;
}

std::size_t greedy_select(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < q.size(); ++k)
    if (q[k] > q[best]) best = k;
  return best;
}

std::size_t softmax_select(std::span<const double> q, double tau, Rng& rng) {
  const double m = max_value(q);
  double w[64];
  std::vector<double> big;
  double* weights = w;
  if (q.size() > 64) {
    big.resize(q.size());
    weights = big.data();
  }
  double total = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    weights[k] = std::exp((q[k] - m) / tau);
    total += weights[k];
  }
  double x = rng.uniform() * total;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (x < weights[k]) return k;
    x -= weights[k];
  }
  // Rounding left x just above the last weight.
  for (std::size_t k = q.size(); k-- > 0;)
    if (weights[k] > 0) return k;
  return 0;
}

namespace {

constexpr char kMagic[4] = {'R', 'M', 'Q', 'B'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 4);
}
std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError(0, "truncated q-bank snapshot");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError(0, "truncated q-bank snapshot");
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}

}  // namespace

void save_qbanks(std::ostream& out, const std::vector<QBank>& banks) {
  out.write(kMagic, 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(banks.size()));
  for (const auto& q : banks) {
    put_u64(out, q.num_tables());
    put_u64(out, q.num_states());
    put_u64(out, q.num_actions());
    for (double v : q.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
}

std::vector<QBank> load_qbanks(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError(0, "not a q-bank snapshot (bad magic)");
  if (get_u32(in) != 1) throw ParseError(0, "unsupported q-bank snapshot version");
  std::uint32_t count = get_u32(in);
  std::vector<QBank> banks;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint64_t t = get_u64(in), s = get_u64(in), a = get_u64(in);
    if (t == 0 || s == 0 || a == 0 || t * s * a > (std::uint64_t{1} << 32))
      throw ParseError(0, "implausible q-bank dimensions");
    QBank q(t, s, a);
    for (std::size_t u = 0; u < t; ++u)
      for (std::size_t x = 0; x < s; ++x)
        for (std::size_t y = 0; y < a; ++y) q.at(u, x, y) = std::bit_cast<double>(get_u64(in));
    banks.push_back(std::move(q));
  }
  return banks;
}

void save_qbanks(const std::string& path, const std::vector<QBank>& banks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  save_qbanks(out, banks);
  if (!out) throw InputError("failed writing " + path);
}

std::vector<QBank> load_qbanks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return load_qbanks(in);
}

void TrainerConfig::validate() const {
  if (!(gamma > 0 && gamma <= 1)) throw ConfigError("gamma: must lie in (0, 1]");
  if (!(alpha > 0 && alpha <= 1)) throw ConfigError("alpha: must lie in (0, 1]");
  if (!(tau > 0)) throw ConfigError("tau: must be positive");
  if (!(sync_prob >= 0 && sync_prob <= 1)) throw ConfigError("sync_prob: must lie in [0, 1]");
  if (episode_len == 0) throw ConfigError("episode_len: must be positive");
  if (test_every == 0) throw ConfigError("test_every: must be positive");
  if (test_episodes == 0) throw ConfigError("test_episodes: must be positive");
}

QrmTrainer::QrmTrainer(QrmEnv& env, const TrainerConfig& cfg, Rng rng)
    : env_(env),
      cfg_(cfg),
      rng_(std::move(rng)),
      q_(env.machine().num_states(), env.num_states(), env.num_actions()) {
  cfg_.validate();
}

bool QrmTrainer::step_once() {
  const RewardMachine& rm = env_.machine();
  if (!in_episode_) {
    s_ = env_.reset(rng_);
    u_ = rm.initial();
    t_ = 0;
    in_episode_ = true;
    ++counters_.episodes;
    if (rm.is_final(u_)) {
      in_episode_ = false;
      return false;
    }
  }

  const std::size_t a = softmax_select(q_.row(u_, s_), cfg_.tau, rng_);
  const std::uint32_t s2 = env_.step(s_, a, u_, rng_);
  const bool sync = env_.uses_sync() ? rng_.bernoulli(cfg_.sync_prob) : true;

  StateIndex u_next = u_;
  for (StateIndex v = 0; v < rm.num_states(); ++v) {
    buf_.clear();
    env_.label(s2, v, sync, buf_);
    FoldResult f = fold_events(rm, v, buf_);
    double target = f.reward;
    if (!rm.is_final(f.state)) target += cfg_.gamma * max_value(q_.row(f.state, s2));
    double& q = q_.at(v, s_, a);
    q += cfg_.alpha * (target - q);
    assert(q >= 0.0 && q <= 1.0);
    ++counters_.q_writes;
    if (on_write) on_write(v, s_, a, q);
    if (v == u_) u_next = f.state;
  }

  ++counters_.steps;
  ++t_;
  s_ = s2;
  u_ = u_next;
  if (rm.is_final(u_)) {
    ++counters_.completions;
    in_episode_ = false;
  } else if (t_ >= cfg_.episode_len) {
    in_episode_ = false;
  }
  return true;
}

void QrmTrainer::train(std::uint64_t steps) {
  for (std::uint64_t k = 0; k < steps; ++k)
    if (!step_once()) return;
}

std::uint64_t QrmTrainer::train_episode() {
  in_episode_ = false;
  std::uint64_t n = 0;
  while (step_once()) {
    ++n;
    if (!in_episode_) break;
  }
  return n;
}

QBank qrm_train(QrmEnv& env, const TrainerConfig& cfg) {
  QrmTrainer trainer(env, cfg, Rng(cfg.seed));
  trainer.train(cfg.total_steps);
  return trainer.q();
}

GreedyRollout qrm_rollout(QrmEnv& env, const QBank& q, std::uint64_t max_steps, Rng& rng) {
  const RewardMachine& rm = env.machine();
  GreedyRollout out;
  std::uint32_t s = env.reset(rng);
  StateIndex u = rm.initial();
  std::vector<Event> buf;
  while (!rm.is_final(u) && out.steps < max_steps) {
    std::size_t a = greedy_select(q.row(u, s));
    s = env.step(s, a, u, rng);
    buf.clear();
    env.label(s, u, true, buf);
    u = fold_events(rm, u, buf).state;
    ++out.steps;
  }
  out.completed = rm.is_final(u);
  return out;
}

}  // namespace rmc
