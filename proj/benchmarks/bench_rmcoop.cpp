#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "rmcoop/algebra.hpp"
#include "rmcoop/domain.hpp"
#include "rmcoop/learners.hpp"

using namespace rmc;

namespace {

const Domain& domain(const char* name) {
  static std::map<std::string, Domain> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, make_domain(name)).first;
  return it->second;
}

void bm_project_buttons(benchmark::State& st) {
  const Domain& d = domain("buttons");
  for (auto _ : st)
    for (const auto& sigma : d.local_sets) benchmark::DoNotOptimize(project(d.team_rm, sigma));
}
BENCHMARK(bm_project_buttons);

void bm_check_decomposition(benchmark::State& st) {
  const Domain& d = domain(st.range(0) == 0 ? "buttons" : "rendezvous-10");
  for (auto _ : st) benchmark::DoNotOptimize(check_decomposition(d.team_rm, d.local_sets));
}
BENCHMARK(bm_check_decomposition)->Arg(0)->Arg(1);

void bm_bisim_rendezvous10(benchmark::State& st) {
  const Domain& d = domain("rendezvous-10");
  std::vector<RewardMachine> parts;
  for (const auto& p : d.projections) parts.push_back(p.rm);
  RewardMachine full = parallel_compose(parts);
  for (auto _ : st) benchmark::DoNotOptimize(is_bisimilar(full, d.team_rm));
}
BENCHMARK(bm_bisim_rendezvous10);

void bm_label_team(benchmark::State& st) {
  const Domain& d = domain("buttons");
  JointState s = d.starts;
  std::vector<Event> out;
  StateIndex u = d.team_rm.initial();
  for (auto _ : st) {
    out.clear();
    d.team_labels.label(s, u, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_label_team);

// Plotted training steps per second for each learner on rendezvous-2.
void bm_train(benchmark::State& st) {
  const Domain& d = domain("rendezvous-2");
  Algorithm a = static_cast<Algorithm>(st.range(0));
  auto learner = make_learner(a, d, TrainerConfig{});
  for (auto _ : st) learner->train(1000);
  st.SetItemsProcessed(st.iterations() * 1000);
  st.SetLabel(algorithm_name(a));
}
BENCHMARK(bm_train)->DenseRange(0, 3);

}  // namespace

BENCHMARK_MAIN();
