// rm: command-line front end for the rmcoop library.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rmcoop/algebra.hpp"
#include "rmcoop/domain.hpp"
#include "rmcoop/error.hpp"
#include "rmcoop/experiments.hpp"
#include "rmcoop/learners.hpp"

namespace {

using namespace rmc;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A path on disk, or the name of a machine shipped with the library.
RewardMachine read_machine(const std::string& path) {
  if (std::filesystem::exists(path)) return parse_rm(read_text(path));
  if (auto text = shipped_file(path)) return parse_rm(*text);
  throw InputError("cannot read " + path);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InputError("failed writing " + path);
}

std::vector<EventAlphabet> read_agent_events(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<EventAlphabet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    EventString xi = make_event_string(line);
    if (xi.empty()) continue;
    EventAlphabet a;
    for (Event e : xi) a.insert(e);
    out.push_back(a);
  }
  if (out.empty()) throw InputError(path + ": no event sets");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward machines for cooperative multi-agent RL"};
  app.require_subcommand(1);
  int status = 0;

  // project
  auto* project_cmd = app.add_subcommand("project", "Project an RM onto a local event set");
  std::string proj_rm, proj_events, proj_out;
  project_cmd->add_option("rm", proj_rm, "RM file (or shipped file name)")->required();
  project_cmd->add_option("--events", proj_events, "Comma-separated local events")->required();
  project_cmd->add_option("-o,--output", proj_out, "Output file (default stdout)");
  project_cmd->callback([&] {
    RewardMachine rm = read_machine(proj_rm);
    EventAlphabet sigma;
    for (Event e : make_event_string(proj_events)) sigma.insert(e);
    write_text(proj_out, serialize_rm(project(rm, sigma).rm));
  });

  // compose
  auto* compose_cmd = app.add_subcommand("compose", "Parallel composition of RMs");
  std::vector<std::string> comp_files;
  std::string comp_out;
  compose_cmd->add_option("rms", comp_files, "RM files")->required();
  compose_cmd->add_option("-o,--output", comp_out, "Output file (default stdout)");
  compose_cmd->callback([&] {
    std::vector<RewardMachine> ms;
    for (const auto& f : comp_files) ms.push_back(read_machine(f));
    write_text(comp_out, serialize_rm(parallel_compose(ms)));
  });

  // bisim
  auto* bisim_cmd = app.add_subcommand("bisim", "Bisimilarity check; exit 0 iff bisimilar");
  std::string bis_a, bis_b;
  bisim_cmd->add_option("a", bis_a)->required();
  bisim_cmd->add_option("b", bis_b)->required();
  bisim_cmd->callback([&] {
    BisimWitness w = is_bisimilar(read_machine(bis_a), read_machine(bis_b));
    if (w.bisimilar) {
      std::cout << "bisimilar\n";
      return;
    }
    std::cout << "not bisimilar: " << w.reason << "\n";
    if (w.counterexample) std::cout << "counterexample: " << to_string(*w.counterexample) << "\n";
    status = 1;
  });

  // check-decomposition
  auto* cd_cmd = app.add_subcommand("check-decomposition", "Project, compose and compare");
  std::string cd_rm, cd_events;
  cd_cmd->add_option("rm", cd_rm, "Team RM file (or shipped file name)")->required();
  cd_cmd->add_option("--agent-events", cd_events, "File with one local event set per line")->required();
  cd_cmd->callback([&] {
    DecompositionReport rep = check_decomposition(read_machine(cd_rm), read_agent_events(cd_events));
    std::cout << format_report(rep);
    if (!rep.bisimilar) status = 1;
  });

  // label-check
  auto* lc_cmd = app.add_subcommand("label-check", "Check a domain's labeling decomposition");
  std::string lc_domain;
  double lc_budget = kDefaultLabelCheckBudget;
  lc_cmd->add_option("--domain", lc_domain, "Shipped domain name or config path")->required();
  lc_cmd->add_option("--budget", lc_budget, "Largest number of (joint state, RM state) pairs");
  lc_cmd->callback([&] {
    Domain d = make_domain(lc_domain);
    DomainCertificate c = certify(d, lc_budget);
    std::cout << format_report(c.decomposition);
    if (c.labels) std::cout << format_report(*c.labels);
    else std::cout << "label check skipped: " << c.label_note << "\n";
    if (!c.ok()) status = 1;
  });

  // shortest
  auto* sc_cmd = app.add_subcommand("shortest", "Fewest slip-free team steps to completion (BFS)");
  std::string sc_domain;
  sc_cmd->add_option("--domain", sc_domain)->required();
  sc_cmd->callback([&] {
    Domain d = make_domain(sc_domain);
    auto s = shortest_completion(d);
    if (s) std::cout << *s << "\n";
    else {
      std::cout << "unreachable\n";
      status = 1;
    }
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Run an experiment: train, test periodically, aggregate");
  ExperimentSpec spec;
  std::string config_file, algo = "dqprm";
  std::uint64_t steps = 0;
  std::size_t workers = 0;
  bool svg = false;
  train_cmd->add_option("--config", config_file, "Experiment config (JSON); flags below override it");
  auto* dom_opt = train_cmd->add_option("--domain", spec.domain);
  auto* algo_opt = train_cmd->add_option("--algo", algo, "dqprm, iql, hil or cqrm");
  auto* runs_opt = train_cmd->add_option("--runs", spec.num_runs);
  auto* seed_opt = train_cmd->add_option("--seed", spec.config.seed);
  auto* out_opt = train_cmd->add_option("--out", spec.out_dir, "Output directory");
  auto* steps_opt = train_cmd->add_option("--steps", steps, "Training steps (default: domain desk budget)");
  auto* every_opt = train_cmd->add_option("--test-every", spec.config.test_every);
  auto* alpha_opt = train_cmd->add_option("--alpha", spec.config.alpha);
  train_cmd->add_option("--workers", workers, "Worker threads (default RMCOOP_WORKERS or all cores)");
  train_cmd->add_flag("--save-snapshots", spec.save_snapshots, "Write final q-tables of every run");
  train_cmd->add_flag("--svg", svg, "Also render the aggregate curve as SVG");
  train_cmd->callback([&] {
    if (!config_file.empty()) {
      ExperimentSpec base = parse_experiment_spec(read_text(config_file));
      if (*dom_opt) base.domain = spec.domain;
      if (*runs_opt) base.num_runs = spec.num_runs;
      if (*seed_opt) base.config.seed = spec.config.seed;
      if (*out_opt) base.out_dir = spec.out_dir;
      if (*every_opt) base.config.test_every = spec.config.test_every;
      if (*alpha_opt) base.config.alpha = spec.config.alpha;
      base.save_snapshots = base.save_snapshots || spec.save_snapshots;
      if (!*algo_opt) algo = algorithm_name(base.algorithm);
      spec = base;
    }
    spec.algorithm = parse_algorithm(algo);
    if (*steps_opt) {
      spec.config.total_steps = steps;
      spec.desk_scale = false;
    }
    ExperimentResult r = run_experiment(spec, workers);
    std::cout << curves_csv({r.curve});
    for (const auto& run : r.runs)
      if (!run.error.empty()) std::cerr << "run " << run.index << " failed: " << run.error << "\n";
    if (svg && !spec.out_dir.empty())
      write_text((std::filesystem::path(spec.out_dir) / (r.domain_name + "_" + algo + ".svg")).string(),
                 render_svg({r.curve}, r.domain_name + " " + algorithm_name(spec.algorithm)));
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Greedy test episodes from a saved snapshot");
  std::string ev_snapshot, ev_domain, ev_algo = "dqprm";
  std::uint64_t ev_episodes = 100, ev_seed = 0;
  eval_cmd->add_option("--snapshot", ev_snapshot)->required();
  eval_cmd->add_option("--domain", ev_domain)->required();
  eval_cmd->add_option("--algo", ev_algo, "Algorithm that wrote the snapshot");
  eval_cmd->add_option("--episodes", ev_episodes);
  eval_cmd->add_option("--seed", ev_seed);
  eval_cmd->callback([&] {
    Domain d = make_domain(ev_domain);
    TrainerConfig cfg;
    Algorithm a = parse_algorithm(ev_algo);
    std::unique_ptr<TeamLearner> learner =
        a == Algorithm::dqprm ? std::make_unique<DqprmLearner>(d, cfg, true) : make_learner(a, d, cfg);
    learner->restore(load_qbanks(ev_snapshot));
    Rng rng(ev_seed);
    std::vector<double> steps_taken;
    std::uint64_t completed = 0;
    for (std::uint64_t e = 0; e < ev_episodes; ++e) {
      EpisodeResult r = learner->test(rng);
      completed += r.completed;
      steps_taken.push_back(static_cast<double>(r.steps));
    }
    std::cout << "episodes " << ev_episodes << "\ncompleted " << completed << "\n";
    if (!steps_taken.empty())
      std::cout << "median_steps " << nearest_rank(steps_taken, 50) << "\nq25 " << nearest_rank(steps_taken, 25)
                << "\nq75 " << nearest_rank(steps_taken, 75) << "\n";
  });

  // plot-data
  auto* plot_cmd = app.add_subcommand("plot-data", "Merge result CSVs into one plot-ready CSV");
  std::vector<std::string> plot_in;
  std::string plot_out, plot_svg, plot_title = "test steps to completion";
  plot_cmd->add_option("csv", plot_in, "Aggregate or runs CSV files")->required();
  plot_cmd->add_option("-o,--output", plot_out, "Output CSV (default stdout)");
  plot_cmd->add_option("--svg", plot_svg, "Also write an SVG rendering here");
  plot_cmd->add_option("--title", plot_title);
  plot_cmd->callback([&] {
    std::vector<LearningCurve> curves;
    for (const auto& f : plot_in) {
      try {
        for (auto& c : read_curves_csv(read_text(f))) {
          // A runs CSV and its aggregate give the same curve; keep one.
          bool dup = std::any_of(curves.begin(), curves.end(), [&](const LearningCurve& o) {
            return o.algorithm == c.algorithm && o.steps == c.steps && o.median == c.median && o.q25 == c.q25 &&
                   o.q75 == c.q75;
          });
          if (!dup) curves.push_back(std::move(c));
        }
      } catch (const ParseError& e) {
        throw InputError(f + ": " + e.what());
      }
    }
    write_text(plot_out, curves_csv(curves));
    if (!plot_svg.empty()) write_text(plot_svg, render_svg(curves, plot_title));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
