#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmcoop/learners.hpp"

namespace rmc {

struct ExperimentSpec {
  /// Shipped domain name or config path.
  std::string domain = "buttons";
  Algorithm algorithm = Algorithm::dqprm;
  TrainerConfig config;
  /// When set, config.total_steps is replaced by the domain's desk-scale
  /// budget for the algorithm (if the domain lists one).
  bool desk_scale = true;
  std::size_t num_runs = 10;
  /// Artifacts go here; empty writes nothing.
  std::string out_dir;
  /// Also write each run's final tables as <domain>_<algo>_run<k>.qbank
  /// into out_dir.
  bool save_snapshots = false;
  double cqrm_budget = kDefaultCqrmBudget;
};

/// Parses an experiment config (JSON). Unknown keys are errors.
ExperimentSpec parse_experiment_spec(const std::string& json_text);

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  /// Test steps-to-completion per checkpoint (mean over test episodes,
  /// episode_len when incomplete).
  std::vector<double> test_steps;
  /// Non-empty when the run failed; such runs are left out of the curve.
  std::string error;
  double seconds = 0;
};

struct LearningCurve {
  std::string algorithm;
  std::vector<std::uint64_t> steps;
  std::vector<double> median, q25, q75;
};

struct ExperimentResult {
  ExperimentSpec spec;  // with total_steps resolved
  std::string domain_name;
  bool budget_from_domain = false;
  std::vector<std::uint64_t> checkpoints;
  std::vector<RunRecord> runs;
  LearningCurve curve;
};

/// 0, every, 2*every, ... and finally total.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t total, std::uint64_t every);

/// RMCOOP_WORKERS when set to a positive integer, else the hardware
/// concurrency (at least 1).
std::size_t default_workers();

/// Trains num_runs independent learners (run k seeded with seed + k) and
/// tests each at every checkpoint with a frozen greedy policy. Runs go to a
/// pool of `workers` threads (0: default_workers()); results do not depend
/// on the worker count. Throws BudgetError for an infeasible cqrm spec and
/// ConfigError for an uncertified dqprm domain before any run starts.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t workers = 0);

/// Nearest-rank percentile: the value at 1-based rank ceil(p/100 * n) of
/// the sorted sample. Throws InputError on an empty sample.
double nearest_rank(std::vector<double> values, double percent);

/// Per-checkpoint median and quartiles over runs. Throws InputError when a
/// run's length differs from the grid.
LearningCurve aggregate(const std::string& algorithm, const std::vector<std::uint64_t>& steps,
                        const std::vector<std::vector<double>>& runs);

/// Long format: algorithm,run,seed,steps,test_steps.
std::string runs_csv(const ExperimentResult& r);
/// Long format: algorithm,steps,median,q25,q75.
std::string curves_csv(const std::vector<LearningCurve>& curves);
std::string manifest_json(const ExperimentResult& r);
/// Writes <domain>_<algo>_runs.csv, _aggregate.csv and _manifest.json
/// into spec.out_dir, creating it.
void write_artifacts(const ExperimentResult& r);

/// Reads curves from an aggregate CSV, or aggregates a runs CSV. Throws
/// ParseError on other content.
std::vector<LearningCurve> read_curves_csv(const std::string& text);

/// Static SVG of median lines with quartile bands. Byte-stable.
std::string render_svg(const std::vector<LearningCurve>& curves, const std::string& title);

}  // namespace rmc
