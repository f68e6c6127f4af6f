#include "rmcoop/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rmcoop/error.hpp"

namespace rmc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

// Shortest round-trip form; locale independent.
std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed2(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError(line, "bad integer '" + s + "'");
  return v;
}

std::string stem_of(const std::string& domain_name, Algorithm a) {
  return domain_name + "_" + algorithm_name(a);
}

RunRecord run_one(const Domain& d, const ExperimentSpec& spec, const std::vector<std::uint64_t>& grid,
                  std::size_t index) {
  RunRecord rec;
  rec.index = index;
  rec.seed = spec.config.seed + index;
  auto t0 = std::chrono::steady_clock::now();
  try {
    TrainerConfig cfg = spec.config;
    cfg.seed = rec.seed;
    std::unique_ptr<TeamLearner> learner;
    if (spec.algorithm == Algorithm::dqprm)
      learner = std::make_unique<DqprmLearner>(d, cfg, true);  // certified by the caller
    else
      learner = make_learner(spec.algorithm, d, cfg, spec.cqrm_budget);
    std::uint64_t done = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      learner->train(grid[k] - done);
      done = grid[k];
      Rng rng = Rng::derive(rec.seed, 1000000 + k);
      double total = 0;
      for (std::uint64_t e = 0; e < cfg.test_episodes; ++e) total += static_cast<double>(learner->test(rng).steps);
      rec.test_steps.push_back(total / static_cast<double>(cfg.test_episodes));
    }
    if (spec.save_snapshots && !spec.out_dir.empty()) {
      save_qbanks((std::filesystem::path(spec.out_dir) /
                   (stem_of(d.name, spec.algorithm) + "_run" + std::to_string(index) + ".qbank"))
                      .string(),
                  learner->snapshot());
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.test_steps.clear();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) fail("", "expected an object");
  ExperimentSpec s;
  for (const auto& [key, v] : j.items()) {
    const std::string path = "/" + key;
    if (key == "domain") {
      if (!v.is_string()) fail(path, "expected a string");
      s.domain = v.get<std::string>();
    } else if (key == "algorithm") {
      if (!v.is_string()) fail(path, "expected a string");
      s.algorithm = parse_algorithm(v.get<std::string>());
    } else if (key == "runs") {
      s.num_runs = get_count(v, path);
    } else if (key == "seed") {
      s.config.seed = get_count(v, path);
    } else if (key == "out") {
      if (!v.is_string()) fail(path, "expected a string");
      s.out_dir = v.get<std::string>();
    } else if (key == "cqrm_budget") {
      s.cqrm_budget = get_number(v, path);
    } else if (key == "trainer") {
      if (!v.is_object()) fail(path, "expected an object");
      for (const auto& [k, x] : v.items()) {
        const std::string p = path + "/" + k;
        if (k == "gamma") s.config.gamma = get_number(x, p);
        else if (k == "alpha") s.config.alpha = get_number(x, p);
        else if (k == "tau") s.config.tau = get_number(x, p);
        else if (k == "sync_prob") s.config.sync_prob = get_number(x, p);
        else if (k == "episode_len") s.config.episode_len = get_count(x, p);
        else if (k == "total_steps") {
          s.config.total_steps = get_count(x, p);
          s.desk_scale = false;
        } else if (k == "test_every") s.config.test_every = get_count(x, p);
        else if (k == "test_episodes") s.config.test_episodes = get_count(x, p);
        else fail(p, "unknown field");
      }
    } else {
      fail(path, "unknown field");
    }
  }
  if (s.num_runs == 0) fail("/runs", "must be positive");
  s.config.validate();
  return s;
}

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t total, std::uint64_t every) {
  if (every == 0) throw InputError("checkpoint spacing must be positive");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = 0; s < total; s += every) out.push_back(s);
  out.push_back(total);
  return out;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("RMCOOP_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentSpec& spec_in, std::size_t workers) {
  ExperimentResult res;
  res.spec = spec_in;
  if (res.spec.num_runs == 0) throw ConfigError("runs: must be positive");
  const Domain d = make_domain(spec_in.domain);
  res.domain_name = d.name;
  if (res.spec.desk_scale) {
    auto it = d.desk_budget.find(algorithm_name(res.spec.algorithm));
    if (it != d.desk_budget.end()) {
      res.spec.config.total_steps = it->second;
      res.budget_from_domain = true;
    }
  }
  res.spec.config.validate();

  if (res.spec.algorithm == Algorithm::cqrm) {
    const double estimate = cqrm_size_estimate(d);
    if (estimate > res.spec.cqrm_budget) {
      std::ostringstream msg;
      msg << "centralized q-function for " << d.name << " needs about " << estimate << " values (budget "
          << res.spec.cqrm_budget << ")";
      throw BudgetError(msg.str(), estimate);
    }
  }
  if (res.spec.algorithm == Algorithm::dqprm) DqprmLearner probe(d, res.spec.config);  // certification

  res.checkpoints = checkpoint_grid(res.spec.config.total_steps, res.spec.config.test_every);
  res.runs.resize(res.spec.num_runs);
  if (res.spec.save_snapshots && !res.spec.out_dir.empty()) std::filesystem::create_directories(res.spec.out_dir);
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, res.spec.num_runs);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < res.spec.num_runs;)
      res.runs[k] = run_one(d, res.spec, res.checkpoints, k);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::vector<std::vector<double>> ok;
  for (const auto& r : res.runs)
    if (r.error.empty()) ok.push_back(r.test_steps);
  res.curve.algorithm = algorithm_name(res.spec.algorithm);
  if (!ok.empty()) res.curve = aggregate(res.curve.algorithm, res.checkpoints, ok);
  if (!res.spec.out_dir.empty()) write_artifacts(res);
  return res;
}

double nearest_rank(std::vector<double> values, double percent) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

LearningCurve aggregate(const std::string& algorithm, const std::vector<std::uint64_t>& steps,
                        const std::vector<std::vector<double>>& runs) {
  LearningCurve c;
  c.algorithm = algorithm;
  c.steps = steps;
  for (std::size_t k = 0; k < runs.size(); ++k)
    if (runs[k].size() != steps.size())
      throw InputError("run " + std::to_string(k) + " has " + std::to_string(runs[k].size()) +
                       " checkpoints, expected " + std::to_string(steps.size()));
  if (runs.empty()) throw InputError("no runs to aggregate");
  std::vector<double> col(runs.size());
  for (std::size_t t = 0; t < steps.size(); ++t) {
    for (std::size_t k = 0; k < runs.size(); ++k) col[k] = runs[k][t];
    c.median.push_back(nearest_rank(col, 50));
    c.q25.push_back(nearest_rank(col, 25));
    c.q75.push_back(nearest_rank(col, 75));
  }
  return c;
}

std::string runs_csv(const ExperimentResult& r) {
  std::string out = "algorithm,run,seed,steps,test_steps\n";
  const std::string algo = algorithm_name(r.spec.algorithm);
  for (const auto& run : r.runs)
    for (std::size_t t = 0; t < run.test_steps.size(); ++t)
      out += algo + "," + std::to_string(run.index) + "," + std::to_string(run.seed) + "," +
             std::to_string(r.checkpoints[t]) + "," + num(run.test_steps[t]) + "\n";
  return out;
}

std::string curves_csv(const std::vector<LearningCurve>& curves) {
  std::string out = "algorithm,steps,median,q25,q75\n";
  for (const auto& c : curves)
    for (std::size_t t = 0; t < c.median.size(); ++t)
      out += c.algorithm + "," + std::to_string(c.steps[t]) + "," + num(c.median[t]) + "," + num(c.q25[t]) +
             "," + num(c.q75[t]) + "\n";
  return out;
}

std::string manifest_json(const ExperimentResult& r) {
  const auto& c = r.spec.config;
  json j;
  j["version"] = RMCOOP_VERSION;
  j["git_describe"] = RMCOOP_GIT_DESCRIBE;
  j["domain"] = r.spec.domain;
  j["domain_name"] = r.domain_name;
  j["algorithm"] = algorithm_name(r.spec.algorithm);
  j["runs"] = r.spec.num_runs;
  j["seed"] = c.seed;
  j["trainer"] = {{"gamma", c.gamma},
                  {"alpha", c.alpha},
                  {"tau", c.tau},
                  {"sync_prob", c.sync_prob},
                  {"episode_len", c.episode_len},
                  {"total_steps", c.total_steps},
                  {"test_every", c.test_every},
                  {"test_episodes", c.test_episodes}};
  j["budget"] = r.budget_from_domain ? "desk-scale (our own choice, not the paper's budget)" : "user-specified";
  if (r.spec.algorithm == Algorithm::cqrm) j["cqrm_budget"] = r.spec.cqrm_budget;
  json runs = json::array();
  for (const auto& run : r.runs) {
    json x = {{"run", run.index}, {"seed", run.seed}, {"seconds", run.seconds}};
    x["status"] = run.error.empty() ? "ok" : "failed";
    if (!run.error.empty()) x["error"] = run.error;
    runs.push_back(x);
  }
  j["run_status"] = runs;
  return j.dump(2) + "\n";
}

void write_artifacts(const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::path dir(r.spec.out_dir);
  fs::create_directories(dir);
  const std::string stem = stem_of(r.domain_name, r.spec.algorithm);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw InputError("failed writing " + (dir / name).string());
  };
  put(stem + "_runs.csv", runs_csv(r));
  std::vector<LearningCurve> curves;
  if (!r.curve.median.empty()) curves.push_back(r.curve);
  put(stem + "_aggregate.csv", curves_csv(curves));
  put(stem + "_manifest.json", manifest_json(r));
}

std::vector<LearningCurve> read_curves_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> order;
  std::size_t n = 1;

  if (line == "algorithm,steps,median,q25,q75") {
    std::map<std::string, LearningCurve> by;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty() || line == "\r") continue;
      auto f = split(line, ',');
      if (f.size() != 5) throw ParseError(n, "expected 5 fields");
      if (!by.count(f[0])) {
        order.push_back(f[0]);
        by[f[0]].algorithm = f[0];
      }
      auto& c = by[f[0]];
      c.steps.push_back(parse_u64(f[1], n));
      c.median.push_back(parse_double(f[2], n));
      c.q25.push_back(parse_double(f[3], n));
      c.q75.push_back(parse_double(f[4], n));
    }
    std::vector<LearningCurve> out;
    for (const auto& a : order) out.push_back(by[a]);
    return out;
  }

  if (line == "algorithm,run,seed,steps,test_steps") {
    // algorithm -> run -> (steps, value) in file order
    std::map<std::string, std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, double>>>> by;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty() || line == "\r") continue;
      auto f = split(line, ',');
      if (f.size() != 5) throw ParseError(n, "expected 5 fields");
      if (!by.count(f[0])) order.push_back(f[0]);
      by[f[0]][parse_u64(f[1], n)].emplace_back(parse_u64(f[3], n), parse_double(f[4], n));
    }
    std::vector<LearningCurve> out;
    for (const auto& a : order) {
      std::vector<std::uint64_t> grid;
      std::vector<std::vector<double>> runs;
      for (const auto& [run, pts] : by[a]) {
        std::vector<std::uint64_t> g;
        std::vector<double> v;
        for (const auto& [s, x] : pts) {
          g.push_back(s);
          v.push_back(x);
        }
        if (runs.empty()) grid = g;
        else if (g != grid) throw InputError("run " + std::to_string(run) + " of " + a + " has a different checkpoint grid");
        runs.push_back(std::move(v));
      }
      out.push_back(aggregate(a, grid, runs));
    }
    return out;
  }
  throw ParseError(1, "unrecognized CSV header '" + line + "'");
}

std::string render_svg(const std::vector<LearningCurve>& curves, const std::string& title) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double W = 640, H = 400, left = 70, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmax = 1, ymax = 1;
  for (const auto& c : curves) {
    for (auto s : c.steps) xmax = std::max(xmax, static_cast<double>(s));
    for (auto v : c.q75) ymax = std::max(ymax, v);
    for (auto v : c.median) ymax = std::max(ymax, v);
  }
  auto X = [&](double x) { return fixed2(left + pw * x / xmax); };
  auto Y = [&](double y) { return fixed2(top + ph * (1 - y / ymax)); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::string esc;
  for (char ch : title) {
    if (ch == '<') esc += "&lt;";
    else if (ch == '>') esc += "&gt;";
    else if (ch == '&') esc += "&amp;";
    else esc += ch;
  }
  s += "<text x=\"" + fixed2(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" + esc + "</text>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + X(0) + "\" y1=\"" + Y(0) + "\" x2=\"" + X(xmax) + "\" y2=\"" + Y(0) + "\"/>\n";
  s += "<line x1=\"" + X(0) + "\" y1=\"" + Y(0) + "\" x2=\"" + X(0) + "\" y2=\"" + Y(ymax) + "\"/>\n";
  s += "</g>\n<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = xmax * k / 4, yv = ymax * k / 4;
    s += "<text x=\"" + X(xv) + "\" y=\"" + fixed2(top + ph + 15) + "\" text-anchor=\"middle\">" +
         num(std::round(xv)) + "</text>\n";
    s += "<text x=\"" + fixed2(left - 5) + "\" y=\"" + Y(yv) + "\" text-anchor=\"end\">" + num(std::round(yv)) +
         "</text>\n";
  }
  s += "<text x=\"" + fixed2(left + pw / 2) + "\" y=\"" + fixed2(H - 10) +
       "\" text-anchor=\"middle\">training steps</text>\n";
  s += "<text x=\"15\" y=\"" + fixed2(top + ph / 2) + "\" transform=\"rotate(-90 15 " + fixed2(top + ph / 2) +
       ")\" text-anchor=\"middle\">test steps to completion</text>\n";
  s += "</g>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const std::string col = colors[k % 6];
    if (!c.steps.empty()) {
      std::string band;
      for (std::size_t t = 0; t < c.steps.size(); ++t)
        band += X(static_cast<double>(c.steps[t])) + "," + Y(c.q75[t]) + " ";
      for (std::size_t t = c.steps.size(); t-- > 0;)
        band += X(static_cast<double>(c.steps[t])) + "," + Y(c.q25[t]) + (t ? " " : "");
      s += "<polygon points=\"" + band + "\" fill=\"" + col + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      std::string line;
      for (std::size_t t = 0; t < c.steps.size(); ++t)
        line += (t ? " " : "") + X(static_cast<double>(c.steps[t])) + "," + Y(c.median[t]);
      s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    }
    const double ly = top + 10 + 18 * static_cast<double>(k);
    s += "<line x1=\"" + fixed2(W - right + 10) + "\" y1=\"" + fixed2(ly) + "\" x2=\"" + fixed2(W - right + 30) +
         "\" y2=\"" + fixed2(ly) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed2(W - right + 35) + "\" y=\"" + fixed2(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + c.algorithm + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace rmc
