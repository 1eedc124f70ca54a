// ofsim — command-line frontend: seeded simulation runs, DQN training,
// policy comparison, and parameter sweeps over scenario files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ofsim/format.hpp"
#include "ofsim/policy.hpp"
#include "ofsim/report.hpp"
#include "ofsim/rl.hpp"
#include "ofsim/scenario_io.hpp"
#include "ofsim/sim.hpp"

namespace fs = std::filesystem;
using namespace ofsim;

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir;
  std::string format = "json";
  int seed_override = -1;
  int replications_override = -1;
  bool no_parallel = false;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("OFSIM_OUTDIR")) return env;
  return "out";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ReportFormat parse_format(const std::string& name) {
  const auto f = report_format_from_string(name);
  if (!f) throw std::invalid_argument("unknown format '" + name + "' (csv|json|markdown)");
  return *f;
}

const char* format_ext(ReportFormat f) {
  switch (f) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

PolicyKind parse_policy(const std::string& name) {
  const auto kind = policy_from_string(name);
  if (!kind) {
    std::string all;
    for (const auto& p : policy_names()) all += (all.empty() ? "" : "|") + p;
    throw std::invalid_argument("unknown policy '" + name + "' (" + all + ")");
  }
  return *kind;
}

ScenarioSpec load_with_overrides(const CommonOpts& opts) {
  ScenarioSpec spec = load_scenario(opts.scenario_path);
  if (opts.seed_override >= 0) spec.seed = static_cast<std::uint64_t>(opts.seed_override);
  if (opts.replications_override >= 0) spec.replications = opts.replications_override;
  spec.validate();
  return spec;
}

PolicyBinding make_binding(PolicyKind kind, const std::string& agent_path) {
  PolicyBinding binding;
  binding.kind = kind;
  if (kind == PolicyKind::RLHIPA) {
    if (agent_path.empty()) {
      throw std::invalid_argument(
          "policy rl-hipa needs --agent <file> (train one with 'ofsim train')");
    }
    if (!fs::exists(agent_path)) {
      throw std::invalid_argument("agent file not found: " + agent_path);
    }
    binding.agent = std::make_shared<TrainedAgent>(TrainedAgent::load(agent_path));
  }
  return binding;
}

// ── simulate ──

int cmd_simulate(const CommonOpts& opts, const std::string& policy_name,
                 const std::string& agent_path, const std::string& trace_format) {
  const ScenarioSpec spec = load_with_overrides(opts);
  const PolicyBinding binding = make_binding(parse_policy(policy_name), agent_path);
  const ReportFormat fmt = parse_format(opts.format);

  const auto traces = replicate(spec, binding, spec.replications, !opts.no_parallel);
  const MetricsReport report = compute_metrics(traces, spec.duration, policy_name);

  fs::create_directories(opts.out_dir);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (trace_format == "csv" || trace_format == "both") {
      std::ostringstream s;
      write_trace_csv(traces[i], s);
      write_file(fs::path(opts.out_dir) / ("trace_rep" + std::to_string(i) + ".csv"),
                 s.str());
    }
    if (trace_format == "ndjson" || trace_format == "both") {
      std::ostringstream s;
      write_trace_ndjson(traces[i], s);
      write_file(fs::path(opts.out_dir) / ("trace_rep" + std::to_string(i) + ".ndjson"),
                 s.str());
    }
  }
  const fs::path metrics_path =
      fs::path(opts.out_dir) / (std::string("metrics.") + format_ext(fmt));
  write_file(metrics_path, emit(report, fmt));
  std::cout << emit(report, ReportFormat::Markdown);
  std::cout << "\nwrote " << metrics_path.string() << " and " << traces.size()
            << " trace file(s) to " << opts.out_dir << "\n";
  return 0;
}

// ── train ──

int cmd_train(const CommonOpts& opts, const AgentConfig& cfg_in, bool seed_given,
              const std::string& agent_out, const std::string& curve_out) {
  const ScenarioSpec spec = load_scenario(opts.scenario_path);
  AgentConfig cfg = cfg_in;
  if (!seed_given) cfg.seed = spec.seed;
  cfg.validate();

  ScenarioTrainEnv env(spec);
  const TrainResult result = train(env, cfg);

  fs::create_directories(opts.out_dir);
  const fs::path agent_path = agent_out.empty()
                                  ? fs::path(opts.out_dir) / "agent.bin"
                                  : fs::path(agent_out);
  if (agent_path.has_parent_path()) fs::create_directories(agent_path.parent_path());
  result.agent.save(agent_path.string());

  std::ostringstream curve;
  curve << "episode,mean_reward\n";
  for (std::size_t i = 0; i < result.episode_mean_reward.size(); ++i) {
    curve << i << ',' << format_double(result.episode_mean_reward[i]) << '\n';
  }
  const fs::path curve_path = curve_out.empty()
                                  ? fs::path(opts.out_dir) / "learning_curve.csv"
                                  : fs::path(curve_out);
  if (curve_path.has_parent_path()) fs::create_directories(curve_path.parent_path());
  write_file(curve_path, curve.str());

  const double first = result.episode_mean_reward.front();
  const double last = result.episode_mean_reward.back();
  std::cout << "trained " << cfg.episodes << " episodes (seed " << cfg.seed
            << "), mean reward " << format_double(first) << " -> " << format_double(last)
            << "\nwrote " << agent_path.string() << " and " << curve_path.string() << "\n";
  return 0;
}

// ── compare ──

int cmd_compare(const CommonOpts& opts, const std::vector<std::string>& policies,
                const std::string& baseline, const std::string& agent_path) {
  if (policies.empty()) throw std::invalid_argument("--policies must name at least one policy");
  const ScenarioSpec spec = load_with_overrides(opts);
  const ReportFormat fmt = parse_format(opts.format);

  std::vector<MetricsReport> reports;
  fs::create_directories(opts.out_dir);
  for (const std::string& name : policies) {
    const PolicyBinding binding = make_binding(parse_policy(name), agent_path);
    const auto traces = replicate(spec, binding, spec.replications, !opts.no_parallel);
    MetricsReport rep = compute_metrics(traces, spec.duration, name);
    write_file(fs::path(opts.out_dir) / ("metrics_" + name + "." + format_ext(fmt)),
               emit(rep, fmt));
    reports.push_back(std::move(rep));
  }
  const ComparisonTable table = compare(reports, baseline);
  const fs::path cmp_path =
      fs::path(opts.out_dir) / (std::string("comparison.") + format_ext(fmt));
  write_file(cmp_path, emit(table, fmt));
  std::cout << emit(table, ReportFormat::Markdown);
  std::cout << "\nwrote " << cmp_path.string() << "\n";
  return 0;
}

// ── sweep ──

struct GridAxis {
  std::string key;
  std::vector<double> values;
};

void apply_override(ScenarioSpec& spec, const std::string& key, double value) {
  if (key == "task_count") spec.task_count = static_cast<int>(value);
  else if (key == "duration") spec.duration = value;
  else if (key == "seed") spec.seed = static_cast<std::uint64_t>(value);
  else if (key == "replications") spec.replications = static_cast<int>(value);
  else if (key == "device_count") spec.device_count = static_cast<int>(value);
  else if (key == "sensor_count") spec.sensor_count = static_cast<int>(value);
  else if (key == "privacy_probability") spec.mix.privacy_probability = value;
  else if (key == "overload_threshold") spec.overload_threshold = value;
  else if (key == "summarization_factor") spec.summarization_factor = value;
  else throw std::invalid_argument("sweep: unknown grid key '" + key + "'");
}

std::vector<GridAxis> parse_grid(const std::vector<std::string>& grid_args) {
  std::vector<GridAxis> axes;
  for (const std::string& arg : grid_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= arg.size()) {
      throw std::invalid_argument("sweep: grid must look like key=v1,v2,... got '" + arg +
                                  "'");
    }
    GridAxis axis;
    axis.key = arg.substr(0, eq);
    std::string rest = arg.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok =
          rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok.empty()) throw std::invalid_argument("sweep: empty value in '" + arg + "'");
      try {
        axis.values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("sweep: non-numeric value '" + tok + "' in '" + arg +
                                    "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

int cmd_sweep(const CommonOpts& opts, const std::string& policy_name,
              const std::string& agent_path, const std::vector<std::string>& grid_args) {
  const ScenarioSpec base = load_with_overrides(opts);
  const PolicyBinding binding = make_binding(parse_policy(policy_name), agent_path);
  const ReportFormat fmt = parse_format(opts.format);
  const std::vector<GridAxis> axes = parse_grid(grid_args);

  // Validate every key against the base spec before any run.
  for (const GridAxis& axis : axes) {
    ScenarioSpec probe = base;
    apply_override(probe, axis.key, axis.values.at(0));
  }

  std::size_t cells = 1;
  for (const GridAxis& axis : axes) cells *= axis.values.size();

  fs::create_directories(opts.out_dir);
  std::ostringstream index;
  index << "cell";
  for (const GridAxis& axis : axes) index << ',' << axis.key;
  index << ",report\n";

  for (std::size_t cell = 0; cell < cells; ++cell) {
    ScenarioSpec spec = base;
    std::size_t rem = cell;
    std::vector<double> chosen;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      const std::size_t idx = rem % it->values.size();
      rem /= it->values.size();
      chosen.insert(chosen.begin(), it->values[idx]);
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      apply_override(spec, axes[a].key, chosen[a]);
    }
    spec.validate();

    char cell_name[32];
    std::snprintf(cell_name, sizeof cell_name, "cell_%03zu", cell);
    const fs::path cell_dir = fs::path(opts.out_dir) / cell_name;
    fs::create_directories(cell_dir);

    const auto traces = replicate(spec, binding, spec.replications, !opts.no_parallel);
    const MetricsReport rep = compute_metrics(traces, spec.duration, policy_name);
    const fs::path rep_path = cell_dir / (std::string("metrics.") + format_ext(fmt));
    write_file(rep_path, emit(rep, fmt));

    index << cell_name;
    for (double v : chosen) index << ',' << format_double(v);
    index << ',' << rep_path.string() << '\n';
  }
  const fs::path index_path = fs::path(opts.out_dir) / "sweep_index.csv";
  write_file(index_path, index.str());
  std::cout << "swept " << cells << " cell(s); index at " << index_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-layer IoT task-offloading simulator and policy benchmark"};
  app.require_subcommand(1);

  CommonOpts opts;
  opts.out_dir = default_out_dir();

  std::string policy_name, agent_path, trace_format = "csv";
  std::vector<std::string> policies, grid_args;
  std::string baseline = "cloud-only";
  std::string agent_out, curve_out;
  AgentConfig agent_cfg;
  bool train_seed_given = false;
  int train_seed = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
    auto* s = cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file");
    if (needs_scenario) s->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory (env OFSIM_OUTDIR)");
    cmd->add_option("--format", opts.format, "report format: csv|json|markdown")
        ->default_val("json");
    cmd->add_option("--seed", opts.seed_override, "override the scenario seed");
    cmd->add_option("--replications", opts.replications_override,
                    "override the replication count");
    cmd->add_flag("--no-parallel", opts.no_parallel, "run replications sequentially");
  };

  CLI::App* sim_cmd = app.add_subcommand("simulate", "run one policy and report metrics");
  add_common(sim_cmd);
  sim_cmd->add_option("--policy", policy_name, "placement policy")->required();
  sim_cmd->add_option("--agent", agent_path, "trained agent file (rl-hipa)");
  sim_cmd->add_option("--trace-format", trace_format, "csv|ndjson|both")
      ->check(CLI::IsMember({"csv", "ndjson", "both"}))
      ->default_val("csv");

  CLI::App* train_cmd = app.add_subcommand("train", "train the deep-Q agent on a scenario");
  train_cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", opts.out_dir, "output directory (env OFSIM_OUTDIR)");
  train_cmd->add_option("--agent-out", agent_out, "agent file path (default <out>/agent.bin)");
  train_cmd->add_option("--curve", curve_out,
                        "learning-curve CSV path (default <out>/learning_curve.csv)");
  train_cmd->add_option("--episodes", agent_cfg.episodes, "training episodes")
      ->default_val(1000);
  train_cmd->add_option("--tasks-per-episode", agent_cfg.tasks_per_episode,
                        "decisions per episode")
      ->default_val(32);
  train_cmd->add_option("--learning-rate", agent_cfg.learning_rate, "SGD step size")
      ->default_val(1e-3);
  train_cmd->add_option("--batch-size", agent_cfg.batch_size, "replay batch size")
      ->default_val(64);
  train_cmd->add_option("--replay-capacity", agent_cfg.replay_capacity, "replay slots")
      ->default_val(10000);
  train_cmd->add_option("--epsilon-start", agent_cfg.epsilon_start, "initial exploration")
      ->default_val(1.0);
  train_cmd->add_option("--epsilon-end", agent_cfg.epsilon_end, "final exploration")
      ->default_val(0.05);
  train_cmd->add_option("--epsilon-decay-episodes", agent_cfg.epsilon_decay_episodes,
                        "episodes to reach epsilon-end (0 = half of episodes)")
      ->default_val(0);
  train_cmd->add_option("--discount", agent_cfg.discount, "TD discount")->default_val(0.0);
  train_cmd->add_option("--seed", train_seed, "training seed (default: scenario seed)");

  CLI::App* cmp_cmd = app.add_subcommand("compare", "run several policies on common seeds");
  add_common(cmp_cmd);
  cmp_cmd->add_option("--policies", policies, "comma-separated policy list")
      ->required()
      ->delimiter(',');
  cmp_cmd->add_option("--baseline", baseline, "baseline policy for deltas")
      ->default_val("cloud-only");
  cmp_cmd->add_option("--agent", agent_path, "trained agent file (rl-hipa)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "cartesian scenario-override grid");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--policy", policy_name, "placement policy")->required();
  sweep_cmd->add_option("--agent", agent_path, "trained agent file (rl-hipa)");
  sweep_cmd->add_option("--grid", grid_args,
                        "axis as key=v1,v2,... (repeatable); recognized keys: task_count, "
                        "duration, seed, replications, device_count, sensor_count, "
                        "privacy_probability, overload_threshold, summarization_factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (train_cmd->count("--seed") > 0) {
    train_seed_given = true;
    agent_cfg.seed = static_cast<std::uint64_t>(train_seed);
  }

  try {
    if (*sim_cmd) return cmd_simulate(opts, policy_name, agent_path, trace_format);
    if (*train_cmd) return cmd_train(opts, agent_cfg, train_seed_given, agent_out, curve_out);
    if (*cmp_cmd) return cmd_compare(opts, policies, baseline, agent_path);
    if (*sweep_cmd) return cmd_sweep(opts, policy_name, agent_path, grid_args);
    std::cerr << "error: no command\n";
    return 1;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TrainingDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
