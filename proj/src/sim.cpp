#include "ofsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "ofsim/format.hpp"

namespace ofsim {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

// [lo, hi) of one band given the overall generation range.
std::pair<double, double> band_range(int band, double range_min, double range_max,
                                     double edge_low, double edge_high) {
  switch (band) {
    case 0: return {range_min, std::min(edge_low, range_max)};
    case 1: return {std::max(edge_low, range_min), std::min(edge_high, range_max)};
    default: return {std::max(edge_high, range_min), range_max};
  }
}

void validate_banded(const std::array<double, 3>& proportions, double range_min,
                     double range_max, double edge_low, double edge_high,
                     const std::string& what) {
  double sum = 0.0;
  for (double p : proportions) {
    require(std::isfinite(p) && p >= 0.0, "mix." + what + " proportions must be >= 0");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "mix." + what + " proportions must sum to 1");
  require(std::isfinite(range_min) && std::isfinite(range_max) && range_min > 0.0 &&
              range_max > range_min,
          "mix." + what + " range must satisfy 0 < min < max");
  for (int b = 0; b < 3; ++b) {
    if (proportions[b] <= 0.0) continue;
    const auto [lo, hi] = band_range(b, range_min, range_max, edge_low, edge_high);
    require(lo < hi, "mix." + what + " range does not cover band " + std::to_string(b));
  }
}

struct TaskAttrs {
  double latency_req;
  double complexity;
  double data_size;
  int privacy;
  TaskCategory category;
};

// Draw order is frozen: latency band, latency, complexity band, complexity,
// data size, privacy. Changing it changes every seeded workload.
TaskAttrs sample_attrs(const TaskMix& mix, Rng& rng) {
  TaskAttrs a{};
  const int lat_band = rng.categorical(mix.latency_proportions);
  {
    const auto [lo, hi] = band_range(lat_band, mix.latency_min, mix.latency_max,
                                     kLatencyBandLow, kLatencyBandHigh);
    a.latency_req = rng.uniform(lo, hi);
  }
  const int comp_band = rng.categorical(mix.complexity_proportions);
  {
    const auto [lo, hi] = band_range(comp_band, mix.complexity_min, mix.complexity_max,
                                     kComplexityBandLow, kComplexityBandHigh);
    a.complexity = rng.uniform(lo, hi);
  }
  a.data_size = rng.uniform(mix.data_size_min, mix.data_size_max);
  a.privacy = rng.bernoulli(mix.privacy_probability) ? 1 : 0;
  a.category = static_cast<TaskCategory>(lat_band);
  return a;
}

const char* bool_field(bool b) { return b ? "1" : "0"; }

}  // namespace

// ─── Configuration validation ────────────────────────────────────────────────

void TaskMix::validate() const {
  validate_banded(latency_proportions, latency_min, latency_max, kLatencyBandLow,
                  kLatencyBandHigh, "latency");
  validate_banded(complexity_proportions, complexity_min, complexity_max,
                  kComplexityBandLow, kComplexityBandHigh, "complexity");
  require(std::isfinite(data_size_min) && std::isfinite(data_size_max) &&
              data_size_min > 0.0 && data_size_max > data_size_min,
          "mix.data_size range must satisfy 0 < min < max");
  require(privacy_probability >= 0.0 && privacy_probability <= 1.0,
          "mix.privacy_probability must be in [0, 1]");
}

NormBounds TaskMix::norm_bounds() const {
  NormBounds n;
  n.latency_min = latency_min;
  n.latency_max = latency_max;
  n.complexity_min = complexity_min;
  n.complexity_max = complexity_max;
  n.data_size_min = data_size_min;
  n.data_size_max = data_size_max;
  return n;
}

void NetworkRanges::validate() const {
  auto check = [](const std::optional<std::array<double, 2>>& r, const char* what) {
    if (!r) return;
    if (!(std::isfinite((*r)[0]) && std::isfinite((*r)[1]) && (*r)[0] >= 0.0 &&
          (*r)[1] >= (*r)[0])) {
      throw std::invalid_argument(std::string("network.") + what +
                                  " range must satisfy 0 <= lo <= hi");
    }
  };
  check(fog_rtt, "fog_rtt");
  check(cloud_rtt, "cloud_rtt");
  check(fog_bandwidth, "fog_bandwidth");
  check(cloud_bandwidth, "cloud_bandwidth");
  if (fog_bandwidth) require((*fog_bandwidth)[0] > 0.0, "network.fog_bandwidth must be > 0");
  if (cloud_bandwidth) {
    require((*cloud_bandwidth)[0] > 0.0, "network.cloud_bandwidth must be > 0");
  }
}

void ScenarioSpec::validate() const {
  require(std::isfinite(duration) && duration > 0.0, "scenario.duration must be > 0");
  require(task_count >= 1, "scenario.task_count must be >= 1");
  require(device_count >= 1, "scenario.device_count must be >= 1");
  require(sensor_count >= 0, "scenario.sensor_count must be >= 0");
  require(replications >= 1, "scenario.replications must be >= 1");
  mix.validate();
  for (Layer l : kAllLayers) {
    const LayerSpec& spec = layers[layer_index(l)];
    require(spec.layer == l, "scenario.layers must be ordered edge, fog, cloud");
    spec.validate();
    // The realized reward divides by energy, so a zero-power layer is a
    // configuration error.
    require(spec.p_proc > 0.0, std::string("scenario.layers.") + to_string(l) +
                                   ".p_proc must be > 0 (reward needs positive energy)");
    require(queue_capacity[layer_index(l)] >= 1, "scenario.queue_capacity must be >= 1");
  }
  network.validate();
  thresholds.validate();
  weights.validate();
  encryption.validate();
  require(fog_centric_high_complexity > 0.0,
          "scenario.fog_centric_high_complexity must be > 0");
  require(overload_threshold > 0.0 && overload_threshold <= 1.0,
          "scenario.overload_threshold must be in (0, 1]");
  require(summarization_factor >= 0.0 && summarization_factor <= 1.0,
          "scenario.summarization_factor must be in [0, 1]");
  require(battery_capacity_j > 0.0, "scenario.battery_capacity_j must be > 0");
}

// ─── Node pools ──────────────────────────────────────────────────────────────

void NodePool::expire(double now) {
  for (PoolNode& node : nodes) {
    while (!node.queue.empty() && node.queue.front().second <= now) {
      node.queue.pop_front();
    }
  }
}

int NodePool::pending() const {
  int n = 0;
  for (const PoolNode& node : nodes) n += static_cast<int>(node.queue.size());
  return n;
}

int NodePool::total_slots() const {
  return static_cast<int>(nodes.size()) * queue_capacity;
}

bool NodePool::full() const {
  for (const PoolNode& node : nodes) {
    if (static_cast<int>(node.queue.size()) < queue_capacity) return false;
  }
  return true;
}

int NodePool::least_loaded_node() const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
    const auto load = [&](int idx) {
      return std::make_pair(nodes[idx].queue.size(), nodes[idx].busy_until);
    };
    if (load(i) < load(best)) best = i;
  }
  return best;
}

SystemState build_system_state(const std::array<NodePool, 3>& pools, double now) {
  SystemState state;
  for (int i = 0; i < 3; ++i) {
    const NodePool& pool = pools[i];
    int pending = 0;
    for (const PoolNode& node : pool.nodes) {
      for (const auto& [id, completion] : node.queue) {
        if (completion > now) ++pending;
      }
    }
    const int slots = pool.total_slots();
    state.queue_utilization[i] =
        slots > 0 ? std::min(1.0, static_cast<double>(pending) / slots) : 0.0;
    state.network_rtt[i] = pool.spec.base_rtt;
  }
  const NodePool& edge = pools[layer_index(Layer::Edge)];
  state.battery.reserve(edge.nodes.size());
  for (const PoolNode& node : edge.nodes) state.battery.push_back(node.battery);
  return state;
}

// ─── Workload generation ─────────────────────────────────────────────────────

std::vector<Task> generate_workload(const ScenarioSpec& spec, Rng& rng) {
  spec.validate();
  // A homogeneous Poisson process conditioned on its count is the order
  // statistics of uniform draws.
  std::vector<double> arrivals(static_cast<std::size_t>(spec.task_count));
  for (double& t : arrivals) t = rng.uniform(0.0, spec.duration);
  std::sort(arrivals.begin(), arrivals.end());

  std::vector<Task> tasks;
  tasks.reserve(arrivals.size());
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const TaskAttrs a = sample_attrs(spec.mix, rng);
    tasks.emplace_back(static_cast<std::uint64_t>(i + 1), arrivals[i], a.latency_req,
                       a.complexity, a.data_size, a.privacy, a.category);
  }
  return tasks;
}

// ─── Engine ──────────────────────────────────────────────────────────────────

std::array<LayerSpec, 3> effective_specs(const ScenarioSpec& spec, Rng& rng) {
  std::array<LayerSpec, 3> specs = spec.layers;
  LayerSpec& fog = specs[layer_index(Layer::Fog)];
  LayerSpec& cloud = specs[layer_index(Layer::Cloud)];
  // Fixed draw order; each range consumes exactly one draw when present.
  if (spec.network.fog_rtt) {
    fog.base_rtt = rng.uniform((*spec.network.fog_rtt)[0], (*spec.network.fog_rtt)[1]);
  }
  if (spec.network.cloud_rtt) {
    cloud.base_rtt =
        rng.uniform((*spec.network.cloud_rtt)[0], (*spec.network.cloud_rtt)[1]);
  }
  if (spec.network.fog_bandwidth) {
    fog.bandwidth =
        rng.uniform((*spec.network.fog_bandwidth)[0], (*spec.network.fog_bandwidth)[1]);
  }
  if (spec.network.cloud_bandwidth) {
    cloud.bandwidth = rng.uniform((*spec.network.cloud_bandwidth)[0],
                                  (*spec.network.cloud_bandwidth)[1]);
  }
  return specs;
}

std::vector<TraceEvent> run(const ScenarioSpec& spec, const PolicyBinding& policy) {
  spec.validate();
  Rng rng(spec.seed);
  const std::array<LayerSpec, 3> specs = effective_specs(spec, rng);
  const std::vector<Task> tasks = generate_workload(spec, rng);

  OrchestratorConfig ocfg;
  ocfg.kind = policy.kind;
  ocfg.specs = specs;
  ocfg.weights = spec.weights;
  ocfg.thresholds = spec.thresholds;
  ocfg.fog_centric_high_complexity = spec.fog_centric_high_complexity;
  ocfg.overload_threshold = spec.overload_threshold;
  ocfg.agent = policy.agent;
  const Orchestrator orch(std::move(ocfg));

  std::array<NodePool, 3> pools;
  for (Layer l : kAllLayers) {
    NodePool& pool = pools[layer_index(l)];
    pool.layer = l;
    pool.spec = specs[layer_index(l)];
    pool.queue_capacity = spec.queue_capacity[layer_index(l)];
    pool.nodes.assign(static_cast<std::size_t>(pool.spec.node_count), PoolNode{});
  }

  std::vector<TraceEvent> events;
  events.reserve(tasks.size());

  for (const Task& task : tasks) {
    const double now = task.arrival_time;
    for (NodePool& pool : pools) pool.expire(now);
    const SystemState state = build_system_state(pools, now);

    Decision decision = orch.decide(task, state);
    decision = orch.reroute_on_overload(task, decision, state);

    Layer layer = decision.layer;
    bool rerouted = decision.rerouted;
    // A full pool escalates outward; Cloud only rejects when drops are on.
    while (layer != Layer::Cloud && pools[layer_index(layer)].full()) {
      layer = static_cast<Layer>(layer_index(layer) + 1);
      rerouted = true;
    }

    TraceEvent ev;
    ev.task_id = task.id;
    ev.arrival_time = task.arrival_time;
    ev.latency_req = task.latency_req;
    ev.complexity = task.complexity;
    ev.data_size = task.data_size;
    ev.privacy = task.privacy;
    ev.category = task.category;
    ev.layer = layer;
    ev.rerouted = rerouted;

    if (layer == Layer::Cloud && spec.allow_drop &&
        pools[layer_index(Layer::Cloud)].full()) {
      ev.dropped = true;
      events.push_back(ev);
      continue;
    }

    NodePool& pool = pools[layer_index(layer)];
    const int node_index = pool.least_loaded_node();
    PoolNode& node = pool.nodes[static_cast<std::size_t>(node_index)];
    const LayerSpec& lspec = pool.spec;

    const double wait = std::max(0.0, node.busy_until - now);
    const double pt = proc_time(task, lspec);
    const double ct = comm_time(task, lspec);
    const double et = enc_time(task, spec.encryption);
    node.busy_until = now + wait + pt;
    node.queue.emplace_back(task.id, node.busy_until);

    ev.node_index = node_index;
    ev.queue_wait = wait;
    ev.proc_time = pt;
    ev.comm_time = ct;
    ev.enc_time = et;
    ev.total_latency = wait + pt + ct + et;
    ev.energy_j = energy(task, lspec);
    ev.reward = reward(task, lspec, spec.weights);
    if (layer == Layer::Fog) {
      ev.mb_to_fog = task.data_size;
    } else if (layer == Layer::Cloud) {
      ev.mb_to_fog = task.data_size;
      const double keep = task.category == TaskCategory::Aggregation
                              ? 1.0 - spec.summarization_factor
                              : 1.0;
      ev.mb_to_cloud = task.data_size * keep;
    }
    if (layer == Layer::Edge) {
      node.battery = std::max(0.0, node.battery - ev.energy_j / spec.battery_capacity_j);
    }
    events.push_back(ev);
  }
  return events;
}

std::vector<std::vector<TraceEvent>> replicate(const ScenarioSpec& spec,
                                               const PolicyBinding& policy,
                                               int replications, bool parallel) {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  std::vector<std::vector<TraceEvent>> traces(static_cast<std::size_t>(replications));
  auto run_one = [&spec, &policy, &traces](int i) {
    ScenarioSpec derived = spec;
    derived.seed = spec.seed + static_cast<std::uint64_t>(i);
    traces[static_cast<std::size_t>(i)] = run(derived, policy);
  };
  if (parallel && replications > 1) {
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(replications));
    for (int i = 0; i < replications; ++i) {
      futures.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& f : futures) f.get();
  } else {
    for (int i = 0; i < replications; ++i) run_one(i);
  }
  return traces;
}

// ─── Trace export ────────────────────────────────────────────────────────────

std::string trace_csv_header() {
  return "task_id,arrival_time,latency_req,complexity,data_size,privacy,category,"
         "layer,node_index,rerouted,dropped,queue_wait,proc_time,comm_time,enc_time,"
         "total_latency,energy_j,reward,mb_to_fog,mb_to_cloud";
}

void write_trace_csv(const std::vector<TraceEvent>& events, std::ostream& out) {
  out << trace_csv_header() << '\n';
  for (const TraceEvent& e : events) {
    out << e.task_id << ',' << format_double(e.arrival_time) << ','
        << format_double(e.latency_req) << ',' << format_double(e.complexity) << ','
        << format_double(e.data_size) << ',' << e.privacy << ',' << to_string(e.category)
        << ',' << to_string(e.layer) << ',' << e.node_index << ',' << bool_field(e.rerouted)
        << ',' << bool_field(e.dropped) << ',' << format_double(e.queue_wait) << ','
        << format_double(e.proc_time) << ',' << format_double(e.comm_time) << ','
        << format_double(e.enc_time) << ',' << format_double(e.total_latency) << ','
        << format_double(e.energy_j) << ',' << format_double(e.reward) << ','
        << format_double(e.mb_to_fog) << ',' << format_double(e.mb_to_cloud) << '\n';
  }
}

void write_trace_ndjson(const std::vector<TraceEvent>& events, std::ostream& out) {
  for (const TraceEvent& e : events) {
    out << "{\"task_id\":" << e.task_id
        << ",\"arrival_time\":" << format_double(e.arrival_time)
        << ",\"latency_req\":" << format_double(e.latency_req)
        << ",\"complexity\":" << format_double(e.complexity)
        << ",\"data_size\":" << format_double(e.data_size) << ",\"privacy\":" << e.privacy
        << ",\"category\":\"" << to_string(e.category) << "\",\"layer\":\""
        << to_string(e.layer) << "\",\"node_index\":" << e.node_index
        << ",\"rerouted\":" << (e.rerouted ? "true" : "false")
        << ",\"dropped\":" << (e.dropped ? "true" : "false")
        << ",\"queue_wait\":" << format_double(e.queue_wait)
        << ",\"proc_time\":" << format_double(e.proc_time)
        << ",\"comm_time\":" << format_double(e.comm_time)
        << ",\"enc_time\":" << format_double(e.enc_time)
        << ",\"total_latency\":" << format_double(e.total_latency)
        << ",\"energy_j\":" << format_double(e.energy_j)
        << ",\"reward\":" << format_double(e.reward)
        << ",\"mb_to_fog\":" << format_double(e.mb_to_fog)
        << ",\"mb_to_cloud\":" << format_double(e.mb_to_cloud) << "}\n";
  }
}

// ─── Training environment ────────────────────────────────────────────────────

ScenarioTrainEnv::ScenarioTrainEnv(const ScenarioSpec& spec) : spec_(spec) {
  spec_.validate();
  norms_ = spec_.mix.norm_bounds();
}

Task ScenarioTrainEnv::sample_task(Rng& rng) {
  const TaskAttrs a = sample_attrs(spec_.mix, rng);
  return Task(next_id_++, 0.0, a.latency_req, a.complexity, a.data_size, a.privacy,
              a.category);
}

std::array<double, 3> ScenarioTrainEnv::sample_queue_state(Rng& rng) {
  // Uniform utilizations keep the whole encoder input range in distribution.
  return {rng.uniform01(), rng.uniform01(), rng.uniform01()};
}

double ScenarioTrainEnv::realized_reward(const Task& task, Layer layer) const {
  return reward(task, spec_.layers[layer_index(layer)], spec_.weights);
}

}  // namespace ofsim
