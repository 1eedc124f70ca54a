#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ofsim/core_model.hpp"
#include "ofsim/policy.hpp"
#include "ofsim/rl.hpp"
#include "ofsim/rng.hpp"

namespace ofsim {

// ─── Scenario configuration ──────────────────────────────────────────────────

// Fixed band edges tasks are categorized by: latency < 10 ms is "low" and
// > 100 ms "high"; complexity < 1e6 FLOPs is "low" and > 1e8 "high".
inline constexpr double kLatencyBandLow = 0.010;    // seconds
inline constexpr double kLatencyBandHigh = 0.100;   // seconds
inline constexpr double kComplexityBandLow = 1e6;   // FLOPs
inline constexpr double kComplexityBandHigh = 1e8;  // FLOPs

// Per-dimension proportions over the three bands plus the generation ranges.
struct TaskMix {
  std::array<double, 3> latency_proportions{0.30, 0.20, 0.50};
  std::array<double, 3> complexity_proportions{0.70, 0.20, 0.10};
  double latency_min = 1e-3, latency_max = 1.0;       // seconds
  double complexity_min = 1e4, complexity_max = 1e9;  // FLOPs
  double data_size_min = 1e-3, data_size_max = 0.1;   // megabytes
  double privacy_probability = 0.3;

  void validate() const;
  NormBounds norm_bounds() const;
};

// Optional per-replication link variation: when a range is set, each run draws
// its own constant from it (seeded) and overrides the layer spec.
struct NetworkRanges {
  std::optional<std::array<double, 2>> fog_rtt;          // seconds
  std::optional<std::array<double, 2>> cloud_rtt;        // seconds
  std::optional<std::array<double, 2>> fog_bandwidth;    // Mbit/s
  std::optional<std::array<double, 2>> cloud_bandwidth;  // Mbit/s

  void validate() const;
};

struct ScenarioSpec {
  double duration = 3600.0;  // virtual seconds
  int task_count = 1000;
  int device_count = 500;
  int sensor_count = 300;
  std::uint64_t seed = 42;
  int replications = 10;

  TaskMix mix;
  std::array<LayerSpec, 3> layers{};                 // ordered edge, fog, cloud
  std::array<int, 3> queue_capacity{8, 16, 64};      // slots per node, per layer
  NetworkRanges network;
  ThresholdConfig thresholds;
  WeightConfig weights;
  EncryptionParams encryption;
  double fog_centric_high_complexity = 1e8;  // FLOPs
  double overload_threshold = 0.9;           // queue utilization
  // Fraction of an aggregation task's payload the fog tier strips before the
  // fog-to-cloud hop.
  double summarization_factor = 0.4;
  bool allow_drop = false;          // when true, a full cloud queue drops tasks
  double battery_capacity_j = 500.0;  // per edge device

  void validate() const;
};

// ─── Trace ───────────────────────────────────────────────────────────────────

// One record per generated task. total_latency is stored as the exact sum of
// its four components.
struct TraceEvent {
  std::uint64_t task_id = 0;
  double arrival_time = 0.0;
  double latency_req = 0.0;
  double complexity = 0.0;
  double data_size = 0.0;
  int privacy = 0;
  TaskCategory category = TaskCategory::Realtime;

  Layer layer = Layer::Edge;
  int node_index = -1;
  bool rerouted = false;
  bool dropped = false;

  double queue_wait = 0.0;
  double proc_time = 0.0;
  double comm_time = 0.0;
  double enc_time = 0.0;
  double total_latency = 0.0;
  double energy_j = 0.0;
  double reward = 0.0;
  double mb_to_fog = 0.0;    // megabytes on the device-to-fog hop
  double mb_to_cloud = 0.0;  // megabytes on the fog-to-cloud hop
};

// ─── Node pools ──────────────────────────────────────────────────────────────

struct PoolNode {
  double busy_until = 0.0;
  // Completion times of queued-or-running tasks, FIFO order.
  std::deque<std::pair<std::uint64_t, double>> queue;
  double battery = 1.0;  // tracked for edge devices only
};

struct NodePool {
  Layer layer = Layer::Edge;
  LayerSpec spec;
  int queue_capacity = 16;  // slots per node
  std::vector<PoolNode> nodes;

  void expire(double now);  // releases entries finished by `now`
  int pending() const;
  int total_slots() const;
  bool full() const;  // every node at capacity
  int least_loaded_node() const;
};

// Utilization and RTT snapshot for the orchestrator.
SystemState build_system_state(const std::array<NodePool, 3>& pools, double now);

// ─── Workload and engine ─────────────────────────────────────────────────────

// Exactly spec.task_count tasks with Poisson arrivals over [0, duration) and
// banded attributes drawn per the mix. Deterministic given the rng state.
std::vector<Task> generate_workload(const ScenarioSpec& spec, Rng& rng);

struct PolicyBinding {
  PolicyKind kind = PolicyKind::ThresholdHIPA;
  std::shared_ptr<const TrainedAgent> agent;  // required for rl-hipa
};

// Single deterministic run: draws link constants, generates the workload,
// and pushes every task through decide -> reroute -> enqueue -> cost model.
std::vector<TraceEvent> run(const ScenarioSpec& spec, const PolicyBinding& policy);

// Independent runs with seeds spec.seed + i, assembled by run index.
std::vector<std::vector<TraceEvent>> replicate(const ScenarioSpec& spec,
                                               const PolicyBinding& policy,
                                               int replications, bool parallel = true);

// Effective layer specs for one run after applying seeded network draws.
std::array<LayerSpec, 3> effective_specs(const ScenarioSpec& spec, Rng& rng);

// ─── Trace export ────────────────────────────────────────────────────────────

std::string trace_csv_header();
void write_trace_csv(const std::vector<TraceEvent>& events, std::ostream& out);
void write_trace_ndjson(const std::vector<TraceEvent>& events, std::ostream& out);

// ─── Training environment ────────────────────────────────────────────────────

// Bandit environment over a scenario: tasks drawn from the scenario mix,
// queue state drawn uniformly so the encoder sees its whole input range, and
// rewards realized against the configured layer specs.
class ScenarioTrainEnv final : public TrainEnv {
 public:
  explicit ScenarioTrainEnv(const ScenarioSpec& spec);

  Task sample_task(Rng& rng) override;
  std::array<double, 3> sample_queue_state(Rng& rng) override;
  double realized_reward(const Task& task, Layer layer) const override;
  const NormBounds& norms() const override { return norms_; }

 private:
  ScenarioSpec spec_;
  NormBounds norms_;
  std::uint64_t next_id_ = 1;
};

}  // namespace ofsim
