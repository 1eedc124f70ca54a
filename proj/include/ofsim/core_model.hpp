#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace ofsim {

// ─── Layers ──────────────────────────────────────────────────────────────────

// Total order Edge < Fog < Cloud encodes distance from the data source.
enum class Layer : int { Edge = 0, Fog = 1, Cloud = 2 };

inline constexpr std::array<Layer, 3> kAllLayers{Layer::Edge, Layer::Fog, Layer::Cloud};

constexpr int layer_index(Layer l) { return static_cast<int>(l); }
const char* to_string(Layer l);
std::optional<Layer> layer_from_string(const std::string& name);

// Workload label assigned by the generator; policies never read it.
enum class TaskCategory : int { Realtime = 0, Aggregation = 1, Analytics = 2 };

const char* to_string(TaskCategory c);
std::optional<TaskCategory> category_from_string(const std::string& name);

// ─── Domain types ────────────────────────────────────────────────────────────

// One unit of work. Construction validates the field ranges; downstream code
// may assume latency_req, complexity and data_size are strictly positive.
struct Task {
  Task(std::uint64_t id, double arrival_time, double latency_req, double complexity,
       double data_size, int privacy, TaskCategory category = TaskCategory::Realtime);

  std::uint64_t id;
  double arrival_time;  // seconds from simulation start
  double latency_req;   // seconds, maximum acceptable latency
  double complexity;    // floating-point operation count
  double data_size;     // megabytes
  int privacy;          // 1 = sensitive, 0 = not
  TaskCategory category;
};

// The (latency, complexity, privacy) triple the orchestrator reasons over.
struct FeatureVector {
  double l;  // seconds
  double c;  // FLOPs
  int p;     // {0, 1}
};

// Physical model of one layer.
struct LayerSpec {
  Layer layer = Layer::Edge;
  double proc_speed = 0.0;  // FLOP/s of one node
  double capacity = 0.0;    // FLOP/s aggregate across the layer
  double p_proc = 0.0;      // watts while computing
  double p_comm = 0.0;      // watts while transmitting
  double accuracy = 0.0;    // model accuracy on this layer, [0, 1]
  // Constant per-task overhead in seconds: inference setup on Edge, federated
  // aggregation on Fog, none on Cloud. When unset, Fog derives it as
  // node_count * per_device_update_time; other layers default to 0.
  std::optional<double> fixed_overhead;
  int node_count = 1;
  double per_device_update_time = 0.0;  // seconds, Fog only
  double base_rtt = 0.0;                // seconds; must be 0 on Edge
  double bandwidth = 0.0;               // megabits/second toward this layer
  double reliability = 1.0;             // per-node weight for result aggregation

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Resolved constant overhead (seconds).
  double overhead() const;
};

// Weights for the placement utility and for the RL reward.
struct WeightConfig {
  std::array<double, 3> utility{0.4, 0.3, 0.3};  // (w_L, w_C, w_P), sums to 1
  std::array<double, 3> reward{0.4, 0.3, 0.3};   // (w1, w2, w3), sums to 1
  // Optional additive reward term for keeping sensitive tasks near the source;
  // 0 disables the extension and leaves the reward in its plain three-term form.
  double reward_privacy_bonus = 0.3;

  void validate() const;
};

struct EncryptionParams {
  double alpha = 0.01;  // seconds per megabyte
  double beta = 0.005;  // fixed setup seconds

  void validate() const;
};

struct ThresholdConfig {
  double low_latency = 0.1;          // seconds
  double moderate_complexity = 1e6;  // FLOPs

  void validate() const;
};

// ─── Cost-model operations ───────────────────────────────────────────────────
// All pure functions of their inputs; callers may invoke them concurrently.

// Projects the decision-relevant fields out of a task.
FeatureVector analyze_task(const Task& task);

// Computation time on a layer: complexity / proc_speed + constant overhead.
double proc_time(const Task& task, const LayerSpec& spec);

// Link time toward a layer: 0 on Edge, otherwise base RTT plus serialization
// delay of data_size megabytes over a bandwidth in megabits/second.
double comm_time(const Task& task, const LayerSpec& spec);

// End-to-end predicted latency: proc_time + comm_time.
double predicted_latency(const Task& task, const LayerSpec& spec);

// 1 on Edge and 0.5 on Fog for sensitive tasks; 0 on Cloud or for P = 0.
double privacy_score(const Task& task, Layer layer);

// Placement score: w_L / latency + w_C * capacity / complexity + w_P * privacy.
double utility(const Task& task, const LayerSpec& spec, const WeightConfig& w);

// Argmax of utility over the three layers, ties toward the data source.
Layer select_layer(const Task& task, const std::array<LayerSpec, 3>& specs,
                   const WeightConfig& w);

// Encryption overhead: alpha * data_size + beta for sensitive tasks, else 0.
double enc_time(const Task& task, const EncryptionParams& ep);

// predicted_latency plus encryption overhead.
double total_time(const Task& task, const LayerSpec& spec, const EncryptionParams& ep);

// Joules spent computing and transmitting one task.
double energy(const Task& task, const LayerSpec& spec);

// Scalar feedback for one placement: w1 / latency + w2 / energy + w3 * accuracy,
// plus reward_privacy_bonus * privacy_score when the extension weight is set.
// Throws std::domain_error when the layer spec yields zero energy
// (misconfigured power model).
double reward(const Task& task, const LayerSpec& spec, const WeightConfig& w);

// Reliability-weighted combination of per-node results. Throws
// std::invalid_argument on an empty or mismatched node set, or on a
// non-positive reliability.
double aggregate_results(std::span<const double> values,
                         std::span<const double> reliabilities);

// Index of the largest score; ties resolve toward the lower index (Edge first).
Layer argmax_layer(const std::array<double, 3>& scores);

}  // namespace ofsim
