#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ofsim/core_model.hpp"
#include "ofsim/rl.hpp"

namespace ofsim {

// ─── Observed state ──────────────────────────────────────────────────────────

// Snapshot the orchestrator sees before each placement.
struct SystemState {
  std::array<double, 3> queue_utilization{0.0, 0.0, 0.0};  // per layer, [0, 1]
  std::array<double, 3> network_rtt{0.0, 0.0, 0.0};        // per layer, seconds
  std::vector<double> battery;                             // per edge device, [0, 1]
};

// ─── Decisions ───────────────────────────────────────────────────────────────

struct Decision {
  std::uint64_t task_id = 0;
  Layer layer = Layer::Edge;
  bool rerouted = false;
  double predicted_latency = 0.0;               // seconds, for the chosen layer
  std::optional<double> utility;                // greedy-utility policy only
  std::optional<std::array<double, 3>> q_values;  // RL policy only
};

enum class PolicyKind {
  ThresholdHIPA,
  GreedyUtility,
  RLHIPA,
  CloudOnly,
  StaticOrchestration,
  FogCentric,
};

const char* to_string(PolicyKind kind);
std::optional<PolicyKind> policy_from_string(const std::string& name);
std::vector<std::string> policy_names();

// ─── Pure placement rules ────────────────────────────────────────────────────

// Branch rule: Edge when the latency requirement is under the low-latency
// threshold, else Fog when complexity is under the moderate threshold, else
// Cloud.
Layer threshold_layer(const Task& task, const ThresholdConfig& tc);

// Fixed latency bands: < 10 ms Edge, 10-100 ms Fog, > 100 ms Cloud.
Layer static_layer(const Task& task);

// Fog for everything except very compute-heavy tasks, which go to Cloud.
// Never Edge.
Layer fog_centric_layer(const Task& task, double high_complexity);

// Moves an overloaded placement outward (toward Cloud) to the first layer at
// or under the utilization threshold; Cloud is the final sink and never
// reroutes. Returns the final layer and whether it moved.
std::pair<Layer, bool> reroute_layer(Layer chosen, const SystemState& state,
                                     double threshold);

// ─── Orchestrator ────────────────────────────────────────────────────────────

struct OrchestratorConfig {
  PolicyKind kind = PolicyKind::ThresholdHIPA;
  std::array<LayerSpec, 3> specs{};
  WeightConfig weights{};
  ThresholdConfig thresholds{};
  double fog_centric_high_complexity = 1e8;  // FLOPs
  double overload_threshold = 0.9;           // queue utilization in (0, 1]
  std::shared_ptr<const TrainedAgent> agent;  // required for RLHIPA
};

// One policy bound to its configuration. Decision methods are const and safe
// to call concurrently across tasks.
class Orchestrator {
 public:
  // Throws std::invalid_argument when the configuration is incomplete, e.g.
  // an RL policy without a trained agent.
  explicit Orchestrator(OrchestratorConfig cfg);

  PolicyKind kind() const { return cfg_.kind; }
  const OrchestratorConfig& config() const { return cfg_; }

  // Dispatches to the bound policy.
  Decision decide(const Task& task, const SystemState& state) const;

  // Applies the overload rule to an existing decision, recomputing the
  // predicted latency when the task moves.
  Decision reroute_on_overload(const Task& task, const Decision& decision,
                               const SystemState& state) const;

  // Individual rules, exposed for direct evaluation.
  Decision decide_threshold(const Task& task) const;
  Decision decide_static(const Task& task) const;
  Decision decide_fog_centric(const Task& task) const;
  Decision decide_cloud_only(const Task& task) const;
  Decision decide_greedy(const Task& task) const;
  Decision decide_rl(const Task& task, const SystemState& state) const;

 private:
  Decision finish(const Task& task, Layer layer) const;

  OrchestratorConfig cfg_;
};

}  // namespace ofsim
