#include "ofsim/policy.hpp"

#include <stdexcept>
#include <utility>

namespace ofsim {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ThresholdHIPA: return "threshold-hipa";
    case PolicyKind::GreedyUtility: return "greedy-utility";
    case PolicyKind::RLHIPA: return "rl-hipa";
    case PolicyKind::CloudOnly: return "cloud-only";
    case PolicyKind::StaticOrchestration: return "static";
    case PolicyKind::FogCentric: return "fog-centric";
  }
  return "?";
}

std::optional<PolicyKind> policy_from_string(const std::string& name) {
  for (PolicyKind k : {PolicyKind::ThresholdHIPA, PolicyKind::GreedyUtility,
                       PolicyKind::RLHIPA, PolicyKind::CloudOnly,
                       PolicyKind::StaticOrchestration, PolicyKind::FogCentric}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::vector<std::string> policy_names() {
  return {"threshold-hipa", "greedy-utility", "rl-hipa",
          "cloud-only",     "static",         "fog-centric"};
}

Layer threshold_layer(const Task& task, const ThresholdConfig& tc) {
  const FeatureVector v = analyze_task(task);
  if (v.l < tc.low_latency) return Layer::Edge;
  if (v.c < tc.moderate_complexity) return Layer::Fog;
  return Layer::Cloud;
}

Layer static_layer(const Task& task) {
  if (task.latency_req < 0.010) return Layer::Edge;
  if (task.latency_req <= 0.100) return Layer::Fog;
  return Layer::Cloud;
}

Layer fog_centric_layer(const Task& task, double high_complexity) {
  return task.complexity > high_complexity ? Layer::Cloud : Layer::Fog;
}

std::pair<Layer, bool> reroute_layer(Layer chosen, const SystemState& state,
                                     double threshold) {
  if (state.queue_utilization[layer_index(chosen)] <= threshold) return {chosen, false};
  // Walk outward; Cloud absorbs everything regardless of its utilization.
  for (int i = layer_index(chosen) + 1; i < 3; ++i) {
    if (i == layer_index(Layer::Cloud) || state.queue_utilization[i] <= threshold) {
      return {static_cast<Layer>(i), true};
    }
  }
  return {chosen, false};  // chosen == Cloud: the sink never reroutes
}

Orchestrator::Orchestrator(OrchestratorConfig cfg) : cfg_(std::move(cfg)) {
  for (Layer l : kAllLayers) {
    const LayerSpec& spec = cfg_.specs[layer_index(l)];
    if (spec.layer != l) {
      throw std::invalid_argument("orchestrator: specs must be ordered edge, fog, cloud");
    }
    spec.validate();
  }
  cfg_.weights.validate();
  cfg_.thresholds.validate();
  if (!(cfg_.fog_centric_high_complexity > 0.0)) {
    throw std::invalid_argument("orchestrator: fog_centric_high_complexity must be > 0");
  }
  if (!(cfg_.overload_threshold > 0.0 && cfg_.overload_threshold <= 1.0)) {
    throw std::invalid_argument("orchestrator: overload_threshold must be in (0, 1]");
  }
  if (cfg_.kind == PolicyKind::RLHIPA && !cfg_.agent) {
    throw std::invalid_argument(
        "orchestrator: rl-hipa requires a trained agent (missing training artifact)");
  }
}

Decision Orchestrator::finish(const Task& task, Layer layer) const {
  Decision d;
  d.task_id = task.id;
  d.layer = layer;
  d.predicted_latency = predicted_latency(task, cfg_.specs[layer_index(layer)]);
  return d;
}

Decision Orchestrator::decide_threshold(const Task& task) const {
  return finish(task, threshold_layer(task, cfg_.thresholds));
}

Decision Orchestrator::decide_static(const Task& task) const {
  return finish(task, static_layer(task));
}

Decision Orchestrator::decide_fog_centric(const Task& task) const {
  return finish(task, fog_centric_layer(task, cfg_.fog_centric_high_complexity));
}

Decision Orchestrator::decide_cloud_only(const Task& task) const {
  return finish(task, Layer::Cloud);
}

Decision Orchestrator::decide_greedy(const Task& task) const {
  const Layer layer = select_layer(task, cfg_.specs, cfg_.weights);
  Decision d = finish(task, layer);
  d.utility = utility(task, cfg_.specs[layer_index(layer)], cfg_.weights);
  return d;
}

Decision Orchestrator::decide_rl(const Task& task, const SystemState& state) const {
  if (!cfg_.agent) {
    throw std::invalid_argument(
        "orchestrator: rl-hipa requires a trained agent (missing training artifact)");
  }
  const StateEncoding s = encode_state(task, state, cfg_.agent->norm_bounds);
  const std::array<double, 3> q = cfg_.agent->q.forward(s);
  Decision d = finish(task, argmax_layer(q));
  d.q_values = q;
  return d;
}

Decision Orchestrator::decide(const Task& task, const SystemState& state) const {
  switch (cfg_.kind) {
    case PolicyKind::ThresholdHIPA: return decide_threshold(task);
    case PolicyKind::GreedyUtility: return decide_greedy(task);
    case PolicyKind::RLHIPA: return decide_rl(task, state);
    case PolicyKind::CloudOnly: return decide_cloud_only(task);
    case PolicyKind::StaticOrchestration: return decide_static(task);
    case PolicyKind::FogCentric: return decide_fog_centric(task);
  }
  throw std::logic_error("orchestrator: unknown policy kind");
}

Decision Orchestrator::reroute_on_overload(const Task& task, const Decision& decision,
                                           const SystemState& state) const {
  const auto [layer, moved] = reroute_layer(decision.layer, state, cfg_.overload_threshold);
  if (!moved) return decision;
  Decision d = decision;
  d.layer = layer;
  d.rerouted = true;
  d.predicted_latency = predicted_latency(task, cfg_.specs[layer_index(layer)]);
  return d;
}

}  // namespace ofsim
