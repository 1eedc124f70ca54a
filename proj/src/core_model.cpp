#include "ofsim/core_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ofsim {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

const char* to_string(Layer l) {
  switch (l) {
    case Layer::Edge: return "edge";
    case Layer::Fog: return "fog";
    case Layer::Cloud: return "cloud";
  }
  return "?";
}

std::optional<Layer> layer_from_string(const std::string& name) {
  if (name == "edge") return Layer::Edge;
  if (name == "fog") return Layer::Fog;
  if (name == "cloud") return Layer::Cloud;
  return std::nullopt;
}

const char* to_string(TaskCategory c) {
  switch (c) {
    case TaskCategory::Realtime: return "realtime";
    case TaskCategory::Aggregation: return "aggregation";
    case TaskCategory::Analytics: return "analytics";
  }
  return "?";
}

std::optional<TaskCategory> category_from_string(const std::string& name) {
  if (name == "realtime") return TaskCategory::Realtime;
  if (name == "aggregation") return TaskCategory::Aggregation;
  if (name == "analytics") return TaskCategory::Analytics;
  return std::nullopt;
}

Task::Task(std::uint64_t id_, double arrival_time_, double latency_req_, double complexity_,
           double data_size_, int privacy_, TaskCategory category_)
    : id(id_),
      arrival_time(arrival_time_),
      latency_req(latency_req_),
      complexity(complexity_),
      data_size(data_size_),
      privacy(privacy_),
      category(category_) {
  require(std::isfinite(arrival_time) && arrival_time >= 0.0,
          "task.arrival_time must be finite and >= 0");
  require(std::isfinite(latency_req) && latency_req > 0.0,
          "task.latency_req must be finite and > 0");
  require(std::isfinite(complexity) && complexity > 0.0,
          "task.complexity must be finite and > 0");
  require(std::isfinite(data_size) && data_size > 0.0,
          "task.data_size must be finite and > 0");
  require(privacy == 0 || privacy == 1, "task.privacy must be 0 or 1");
}

void LayerSpec::validate() const {
  require(std::isfinite(proc_speed) && proc_speed > 0.0, "layer.proc_speed must be > 0");
  require(std::isfinite(capacity) && capacity >= proc_speed,
          "layer.capacity must be >= proc_speed");
  require(std::isfinite(p_proc) && p_proc >= 0.0, "layer.p_proc must be >= 0");
  require(std::isfinite(p_comm) && p_comm >= 0.0, "layer.p_comm must be >= 0");
  require(std::isfinite(accuracy) && accuracy >= 0.0 && accuracy <= 1.0,
          "layer.accuracy must be in [0, 1]");
  require(node_count >= 1, "layer.node_count must be >= 1");
  require(std::isfinite(per_device_update_time) && per_device_update_time >= 0.0,
          "layer.per_device_update_time must be >= 0");
  if (fixed_overhead) {
    require(std::isfinite(*fixed_overhead) && *fixed_overhead >= 0.0,
            "layer.fixed_overhead must be >= 0");
  }
  require(std::isfinite(base_rtt) && base_rtt >= 0.0, "layer.base_rtt must be >= 0");
  if (layer == Layer::Edge) {
    require(base_rtt == 0.0, "edge layer.base_rtt must be 0");
  } else {
    require(std::isfinite(bandwidth) && bandwidth > 0.0,
            "layer.bandwidth must be > 0 for fog/cloud");
  }
  require(std::isfinite(reliability) && reliability > 0.0, "layer.reliability must be > 0");
}

double LayerSpec::overhead() const {
  if (fixed_overhead) return *fixed_overhead;
  if (layer == Layer::Fog) return static_cast<double>(node_count) * per_device_update_time;
  return 0.0;
}

void WeightConfig::validate() const {
  for (double w : utility) require(std::isfinite(w) && w >= 0.0, "utility weights must be >= 0");
  for (double w : reward) require(std::isfinite(w) && w >= 0.0, "reward weights must be >= 0");
  const double us = utility[0] + utility[1] + utility[2];
  const double rs = reward[0] + reward[1] + reward[2];
  require(std::abs(us - 1.0) <= 1e-9, "utility weights must sum to 1");
  require(std::abs(rs - 1.0) <= 1e-9, "reward weights must sum to 1");
  require(std::isfinite(reward_privacy_bonus) && reward_privacy_bonus >= 0.0,
          "reward_privacy_bonus must be >= 0");
}

void EncryptionParams::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0, "encryption.alpha must be >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "encryption.beta must be >= 0");
}

void ThresholdConfig::validate() const {
  require(std::isfinite(low_latency) && low_latency > 0.0,
          "thresholds.low_latency must be > 0");
  require(std::isfinite(moderate_complexity) && moderate_complexity > 0.0,
          "thresholds.moderate_complexity must be > 0");
}

FeatureVector analyze_task(const Task& task) {
  return FeatureVector{task.latency_req, task.complexity, task.privacy};
}

double proc_time(const Task& task, const LayerSpec& spec) {
  return task.complexity / spec.proc_speed + spec.overhead();
}

double comm_time(const Task& task, const LayerSpec& spec) {
  if (spec.layer == Layer::Edge) return 0.0;
  return spec.base_rtt + task.data_size * 8.0 / spec.bandwidth;
}

double predicted_latency(const Task& task, const LayerSpec& spec) {
  return proc_time(task, spec) + comm_time(task, spec);
}

double privacy_score(const Task& task, Layer layer) {
  if (task.privacy != 1 || layer == Layer::Cloud) return 0.0;
  return layer == Layer::Edge ? 1.0 : 0.5;
}

double utility(const Task& task, const LayerSpec& spec, const WeightConfig& w) {
  const double latency = predicted_latency(task, spec);
  return w.utility[0] / latency + w.utility[1] * spec.capacity / task.complexity +
         w.utility[2] * privacy_score(task, spec.layer);
}

Layer select_layer(const Task& task, const std::array<LayerSpec, 3>& specs,
                   const WeightConfig& w) {
  std::array<double, 3> scores{};
  for (Layer l : kAllLayers) scores[layer_index(l)] = utility(task, specs[layer_index(l)], w);
  return argmax_layer(scores);
}

double enc_time(const Task& task, const EncryptionParams& ep) {
  if (task.privacy != 1) return 0.0;
  return ep.alpha * task.data_size + ep.beta;
}

double total_time(const Task& task, const LayerSpec& spec, const EncryptionParams& ep) {
  return predicted_latency(task, spec) + enc_time(task, ep);
}

double energy(const Task& task, const LayerSpec& spec) {
  return spec.p_proc * proc_time(task, spec) + spec.p_comm * comm_time(task, spec);
}

double reward(const Task& task, const LayerSpec& spec, const WeightConfig& w) {
  const double latency = predicted_latency(task, spec);
  const double joules = energy(task, spec);
  if (!(joules > 0.0)) {
    throw std::domain_error("reward: zero energy signals a misconfigured power model");
  }
  double r = w.reward[0] / latency + w.reward[1] / joules + w.reward[2] * spec.accuracy;
  if (w.reward_privacy_bonus > 0.0) {
    r += w.reward_privacy_bonus * privacy_score(task, spec.layer);
  }
  return r;
}

double aggregate_results(std::span<const double> values,
                         std::span<const double> reliabilities) {
  require(!values.empty(), "aggregate_results: malformed node set (empty)");
  require(values.size() == reliabilities.size(),
          "aggregate_results: malformed node set (length mismatch)");
  double total = 0.0;
  for (double r : reliabilities) {
    require(std::isfinite(r) && r > 0.0,
            "aggregate_results: malformed node set (non-positive reliability)");
    total += r;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += (reliabilities[i] / total) * values[i];
  }
  return acc;
}

Layer argmax_layer(const std::array<double, 3>& scores) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<Layer>(best);
}

}  // namespace ofsim
