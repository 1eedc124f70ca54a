#include "ofsim/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ofsim {

namespace {

using nlohmann::json;

double get_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ScenarioError("scenario: missing field '" + path + key + "'");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ScenarioError("scenario: field '" + path + key + "' must be a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key,
            int fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ScenarioError("scenario: missing field '" + path + key + "'");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ScenarioError("scenario: field '" + path + key + "' must be an integer");
  }
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw ScenarioError("scenario: field '" + path + key + "' must be a boolean");
  }
  return v.get<bool>();
}

std::array<double, 3> get_triple(const json& obj, const std::string& path,
                                 const std::string& key,
                                 const std::array<double, 3>& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number()) {
    throw ScenarioError("scenario: field '" + path + key +
                        "' must be an array of 3 numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::array<double, 2> get_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ScenarioError("scenario: field '" + where + "' must be an array of 2 numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

const json& get_object(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) {
    throw ScenarioError("scenario: missing section '" + path + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_object()) {
    throw ScenarioError("scenario: section '" + path + key + "' must be an object");
  }
  return v;
}

LayerSpec parse_layer(const json& obj, Layer layer, const std::string& path) {
  LayerSpec spec;
  spec.layer = layer;
  spec.proc_speed = get_number(obj, path, "proc_speed", 0.0, true);
  spec.capacity = get_number(obj, path, "capacity", spec.proc_speed);
  spec.p_proc = get_number(obj, path, "p_proc", 0.0, true);
  spec.p_comm = get_number(obj, path, "p_comm", 0.0);
  spec.accuracy = get_number(obj, path, "accuracy", 0.0, true);
  if (obj.contains("fixed_overhead")) {
    spec.fixed_overhead = get_number(obj, path, "fixed_overhead", 0.0);
  }
  spec.node_count = get_int(obj, path, "node_count", 1);
  spec.per_device_update_time = get_number(obj, path, "per_device_update_time", 0.0);
  spec.base_rtt = get_number(obj, path, "base_rtt", 0.0);
  spec.bandwidth = get_number(obj, path, "bandwidth", 0.0);
  spec.reliability = get_number(obj, path, "reliability", 1.0);
  return spec;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario: " + origin + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ScenarioError("scenario: " + origin + ": top level must be an object");
  }

  ScenarioSpec spec;
  spec.duration = get_number(doc, "", "duration", spec.duration);
  spec.task_count = get_int(doc, "", "task_count", spec.task_count);
  spec.device_count = get_int(doc, "", "device_count", spec.device_count);
  spec.sensor_count = get_int(doc, "", "sensor_count", spec.sensor_count);
  spec.seed = static_cast<std::uint64_t>(get_int(doc, "", "seed", static_cast<int>(spec.seed)));
  spec.replications = get_int(doc, "", "replications", spec.replications);
  spec.fog_centric_high_complexity =
      get_number(doc, "", "fog_centric_high_complexity", spec.fog_centric_high_complexity);
  spec.overload_threshold = get_number(doc, "", "overload_threshold", spec.overload_threshold);
  spec.summarization_factor =
      get_number(doc, "", "summarization_factor", spec.summarization_factor);
  spec.allow_drop = get_bool(doc, "", "allow_drop", spec.allow_drop);
  spec.battery_capacity_j = get_number(doc, "", "battery_capacity_j", spec.battery_capacity_j);

  if (doc.contains("mix")) {
    const json& mix = get_object(doc, "", "mix");
    spec.mix.latency_proportions =
        get_triple(mix, "mix.", "latency_proportions", spec.mix.latency_proportions);
    spec.mix.complexity_proportions =
        get_triple(mix, "mix.", "complexity_proportions", spec.mix.complexity_proportions);
    if (mix.contains("latency_bounds")) {
      const auto b = get_pair(mix.at("latency_bounds"), "mix.latency_bounds");
      spec.mix.latency_min = b[0];
      spec.mix.latency_max = b[1];
    }
    if (mix.contains("complexity_bounds")) {
      const auto b = get_pair(mix.at("complexity_bounds"), "mix.complexity_bounds");
      spec.mix.complexity_min = b[0];
      spec.mix.complexity_max = b[1];
    }
    if (mix.contains("data_size_range")) {
      const auto b = get_pair(mix.at("data_size_range"), "mix.data_size_range");
      spec.mix.data_size_min = b[0];
      spec.mix.data_size_max = b[1];
    }
    spec.mix.privacy_probability =
        get_number(mix, "mix.", "privacy_probability", spec.mix.privacy_probability);
  }

  const json& layers = get_object(doc, "", "layers");
  spec.layers[layer_index(Layer::Edge)] =
      parse_layer(get_object(layers, "layers.", "edge"), Layer::Edge, "layers.edge.");
  spec.layers[layer_index(Layer::Fog)] =
      parse_layer(get_object(layers, "layers.", "fog"), Layer::Fog, "layers.fog.");
  spec.layers[layer_index(Layer::Cloud)] =
      parse_layer(get_object(layers, "layers.", "cloud"), Layer::Cloud, "layers.cloud.");
  for (Layer l : kAllLayers) {
    const json& lobj = get_object(layers, "layers.", to_string(l));
    spec.queue_capacity[layer_index(l)] =
        get_int(lobj, std::string("layers.") + to_string(l) + ".", "queue_capacity",
                spec.queue_capacity[layer_index(l)]);
  }

  if (doc.contains("network")) {
    const json& net = get_object(doc, "", "network");
    if (net.contains("fog_rtt_range")) {
      spec.network.fog_rtt = get_pair(net.at("fog_rtt_range"), "network.fog_rtt_range");
    }
    if (net.contains("cloud_rtt_range")) {
      spec.network.cloud_rtt = get_pair(net.at("cloud_rtt_range"), "network.cloud_rtt_range");
    }
    if (net.contains("fog_bandwidth_range")) {
      spec.network.fog_bandwidth =
          get_pair(net.at("fog_bandwidth_range"), "network.fog_bandwidth_range");
    }
    if (net.contains("cloud_bandwidth_range")) {
      spec.network.cloud_bandwidth =
          get_pair(net.at("cloud_bandwidth_range"), "network.cloud_bandwidth_range");
    }
  }

  if (doc.contains("thresholds")) {
    const json& th = get_object(doc, "", "thresholds");
    spec.thresholds.low_latency =
        get_number(th, "thresholds.", "low_latency", spec.thresholds.low_latency);
    spec.thresholds.moderate_complexity = get_number(
        th, "thresholds.", "moderate_complexity", spec.thresholds.moderate_complexity);
  }

  if (doc.contains("weights")) {
    const json& w = get_object(doc, "", "weights");
    spec.weights.utility = get_triple(w, "weights.", "utility", spec.weights.utility);
    spec.weights.reward = get_triple(w, "weights.", "reward", spec.weights.reward);
    spec.weights.reward_privacy_bonus = get_number(
        w, "weights.", "reward_privacy_bonus", spec.weights.reward_privacy_bonus);
  }

  if (doc.contains("encryption")) {
    const json& enc = get_object(doc, "", "encryption");
    spec.encryption.alpha = get_number(enc, "encryption.", "alpha", spec.encryption.alpha);
    spec.encryption.beta = get_number(enc, "encryption.", "beta", spec.encryption.beta);
  }

  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("scenario: " + origin + ": " + e.what());
  }
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace ofsim
