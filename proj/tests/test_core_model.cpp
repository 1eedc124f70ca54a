#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ofsim/core_model.hpp"
#include "ofsim/rng.hpp"

using namespace ofsim;

namespace {

Task make_task(double lat = 0.1, double comp = 1e6, double size = 1.0, int priv = 0) {
  return Task(1, 0.0, lat, comp, size, priv);
}

LayerSpec edge_spec() {
  LayerSpec s;
  s.layer = Layer::Edge;
  s.proc_speed = 1e8;
  s.capacity = 1e8;
  s.p_proc = 0.1;
  s.p_comm = 0.0;
  s.accuracy = 0.85;
  s.fixed_overhead = 0.01;
  s.node_count = 1;
  return s;
}

LayerSpec fog_spec() {
  LayerSpec s;
  s.layer = Layer::Fog;
  s.proc_speed = 1e10;
  s.capacity = 1e10;
  s.p_proc = 10.0;
  s.p_comm = 2.0;
  s.accuracy = 0.90;
  s.node_count = 10;
  s.per_device_update_time = 0.002;  // resolved overhead 0.02
  s.base_rtt = 0.005;
  s.bandwidth = 80.0;
  return s;
}

LayerSpec cloud_spec() {
  LayerSpec s;
  s.layer = Layer::Cloud;
  s.proc_speed = 1e10;
  s.capacity = 1e11;
  s.p_proc = 100.0;
  s.p_comm = 5.0;
  s.accuracy = 0.95;
  s.fixed_overhead = 0.0;
  s.node_count = 4;
  s.base_rtt = 0.05;
  s.bandwidth = 80.0;
  return s;
}

std::array<LayerSpec, 3> default_specs() { return {edge_spec(), fog_spec(), cloud_spec()}; }

Task random_task(Rng& rng) {
  return Task(1, 0.0, rng.uniform(0.001, 1.0), rng.uniform(1e4, 1e9),
              rng.uniform(0.001, 0.15), rng.bernoulli(0.4) ? 1 : 0);
}

std::array<LayerSpec, 3> random_specs(Rng& rng) {
  auto specs = default_specs();
  specs[0].proc_speed = rng.uniform(1e7, 1e8);
  specs[0].capacity = specs[0].proc_speed * rng.uniform(1.0, 50.0);
  specs[0].fixed_overhead = rng.uniform(0.0, 0.02);
  specs[1].proc_speed = rng.uniform(1e8, 1e9);
  specs[1].capacity = specs[1].proc_speed * rng.uniform(1.0, 20.0);
  specs[1].base_rtt = rng.uniform(0.001, 0.01);
  specs[1].bandwidth = rng.uniform(10.0, 100.0);
  specs[2].proc_speed = rng.uniform(1e9, 1e10);
  specs[2].capacity = specs[2].proc_speed * rng.uniform(1.0, 10.0);
  specs[2].base_rtt = rng.uniform(0.03, 0.08);
  specs[2].bandwidth = rng.uniform(10.0, 100.0);
  return specs;
}

// Independent re-derivation of the utility score, written out from scratch so
// it does not share code with the implementation under test.
double oracle_utility(const Task& t, const LayerSpec& s, const WeightConfig& w) {
  double overhead = 0.0;
  if (s.fixed_overhead.has_value()) {
    overhead = *s.fixed_overhead;
  } else if (s.layer == Layer::Fog) {
    overhead = s.node_count * s.per_device_update_time;
  }
  const double proc = t.complexity / s.proc_speed + overhead;
  const double comm =
      s.layer == Layer::Edge ? 0.0 : s.base_rtt + t.data_size * 8.0 / s.bandwidth;
  double pscore = 0.0;
  if (t.privacy == 1 && s.layer == Layer::Edge) pscore = 1.0;
  if (t.privacy == 1 && s.layer == Layer::Fog) pscore = 0.5;
  return w.utility[0] / (proc + comm) + w.utility[1] * s.capacity / t.complexity +
         w.utility[2] * pscore;
}

Layer oracle_best_layer(const Task& t, const std::array<LayerSpec, 3>& specs,
                        const WeightConfig& w) {
  int best = 0;
  double best_u = oracle_utility(t, specs[0], w);
  for (int i = 1; i < 3; ++i) {
    const double u = oracle_utility(t, specs[i], w);
    if (u > best_u) {
      best = i;
      best_u = u;
    }
  }
  return static_cast<Layer>(best);
}

}  // namespace

TEST_CASE("task construction rejects degenerate inputs") {
  CHECK_THROWS_AS(Task(1, 0.0, 0.0, 1e6, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Task(1, 0.0, 0.1, 0.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Task(1, 0.0, 0.1, 1e6, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Task(1, 0.0, 0.1, 1e6, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(Task(1, -1.0, 0.1, 1e6, 1.0, 0), std::invalid_argument);
  CHECK_NOTHROW(Task(1, 0.0, 0.1, 1e6, 1.0, 1));
}

TEST_CASE("analyze_task is the identity projection") {
  const Task a = make_task(0.1, 1e6, 1.0, 1);
  const FeatureVector va = analyze_task(a);
  CHECK(va.l == 0.1);
  CHECK(va.c == 1e6);
  CHECK(va.p == 1);

  const Task b = make_task(0.005, 1e4, 0.5, 0);
  const FeatureVector vb = analyze_task(b);
  CHECK(vb.l == 0.005);
  CHECK(vb.c == 1e4);
  CHECK(vb.p == 0);

  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Task t = random_task(rng);
    const FeatureVector v = analyze_task(t);
    CHECK((v.p == 0 || v.p == 1));
    CHECK(v.l == t.latency_req);
    CHECK(v.c == t.complexity);
  }
}

TEST_CASE("proc_time matches the per-layer decompositions") {
  CHECK(proc_time(make_task(0.1, 1e6), edge_spec()) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(proc_time(make_task(0.1, 1e8), fog_spec()) == doctest::Approx(0.03).epsilon(1e-12));
  // Any legal complexity strictly exceeds the layer's fixed cost.
  const Task tiny = make_task(0.1, 1.0);
  CHECK(proc_time(tiny, edge_spec()) > *edge_spec().fixed_overhead);
}

TEST_CASE("fog overhead derives from node count when unset") {
  LayerSpec fog = fog_spec();
  CHECK(fog.overhead() == doctest::Approx(0.02).epsilon(1e-12));
  fog.fixed_overhead = 0.05;
  CHECK(fog.overhead() == 0.05);
}

TEST_CASE("comm_time: zero on edge, rtt plus serialization elsewhere") {
  const Task t = make_task(0.1, 1e6, 1.0);
  CHECK(comm_time(t, edge_spec()) == 0.0);
  CHECK(comm_time(t, fog_spec()) == doctest::Approx(0.105).epsilon(1e-12));
  CHECK(comm_time(t, cloud_spec()) == doctest::Approx(0.150).epsilon(1e-12));
}

TEST_CASE("predicted_latency sums processing and communication") {
  CHECK(predicted_latency(make_task(0.1, 1e6), edge_spec()) ==
        doctest::Approx(0.02).epsilon(1e-12));
  CHECK(predicted_latency(make_task(0.1, 1e8, 1.0), fog_spec()) ==
        doctest::Approx(0.135).epsilon(1e-12));
}

TEST_CASE("latency, energy and total time are monotone in complexity and size") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto specs = random_specs(rng);
    const LayerSpec& spec = specs[rng.uniform_int(3)];
    const Task t = random_task(rng);
    const double k = rng.uniform(1.0, 8.0);
    const Task heavier(1, 0.0, t.latency_req, t.complexity * k, t.data_size, t.privacy);
    const Task bigger(1, 0.0, t.latency_req, t.complexity, t.data_size * k, t.privacy);
    const EncryptionParams ep;
    CHECK(predicted_latency(heavier, spec) >= predicted_latency(t, spec));
    CHECK(predicted_latency(bigger, spec) >= predicted_latency(t, spec));
    CHECK(energy(heavier, spec) >= energy(t, spec));
    CHECK(energy(bigger, spec) >= energy(t, spec));
    CHECK(total_time(heavier, spec, ep) >= total_time(t, spec, ep));
    CHECK(total_time(bigger, spec, ep) >= total_time(t, spec, ep));
  }
}

TEST_CASE("scaling proc_speed scales the compute component") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    auto spec = random_specs(rng)[rng.uniform_int(3)];
    const Task t = random_task(rng);
    const double base = proc_time(t, spec) - spec.overhead();
    const double k = rng.uniform(0.5, 16.0);
    LayerSpec scaled = spec;
    scaled.proc_speed *= k;
    scaled.capacity *= k;
    const double scaled_compute = proc_time(t, scaled) - scaled.overhead();
    CHECK(scaled_compute == doctest::Approx(base / k).epsilon(1e-12));
  }
}

TEST_CASE("privacy_score table") {
  const Task sensitive = make_task(0.1, 1e6, 1.0, 1);
  const Task plain = make_task(0.1, 1e6, 1.0, 0);
  CHECK(privacy_score(sensitive, Layer::Edge) == 1.0);
  CHECK(privacy_score(sensitive, Layer::Fog) == 0.5);
  CHECK(privacy_score(sensitive, Layer::Cloud) == 0.0);
  for (Layer l : kAllLayers) CHECK(privacy_score(plain, l) == 0.0);
  CHECK(privacy_score(sensitive, Layer::Edge) > privacy_score(sensitive, Layer::Fog));
  CHECK(privacy_score(sensitive, Layer::Fog) > privacy_score(sensitive, Layer::Cloud));
}

TEST_CASE("utility reduces to latency ordering under w = (1,0,0)") {
  Rng rng(17);
  WeightConfig w;
  w.utility = {1.0, 0.0, 0.0};
  for (int i = 0; i < 200; ++i) {
    const auto specs = random_specs(rng);
    const Task t = random_task(rng);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const bool faster = predicted_latency(t, specs[a]) < predicted_latency(t, specs[b]);
        if (faster) CHECK(utility(t, specs[a], w) > utility(t, specs[b], w));
      }
    }
  }
}

TEST_CASE("utility reduces to privacy ordering under w = (0,0,1)") {
  WeightConfig w;
  w.utility = {0.0, 0.0, 1.0};
  const Task t = make_task(0.1, 1e6, 1.0, 1);
  const auto specs = default_specs();
  CHECK(utility(t, specs[0], w) > utility(t, specs[1], w));
  CHECK(utility(t, specs[1], w) > utility(t, specs[2], w));
}

TEST_CASE("select_layer agrees with the exhaustive oracle on 1000 random tasks") {
  Rng rng(19);
  WeightConfig w;
  w.utility = {0.4, 0.3, 0.3};
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto specs = random_specs(rng);
    const Task t = random_task(rng);
    CHECK(select_layer(t, specs, w) == oracle_best_layer(t, specs, w));
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("argmax tie-breaks toward the data source") {
  CHECK(argmax_layer({2.0, 1.0, 0.5}) == Layer::Edge);
  CHECK(argmax_layer({1.0, 1.0, 0.2}) == Layer::Edge);
  CHECK(argmax_layer({0.1, 0.7, 0.7}) == Layer::Fog);
  CHECK(argmax_layer({0.1, 0.2, 0.7}) == Layer::Cloud);
}

TEST_CASE("enc_time applies only to sensitive tasks") {
  const EncryptionParams ep;  // alpha 0.01, beta 0.005
  CHECK(enc_time(make_task(0.1, 1e6, 10.0, 1), ep) ==
        doctest::Approx(0.105).epsilon(1e-12));
  CHECK(enc_time(make_task(0.1, 1e6, 10.0, 0), ep) == 0.0);
  CHECK(enc_time(make_task(0.1, 1e6, 1e-12, 1), ep) >= ep.beta);
}

TEST_CASE("total_time degenerates to predicted_latency for non-sensitive tasks") {
  const EncryptionParams ep;
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    auto t = random_task(rng);
    const Task plain(t.id, t.arrival_time, t.latency_req, t.complexity, t.data_size, 0);
    const auto specs = random_specs(rng);
    for (const auto& s : specs) {
      CHECK(total_time(plain, s, ep) == predicted_latency(plain, s));
      CHECK(total_time(t, s, ep) >= predicted_latency(t, s));
    }
  }
  // Fog example: 0.135 s latency + 0.015 s encryption.
  const Task sensitive = make_task(0.1, 1e8, 1.0, 1);
  CHECK(total_time(sensitive, fog_spec(), ep) == doctest::Approx(0.150).epsilon(1e-12));
}

TEST_CASE("energy follows the power model") {
  // Edge: 0.1 W for 0.02 s of processing, no transmission.
  CHECK(energy(make_task(0.1, 1e6), edge_spec()) == doctest::Approx(0.002).epsilon(1e-12));
  // Cloud: 100 W * 0.01 s + 5 W * 0.15 s.
  CHECK(energy(make_task(0.1, 1e8, 1.0), cloud_spec()) ==
        doctest::Approx(1.75).epsilon(1e-12));
  LayerSpec cold = edge_spec();
  cold.p_proc = 0.0;
  CHECK(energy(make_task(), cold) == 0.0);
}

TEST_CASE("reward matches the hand-computed example") {
  WeightConfig w;
  w.reward = {0.4, 0.3, 0.3};
  w.reward_privacy_bonus = 0.0;
  // Edge placement: latency 0.02 s, energy 0.002 J, accuracy 0.85.
  const double r = reward(make_task(0.1, 1e6), edge_spec(), w);
  CHECK(r == doctest::Approx(170.255).epsilon(1e-12));
}

TEST_CASE("reward reduces to latency ordering under w1 = 1") {
  Rng rng(29);
  WeightConfig w;
  w.reward = {1.0, 0.0, 0.0};
  w.reward_privacy_bonus = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto specs = random_specs(rng);
    const Task t = random_task(rng);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (predicted_latency(t, specs[a]) < predicted_latency(t, specs[b])) {
          CHECK(reward(t, specs[a], w) > reward(t, specs[b], w));
        }
      }
    }
  }
}

TEST_CASE("reward argmax agrees with exhaustive evaluation") {
  Rng rng(31);
  WeightConfig w;
  for (int i = 0; i < 500; ++i) {
    const auto specs = random_specs(rng);
    const Task t = random_task(rng);
    std::array<double, 3> r{};
    for (int l = 0; l < 3; ++l) r[l] = reward(t, specs[l], w);
    int best = 0;
    for (int l = 1; l < 3; ++l) {
      if (r[l] > r[best]) best = l;
    }
    CHECK(argmax_layer(r) == static_cast<Layer>(best));
  }
}

TEST_CASE("privacy bonus is an exact additive extension") {
  Rng rng(37);
  for (int i = 0; i < 100; ++i) {
    const auto specs = random_specs(rng);
    const Task t = random_task(rng);
    WeightConfig off;
    off.reward_privacy_bonus = 0.0;
    WeightConfig on;
    on.reward_privacy_bonus = 0.3;
    for (const auto& s : specs) {
      const double expect = reward(t, s, off) + 0.3 * privacy_score(t, s.layer);
      CHECK(reward(t, s, on) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("reward rejects a zero-energy configuration") {
  LayerSpec broken = edge_spec();
  broken.p_proc = 0.0;
  WeightConfig w;
  CHECK_THROWS_AS(reward(make_task(), broken, w), std::domain_error);
}

TEST_CASE("aggregate_results") {
  const std::vector<double> vals{2.0, 4.0, 6.0};
  const std::vector<double> ones{1.0, 1.0, 1.0};
  CHECK(aggregate_results(vals, ones) == doctest::Approx(4.0).epsilon(1e-12));

  const std::vector<double> single{42.5};
  const std::vector<double> singler{3.0};
  CHECK(aggregate_results(single, singler) == 42.5);

  const std::vector<double> v2{1.0, 3.0};
  const std::vector<double> r2{1.0, 3.0};
  CHECK(aggregate_results(v2, r2) == doctest::Approx(2.5).epsilon(1e-12));

  const std::vector<double> empty;
  CHECK_THROWS_AS(aggregate_results(empty, empty), std::invalid_argument);
  const std::vector<double> bad_rel{1.0, 0.0};
  CHECK_THROWS_AS(aggregate_results(v2, bad_rel), std::invalid_argument);
  const std::vector<double> mismatched{1.0};
  CHECK_THROWS_AS(aggregate_results(v2, mismatched), std::invalid_argument);
}

TEST_CASE("aggregate_results is permutation invariant and mean-reducing") {
  Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + rng.uniform_int(8);
    std::vector<double> vals(n), rels(n);
    for (int j = 0; j < n; ++j) {
      vals[j] = rng.uniform(-10.0, 10.0);
      rels[j] = rng.uniform(0.1, 5.0);
    }
    const double before = aggregate_results(vals, rels);
    // Rotate both lists together.
    std::vector<double> rv(vals.begin() + 1, vals.end());
    rv.push_back(vals.front());
    std::vector<double> rr(rels.begin() + 1, rels.end());
    rr.push_back(rels.front());
    CHECK(aggregate_results(rv, rr) == doctest::Approx(before).epsilon(1e-9));

    std::vector<double> eq(n, 2.0);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    CHECK(aggregate_results(vals, eq) == doctest::Approx(mean).epsilon(1e-9));
  }
}

TEST_CASE("all model outputs stay finite over random inputs") {
  Rng rng(43);
  const EncryptionParams ep;
  WeightConfig w;
  for (int i = 0; i < 500; ++i) {
    const auto specs = random_specs(rng);
    const Task t = random_task(rng);
    for (const auto& s : specs) {
      CHECK(std::isfinite(proc_time(t, s)));
      CHECK(std::isfinite(comm_time(t, s)));
      CHECK(std::isfinite(predicted_latency(t, s)));
      CHECK(std::isfinite(utility(t, s, w)));
      CHECK(std::isfinite(enc_time(t, ep)));
      CHECK(std::isfinite(total_time(t, s, ep)));
      CHECK(std::isfinite(energy(t, s)));
      CHECK(std::isfinite(reward(t, s, w)));
    }
  }
}

TEST_CASE("config validation") {
  WeightConfig w;
  w.utility = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w.utility = {0.4, 0.3, 0.3};
  CHECK_NOTHROW(w.validate());
  w.reward = {-0.1, 0.6, 0.5};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);

  LayerSpec bad = edge_spec();
  bad.capacity = bad.proc_speed / 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = edge_spec();
  bad.base_rtt = 0.01;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = fog_spec();
  bad.bandwidth = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(edge_spec().validate());
  CHECK_NOTHROW(fog_spec().validate());
  CHECK_NOTHROW(cloud_spec().validate());
}
