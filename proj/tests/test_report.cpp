#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofsim/report.hpp"
#include "ofsim/sim.hpp"

using namespace ofsim;

namespace {

TraceEvent make_event(Layer layer, double total_latency, double proc, double energy,
                      int privacy = 0, double enc = 0.0, double mb_fog = 0.0,
                      double mb_cloud = 0.0) {
  TraceEvent e;
  e.task_id = 1;
  e.layer = layer;
  e.total_latency = total_latency;
  e.proc_time = proc;
  e.energy_j = energy;
  e.privacy = privacy;
  e.enc_time = enc;
  e.mb_to_fog = mb_fog;
  e.mb_to_cloud = mb_cloud;
  return e;
}

ScenarioSpec small_scenario() {
  ScenarioSpec spec;
  spec.duration = 600.0;
  spec.task_count = 120;
  spec.seed = 5;

  LayerSpec edge;
  edge.layer = Layer::Edge;
  edge.proc_speed = 5e7;
  edge.capacity = 5e7;
  edge.p_proc = 1.0;
  edge.accuracy = 0.85;
  edge.fixed_overhead = 0.01;
  edge.node_count = 4;

  LayerSpec fog;
  fog.layer = Layer::Fog;
  fog.proc_speed = 2.5e8;
  fog.capacity = 2.5e8;
  fog.p_proc = 7.5;
  fog.p_comm = 2.0;
  fog.accuracy = 0.90;
  fog.node_count = 2;
  fog.per_device_update_time = 0.002;
  fog.base_rtt = 0.005;
  fog.bandwidth = 80.0;

  LayerSpec cloud;
  cloud.layer = Layer::Cloud;
  cloud.proc_speed = 2e9;
  cloud.capacity = 2e9;
  cloud.p_proc = 100.0;
  cloud.p_comm = 25.0;
  cloud.accuracy = 0.95;
  cloud.fixed_overhead = 0.0;
  cloud.node_count = 2;
  cloud.base_rtt = 0.05;
  cloud.bandwidth = 80.0;

  spec.layers = {edge, fog, cloud};
  return spec;
}

}  // namespace

TEST_CASE("compute_metrics on a handcrafted trace") {
  std::vector<std::vector<TraceEvent>> traces(1);
  traces[0].push_back(make_event(Layer::Edge, 0.010, 0.004, 1000.0, 1, 0.002));
  traces[0].push_back(make_event(Layer::Cloud, 0.030, 0.020, 2600.0, 0, 0.0, 1.0, 1.0));

  const MetricsReport rep = compute_metrics(traces, 3600.0, "test");
  CHECK(rep.policy == "test");
  CHECK(rep.replications == 1);
  CHECK(rep.latency_mean_ms.mean == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(rep.latency_median_ms.mean == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(rep.latency_p95_ms.mean == doctest::Approx(30.0).epsilon(1e-12));
  // 3600 J over a one-hour run is exactly 0.001 kWh.
  CHECK(rep.energy_kwh.mean == doctest::Approx(0.001).epsilon(1e-12));
  // 2 MB over one hour: 0.002 GB/hour.
  CHECK(rep.bandwidth_gb_per_hour.mean == doctest::Approx(0.002).epsilon(1e-12));
  CHECK(rep.proc_time_mean_s.mean == doctest::Approx(0.012).epsilon(1e-12));
  CHECK(rep.share_edge_pct.mean == 50.0);
  CHECK(rep.share_fog_pct.mean == 0.0);
  CHECK(rep.share_cloud_pct.mean == 50.0);
  CHECK(rep.share_edge_pct.mean + rep.share_fog_pct.mean + rep.share_cloud_pct.mean ==
        doctest::Approx(100.0).epsilon(1e-9));
  // The only sensitive task ran on the edge: fully local, 2 ms encryption.
  CHECK(rep.sensitive_local_pct.mean == 100.0);
  CHECK(rep.enc_overhead_mean_ms.mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.reroute_pct.mean == 0.0);
  CHECK(privacy_risk_label(rep.sensitive_local_pct.mean) == "Low");
}

TEST_CASE("cloud-only style trace yields zero local share") {
  std::vector<std::vector<TraceEvent>> traces(1);
  for (int i = 0; i < 10; ++i) {
    traces[0].push_back(make_event(Layer::Cloud, 0.05, 0.01, 1.0, i % 2, 0.01, 0.05, 0.05));
  }
  const MetricsReport rep = compute_metrics(traces, 3600.0, "cloud-only");
  CHECK(rep.share_cloud_pct.mean == 100.0);
  CHECK(rep.share_edge_pct.mean == 0.0);
  CHECK(rep.sensitive_local_pct.mean == 0.0);
  CHECK(privacy_risk_label(rep.sensitive_local_pct.mean) == "High");
}

TEST_CASE("dispersion across replications is the sample standard deviation") {
  std::vector<std::vector<TraceEvent>> traces(2);
  traces[0].push_back(make_event(Layer::Edge, 0.010, 0.010, 1.0));
  traces[1].push_back(make_event(Layer::Edge, 0.030, 0.030, 1.0));
  const MetricsReport rep = compute_metrics(traces, 3600.0, "x");
  CHECK(rep.replications == 2);
  CHECK(rep.latency_mean_ms.mean == doctest::Approx(20.0));
  // Sample stddev of {10, 30} is sqrt(200) = 14.142...
  CHECK(rep.latency_mean_ms.stddev == doctest::Approx(std::sqrt(200.0)).epsilon(1e-12));
}

TEST_CASE("dropped events are excluded from the aggregates") {
  std::vector<std::vector<TraceEvent>> traces(1);
  traces[0].push_back(make_event(Layer::Edge, 0.010, 0.010, 1.0));
  TraceEvent dropped;
  dropped.dropped = true;
  dropped.layer = Layer::Cloud;
  traces[0].push_back(dropped);
  const MetricsReport rep = compute_metrics(traces, 3600.0, "x");
  CHECK(rep.share_edge_pct.mean == 100.0);
  CHECK(rep.latency_mean_ms.mean == doctest::Approx(10.0));
}

TEST_CASE("compute_metrics rejects empty input") {
  std::vector<std::vector<TraceEvent>> none;
  CHECK_THROWS_AS(compute_metrics(none, 3600.0, "x"), std::invalid_argument);
  std::vector<std::vector<TraceEvent>> hollow(1);
  CHECK_THROWS_AS(compute_metrics(hollow, 3600.0, "x"), std::invalid_argument);
}

TEST_CASE("report scalars are recomputable from the exported trace csv") {
  const ScenarioSpec spec = small_scenario();
  const auto traces = replicate(spec, {PolicyKind::ThresholdHIPA, nullptr}, 2, false);
  const MetricsReport rep = compute_metrics(traces, spec.duration, "threshold-hipa");

  // Independent one-pass aggregation over the emitted CSV text.
  double latency_sum = 0.0, energy_sum = 0.0;
  int rows = 0;
  for (const auto& trace : traces) {
    std::ostringstream out;
    write_trace_csv(trace, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);  // header
    // Column indexes from the documented header.
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::size_t pos = 0;
      while (true) {
        const auto comma = line.find(',', pos);
        cols.push_back(line.substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      REQUIRE(cols.size() == 20);
      latency_sum += std::strtod(cols[15].c_str(), nullptr);
      energy_sum += std::strtod(cols[16].c_str(), nullptr);
      ++rows;
    }
  }
  const double mean_latency_ms = 1000.0 * latency_sum / rows;
  CHECK(rep.latency_mean_ms.mean == doctest::Approx(mean_latency_ms).epsilon(1e-9));
  // Sum of per-event energy matches the report total (mean per rep * reps).
  const double report_total_j = rep.energy_kwh.mean * 3.6e6 * traces.size();
  CHECK(report_total_j == doctest::Approx(energy_sum).epsilon(1e-9));
  // Shares always partition the non-dropped events.
  CHECK(rep.share_edge_pct.mean + rep.share_fog_pct.mean + rep.share_cloud_pct.mean ==
        doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("compare computes signed percentage reductions") {
  std::vector<std::vector<TraceEvent>> base_traces(1), cand_traces(1);
  base_traces[0].push_back(make_event(Layer::Cloud, 0.010, 1.2, 1.0, 0, 0, 0.1, 0.1));
  cand_traces[0].push_back(make_event(Layer::Edge, 0.0065, 0.8, 1.0));

  MetricsReport base = compute_metrics(base_traces, 3600.0, "cloud-only");
  MetricsReport cand = compute_metrics(cand_traces, 3600.0, "rl-hipa");
  // Pin the bandwidth numbers for the delta check.
  base.bandwidth_gb_per_hour.mean = 200.0;
  cand.bandwidth_gb_per_hour.mean = 150.0;

  const ComparisonTable table = compare({base, cand}, "cloud-only");
  REQUIRE(table.policies.size() == 2);
  REQUIRE(table.rows.size() == 5);
  CHECK(table.rows[0].field == "latency_mean_ms");
  CHECK(table.rows[0].values[0] == doctest::Approx(10.0));
  CHECK(table.rows[0].values[1] == doctest::Approx(6.5));
  CHECK(table.rows[0].delta_pct[1] == doctest::Approx(35.0).epsilon(1e-9));
  CHECK(table.rows[1].field == "bandwidth_gb_per_hour");
  CHECK(table.rows[1].delta_pct[1] == doctest::Approx(25.0).epsilon(1e-9));
  // Baseline deltas are identically zero.
  for (const auto& row : table.rows) CHECK(row.delta_pct[0] == 0.0);

  const ComparisonTable self = compare({base}, "cloud-only");
  for (const auto& row : self.rows) {
    for (double d : row.delta_pct) CHECK(d == 0.0);
  }

  CHECK_THROWS_AS(compare({base, cand}, "not-a-policy"), std::invalid_argument);

  // Antisymmetry up to the normalization denominator: a * d_ab == -b * d_ba.
  const ComparisonTable ab = compare({base, cand}, "cloud-only");
  const ComparisonTable ba = compare({base, cand}, "rl-hipa");
  for (std::size_t row = 0; row < ab.rows.size(); ++row) {
    const double a = ab.rows[row].values[0];
    const double b = ab.rows[row].values[1];
    const double d_ab = ab.rows[row].delta_pct[1];  // candidate rl-hipa vs base
    const double d_ba = ba.rows[row].delta_pct[0];  // candidate cloud-only vs rl-hipa
    if (a != 0.0 && b != 0.0) {
      CHECK(a * d_ab == doctest::Approx(-b * d_ba).epsilon(1e-9));
    }
  }
}

TEST_CASE("emission is deterministic across calls") {
  std::vector<std::vector<TraceEvent>> traces(1);
  traces[0].push_back(make_event(Layer::Fog, 0.042, 0.01, 2.5, 1, 0.003, 0.5));
  const MetricsReport rep = compute_metrics(traces, 1800.0, "fog-centric");
  for (ReportFormat f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown}) {
    CHECK(emit(rep, f) == emit(rep, f));
  }
  const ComparisonTable table = compare({rep}, "fog-centric");
  for (ReportFormat f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown}) {
    CHECK(emit(table, f) == emit(table, f));
  }
}

TEST_CASE("csv report round-trips every scalar at full precision") {
  const ScenarioSpec spec = small_scenario();
  const auto traces = replicate(spec, {PolicyKind::GreedyUtility, nullptr}, 3, false);
  const MetricsReport rep = compute_metrics(traces, spec.duration, "greedy-utility");

  const MetricsReport back = parse_report_csv(emit(rep, ReportFormat::Csv));
  CHECK(back.policy == rep.policy);
  CHECK(back.replications == rep.replications);
  CHECK(back.duration_s == rep.duration_s);
  CHECK(back.latency_mean_ms.mean == rep.latency_mean_ms.mean);
  CHECK(back.latency_median_ms.mean == rep.latency_median_ms.mean);
  CHECK(back.latency_p95_ms.mean == rep.latency_p95_ms.mean);
  CHECK(back.bandwidth_gb_per_hour.mean == rep.bandwidth_gb_per_hour.mean);
  CHECK(back.energy_kwh.mean == rep.energy_kwh.mean);
  CHECK(back.proc_time_mean_s.mean == rep.proc_time_mean_s.mean);
  CHECK(back.share_edge_pct.mean == rep.share_edge_pct.mean);
  CHECK(back.share_fog_pct.mean == rep.share_fog_pct.mean);
  CHECK(back.share_cloud_pct.mean == rep.share_cloud_pct.mean);
  CHECK(back.sensitive_local_pct.mean == rep.sensitive_local_pct.mean);
  CHECK(back.enc_overhead_mean_ms.mean == rep.enc_overhead_mean_ms.mean);
  CHECK(back.reroute_pct.mean == rep.reroute_pct.mean);
  CHECK(back.latency_mean_ms.stddev == rep.latency_mean_ms.stddev);
  CHECK(back.energy_kwh.stddev == rep.energy_kwh.stddev);
}

TEST_CASE("json report exposes the documented flat fields") {
  std::vector<std::vector<TraceEvent>> traces(1);
  traces[0].push_back(make_event(Layer::Edge, 0.01, 0.01, 1.0));
  const MetricsReport rep = compute_metrics(traces, 3600.0, "static");
  const auto j = nlohmann::json::parse(emit(rep, ReportFormat::Json));
  for (const char* key :
       {"policy", "replications", "duration_s", "latency_mean_ms", "latency_median_ms",
        "latency_p95_ms", "bandwidth_gb_per_hour", "energy_kwh", "proc_time_mean_s",
        "share_edge_pct", "share_fog_pct", "share_cloud_pct", "sensitive_local_pct",
        "enc_overhead_mean_ms", "reroute_pct", "latency_mean_ms_stddev", "privacy_risk"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["policy"] == "static");
}

TEST_CASE("markdown tables honor the benchmark row order") {
  std::vector<std::vector<TraceEvent>> traces(1);
  traces[0].push_back(make_event(Layer::Edge, 0.01, 0.01, 1.0));
  const MetricsReport rep = compute_metrics(traces, 3600.0, "static");
  const std::string md = emit(rep, ReportFormat::Markdown);
  const char* order[] = {"Average Latency (ms)", "Bandwidth Usage (GB/hour)",
                         "Energy Consumption (kWh)", "Task Processing Time (s)",
                         "Sensitive Data Processed Locally (%)"};
  std::size_t pos = 0;
  for (const char* label : order) {
    const auto at = md.find(label, pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
}

TEST_CASE("format names parse") {
  CHECK(report_format_from_string("csv") == ReportFormat::Csv);
  CHECK(report_format_from_string("json") == ReportFormat::Json);
  CHECK(report_format_from_string("markdown") == ReportFormat::Markdown);
  CHECK(report_format_from_string("md") == ReportFormat::Markdown);
  CHECK(!report_format_from_string("xml").has_value());
}
