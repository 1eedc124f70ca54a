#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ofsim/sim.hpp"

namespace ofsim {

// Mean across replications plus the sample standard deviation between them.
struct MetricValue {
  double mean = 0.0;
  double stddev = 0.0;
};

// Benchmark-table statistics for one policy over one scenario.
struct MetricsReport {
  std::string policy;
  int replications = 0;
  double duration_s = 0.0;

  MetricValue latency_mean_ms;
  MetricValue latency_median_ms;
  MetricValue latency_p95_ms;
  MetricValue bandwidth_gb_per_hour;  // decimal GB crossing inter-layer links
  MetricValue energy_kwh;             // per simulated run
  MetricValue proc_time_mean_s;       // computation only
  MetricValue share_edge_pct;
  MetricValue share_fog_pct;
  MetricValue share_cloud_pct;
  MetricValue sensitive_local_pct;    // sensitive tasks placed on edge or fog
  MetricValue enc_overhead_mean_ms;   // over sensitive tasks
  MetricValue reroute_pct;
};

// Three-band label derived from the sensitive-local percentage.
std::string privacy_risk_label(double sensitive_local_pct);

// Aggregates one trace list per replication. Throws std::invalid_argument
// when no replication carries events (failed run upstream).
MetricsReport compute_metrics(std::span<const std::vector<TraceEvent>> traces,
                              double duration_s, const std::string& policy_name);

// One comparison row: a metric across all policies plus signed percentage
// deltas against the baseline ((baseline - candidate) / baseline, so positive
// means the candidate is lower).
struct ComparisonRow {
  std::string label;          // human-readable metric name
  std::string field;          // flat field name
  std::vector<double> values;     // per policy, report order
  std::vector<double> delta_pct;  // per policy; 0 for the baseline itself
};

struct ComparisonTable {
  std::string baseline;
  std::vector<std::string> policies;
  std::vector<ComparisonRow> rows;
};

// Benchmark-table layout: latency, bandwidth, energy, processing time,
// sensitive-local share. Throws std::invalid_argument when the baseline is
// not among the reports.
ComparisonTable compare(const std::vector<MetricsReport>& reports,
                        const std::string& baseline);

enum class ReportFormat { Csv, Json, Markdown };

std::optional<ReportFormat> report_format_from_string(const std::string& name);
const char* to_string(ReportFormat f);

// Deterministic byte output for a given input.
std::string emit(const MetricsReport& report, ReportFormat format);
std::string emit(const ComparisonTable& table, ReportFormat format);

// Inverse of emit(report, Csv); used to round-trip reports.
MetricsReport parse_report_csv(const std::string& text);

}  // namespace ofsim
