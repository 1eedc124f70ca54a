#include "ofsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ofsim/format.hpp"

namespace ofsim {

namespace {

struct RepScalars {
  double latency_mean_ms = 0.0;
  double latency_median_ms = 0.0;
  double latency_p95_ms = 0.0;
  double bandwidth_gb_per_hour = 0.0;
  double energy_kwh = 0.0;
  double proc_time_mean_s = 0.0;
  double share_edge_pct = 0.0;
  double share_fog_pct = 0.0;
  double share_cloud_pct = 0.0;
  double sensitive_local_pct = 0.0;
  double enc_overhead_mean_ms = 0.0;
  double reroute_pct = 0.0;
};

double median_of_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Nearest-rank percentile on a sorted sample.
double p95_of_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return v[rank - 1];
}

RepScalars scalars_for(const std::vector<TraceEvent>& events, double duration_s) {
  RepScalars s;
  std::vector<double> latencies;
  double proc_sum = 0.0, energy_sum = 0.0, mb_sum = 0.0;
  int live = 0, edge = 0, fog = 0, cloud = 0, rerouted = 0;
  int sensitive = 0, sensitive_local = 0;
  double enc_sum = 0.0;
  for (const TraceEvent& e : events) {
    if (e.dropped) continue;
    ++live;
    latencies.push_back(e.total_latency);
    proc_sum += e.proc_time;
    energy_sum += e.energy_j;
    mb_sum += e.mb_to_fog + e.mb_to_cloud;
    if (e.rerouted) ++rerouted;
    switch (e.layer) {
      case Layer::Edge: ++edge; break;
      case Layer::Fog: ++fog; break;
      case Layer::Cloud: ++cloud; break;
    }
    if (e.privacy == 1) {
      ++sensitive;
      enc_sum += e.enc_time;
      if (e.layer != Layer::Cloud) ++sensitive_local;
    }
  }
  if (live == 0) {
    throw std::invalid_argument("compute_metrics: empty trace signals a failed run upstream");
  }
  std::sort(latencies.begin(), latencies.end());
  double lat_sum = 0.0;
  for (double l : latencies) lat_sum += l;
  s.latency_mean_ms = 1000.0 * lat_sum / live;
  s.latency_median_ms = 1000.0 * median_of_sorted(latencies);
  s.latency_p95_ms = 1000.0 * p95_of_sorted(latencies);
  s.bandwidth_gb_per_hour = (mb_sum / 1000.0) / (duration_s / 3600.0);
  s.energy_kwh = energy_sum / 3.6e6;
  s.proc_time_mean_s = proc_sum / live;
  s.share_edge_pct = 100.0 * edge / live;
  s.share_fog_pct = 100.0 * fog / live;
  s.share_cloud_pct = 100.0 * cloud / live;
  s.sensitive_local_pct = sensitive > 0 ? 100.0 * sensitive_local / sensitive : 0.0;
  s.enc_overhead_mean_ms = sensitive > 0 ? 1000.0 * enc_sum / sensitive : 0.0;
  s.reroute_pct = 100.0 * rerouted / live;
  return s;
}

MetricValue across(const std::vector<double>& per_rep) {
  MetricValue mv;
  const std::size_t n = per_rep.size();
  double sum = 0.0;
  for (double v : per_rep) sum += v;
  mv.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : per_rep) ss += (v - mv.mean) * (v - mv.mean);
    mv.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return mv;
}

struct FieldRef {
  const char* label;
  const char* field;
  MetricValue MetricsReport::* member;
};

// Emission order; the first five rows mirror the benchmark table.
constexpr FieldRef kFields[] = {
    {"Average Latency (ms)", "latency_mean_ms", &MetricsReport::latency_mean_ms},
    {"Bandwidth Usage (GB/hour)", "bandwidth_gb_per_hour",
     &MetricsReport::bandwidth_gb_per_hour},
    {"Energy Consumption (kWh)", "energy_kwh", &MetricsReport::energy_kwh},
    {"Task Processing Time (s)", "proc_time_mean_s", &MetricsReport::proc_time_mean_s},
    {"Sensitive Data Processed Locally (%)", "sensitive_local_pct",
     &MetricsReport::sensitive_local_pct},
    {"Median Latency (ms)", "latency_median_ms", &MetricsReport::latency_median_ms},
    {"P95 Latency (ms)", "latency_p95_ms", &MetricsReport::latency_p95_ms},
    {"Edge Share (%)", "share_edge_pct", &MetricsReport::share_edge_pct},
    {"Fog Share (%)", "share_fog_pct", &MetricsReport::share_fog_pct},
    {"Cloud Share (%)", "share_cloud_pct", &MetricsReport::share_cloud_pct},
    {"Encryption Overhead (ms)", "enc_overhead_mean_ms",
     &MetricsReport::enc_overhead_mean_ms},
    {"Reroute Rate (%)", "reroute_pct", &MetricsReport::reroute_pct},
};

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", v);
  return buf;
}

}  // namespace

std::string privacy_risk_label(double sensitive_local_pct) {
  if (sensitive_local_pct >= 50.0) return "Low";
  if (sensitive_local_pct >= 20.0) return "Medium";
  return "High";
}

MetricsReport compute_metrics(std::span<const std::vector<TraceEvent>> traces,
                              double duration_s, const std::string& policy_name) {
  if (traces.empty()) {
    throw std::invalid_argument("compute_metrics: no traces (failed run upstream)");
  }
  std::vector<RepScalars> reps;
  reps.reserve(traces.size());
  for (const auto& t : traces) reps.push_back(scalars_for(t, duration_s));

  auto collect = [&reps](double RepScalars::* member) {
    std::vector<double> vals;
    vals.reserve(reps.size());
    for (const RepScalars& r : reps) vals.push_back(r.*member);
    return across(vals);
  };

  MetricsReport rep;
  rep.policy = policy_name;
  rep.replications = static_cast<int>(traces.size());
  rep.duration_s = duration_s;
  rep.latency_mean_ms = collect(&RepScalars::latency_mean_ms);
  rep.latency_median_ms = collect(&RepScalars::latency_median_ms);
  rep.latency_p95_ms = collect(&RepScalars::latency_p95_ms);
  rep.bandwidth_gb_per_hour = collect(&RepScalars::bandwidth_gb_per_hour);
  rep.energy_kwh = collect(&RepScalars::energy_kwh);
  rep.proc_time_mean_s = collect(&RepScalars::proc_time_mean_s);
  rep.share_edge_pct = collect(&RepScalars::share_edge_pct);
  rep.share_fog_pct = collect(&RepScalars::share_fog_pct);
  rep.share_cloud_pct = collect(&RepScalars::share_cloud_pct);
  rep.sensitive_local_pct = collect(&RepScalars::sensitive_local_pct);
  rep.enc_overhead_mean_ms = collect(&RepScalars::enc_overhead_mean_ms);
  rep.reroute_pct = collect(&RepScalars::reroute_pct);
  return rep;
}

ComparisonTable compare(const std::vector<MetricsReport>& reports,
                        const std::string& baseline) {
  const MetricsReport* base = nullptr;
  for (const MetricsReport& r : reports) {
    if (r.policy == baseline) {
      base = &r;
      break;
    }
  }
  if (!base) {
    throw std::invalid_argument("compare: unknown baseline policy '" + baseline + "'");
  }
  ComparisonTable table;
  table.baseline = baseline;
  for (const MetricsReport& r : reports) table.policies.push_back(r.policy);
  for (int i = 0; i < 5; ++i) {  // the benchmark-table rows
    const FieldRef& f = kFields[i];
    ComparisonRow row;
    row.label = f.label;
    row.field = f.field;
    const double base_val = (base->*(f.member)).mean;
    for (const MetricsReport& r : reports) {
      const double v = (r.*(f.member)).mean;
      row.values.push_back(v);
      row.delta_pct.push_back(base_val != 0.0 ? 100.0 * (base_val - v) / base_val : 0.0);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::optional<ReportFormat> report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

const char* to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Markdown: return "markdown";
  }
  return "?";
}

std::string emit(const MetricsReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::ordered_json j;
      j["policy"] = report.policy;
      j["replications"] = report.replications;
      j["duration_s"] = report.duration_s;
      for (const FieldRef& f : kFields) {
        const MetricValue& mv = report.*(f.member);
        j[f.field] = mv.mean;
        j[std::string(f.field) + "_stddev"] = mv.stddev;
      }
      j["privacy_risk"] = privacy_risk_label(report.sensitive_local_pct.mean);
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::ostringstream out;
      out << "metric,mean,stddev\n";
      out << "policy," << report.policy << ",\n";
      out << "replications," << report.replications << ",\n";
      out << "duration_s," << format_double(report.duration_s) << ",\n";
      for (const FieldRef& f : kFields) {
        const MetricValue& mv = report.*(f.member);
        out << f.field << ',' << format_double(mv.mean) << ',' << format_double(mv.stddev)
            << '\n';
      }
      out << "privacy_risk," << privacy_risk_label(report.sensitive_local_pct.mean)
          << ",\n";
      return out.str();
    }
    case ReportFormat::Markdown: {
      std::ostringstream out;
      out << "### Metrics: " << report.policy << " (" << report.replications
          << " replications, " << format_double(report.duration_s) << " s)\n\n";
      out << "| Metric | Mean | Std dev |\n|---|---|---|\n";
      for (const FieldRef& f : kFields) {
        const MetricValue& mv = report.*(f.member);
        out << "| " << f.label << " | " << format_double(mv.mean) << " | "
            << format_double(mv.stddev) << " |\n";
      }
      out << "| Privacy Risk | " << privacy_risk_label(report.sensitive_local_pct.mean)
          << " | |\n";
      return out.str();
    }
  }
  throw std::invalid_argument("emit: unknown format");
}

std::string emit(const ComparisonTable& table, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::ordered_json j;
      j["baseline"] = table.baseline;
      j["policies"] = table.policies;
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const ComparisonRow& row : table.rows) {
        nlohmann::ordered_json r;
        r["label"] = row.label;
        r["field"] = row.field;
        nlohmann::ordered_json values, deltas;
        for (std::size_t i = 0; i < table.policies.size(); ++i) {
          values[table.policies[i]] = row.values[i];
          deltas[table.policies[i]] = row.delta_pct[i];
        }
        r["values"] = values;
        r["delta_pct_vs_baseline"] = deltas;
        rows.push_back(r);
      }
      j["rows"] = rows;
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::ostringstream out;
      out << "metric,policy,value,delta_pct_vs_baseline\n";
      for (const ComparisonRow& row : table.rows) {
        for (std::size_t i = 0; i < table.policies.size(); ++i) {
          out << row.field << ',' << table.policies[i] << ','
              << format_double(row.values[i]) << ',' << format_double(row.delta_pct[i])
              << '\n';
        }
      }
      return out.str();
    }
    case ReportFormat::Markdown: {
      std::ostringstream out;
      out << "### Policy comparison (baseline: " << table.baseline << ")\n\n";
      out << "| Metric |";
      for (const std::string& p : table.policies) {
        out << ' ' << p << (p == table.baseline ? " (baseline)" : "") << " |";
      }
      out << "\n|---|";
      for (std::size_t i = 0; i < table.policies.size(); ++i) out << "---|";
      out << '\n';
      for (const ComparisonRow& row : table.rows) {
        out << "| " << row.label << " |";
        for (std::size_t i = 0; i < table.policies.size(); ++i) {
          out << ' ' << format_double(row.values[i]);
          if (table.policies[i] != table.baseline) {
            out << " (" << format_pct(row.delta_pct[i]) << ")";
          }
          out << " |";
        }
        out << '\n';
      }
      return out.str();
    }
  }
  throw std::invalid_argument("emit: unknown format");
}

MetricsReport parse_report_csv(const std::string& text) {
  MetricsReport rep;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument("report csv: malformed row: " + line);
    }
    const std::string key = line.substr(0, c1);
    const std::string mean_s = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string sd_s = line.substr(c2 + 1);
    if (key == "policy") {
      rep.policy = mean_s;
      continue;
    }
    if (key == "privacy_risk") continue;
    if (key == "replications") {
      rep.replications = std::stoi(mean_s);
      continue;
    }
    if (key == "duration_s") {
      rep.duration_s = std::strtod(mean_s.c_str(), nullptr);
      continue;
    }
    for (const FieldRef& f : kFields) {
      if (key == f.field) {
        (rep.*(f.member)).mean = std::strtod(mean_s.c_str(), nullptr);
        (rep.*(f.member)).stddev = std::strtod(sd_s.c_str(), nullptr);
        break;
      }
    }
  }
  return rep;
}

}  // namespace ofsim
