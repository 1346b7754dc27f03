#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tsgraph {

/// Precision/recall/accuracy for one positive-class convention. A
/// zero-denominator metric is reported as 0 with the flag set.
struct MetricsBlock {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  bool zero_division = false;
};

/// Both conventions; accuracy is identical across them by construction.
struct Metrics {
  MetricsBlock positive1;
  MetricsBlock positive0;
};

Metrics evaluate_binary(const std::vector<int>& pred, const std::vector<int>& truth);

struct AggregateStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct AggregatedBlock {
  AggregateStat precision, recall, accuracy;
};

/// Mean and population std over retained runs; for exactly 10 runs the best
/// and worst by accuracy are dropped first.
struct Report {
  AggregatedBlock positive1;
  AggregatedBlock positive0;
  std::size_t runs_total = 0;
  std::size_t runs_used = 0;
  bool extremes_dropped = false;
};

Report aggregate_runs(const std::vector<Metrics>& runs);
Report aggregate_runs(const std::vector<Metrics>& runs, bool drop_extremes);

std::string render_metrics(const Metrics& m, const std::string& title);
std::string render_report(const Report& r, const std::string& title);

void save_metrics_json(const Metrics& m, const std::filesystem::path& path);
Metrics load_metrics_json(const std::filesystem::path& path);
void save_report_json(const Report& r, const std::filesystem::path& path);

}  // namespace tsgraph
