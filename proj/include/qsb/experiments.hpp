#pragma once

#include <map>
#include <string>
#include <vector>

#include "qsb/config.hpp"

namespace qsb {

struct MetricValue {
  bool is_series = false;
  double scalar = 0.0;
  std::vector<double> series;

  static MetricValue of(double v) { return {false, v, {}}; }
  static MetricValue of_series(std::vector<double> v) {
    return {true, 0.0, std::move(v)};
  }
};

struct SweepPoint {
  double value = 0.0;
  std::map<std::string, MetricValue> metrics;
};

struct ResultRecord {
  std::string experiment;
  std::string build_id;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double wall_seconds = 0.0;
  std::string output_prefix;  // from the config; experiment name when empty
  std::string config_echo;    // resolved configuration, JSON text
  std::map<std::string, MetricValue> metrics;
  std::string sweep_name;
  std::vector<SweepPoint> sweep;
};

const std::vector<std::string>& experiment_names();

// Dispatches to the named experiment. Experiment-level errors are embedded in
// the record's status; config errors throw.
ResultRecord run_experiment(const ExperimentConfig& cfg);

std::string render_record_json(const ResultRecord& record);
std::string render_sweep_csv(const ResultRecord& record);

// Writes <prefix>.record.json and <prefix>.<sweepname>.csv; prefix is the
// config's output prefix (or the experiment name) under output_dir.
std::vector<std::string> write_outputs(const ResultRecord& record,
                                       const std::string& output_dir);

// Least-squares slope of log(y) against log(x); used by the O(.) trend gates.
double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);
// Least-squares slope of log(y) against x.
double fit_semilog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace qsb
