#pragma once

#include <string>
#include <vector>

#include "hgf/config.hpp"
#include "hgf/inference.hpp"
#include "hgf/network.hpp"

namespace hgf {

// Shortest decimal string that round-trips to the same double. Integral
// values print without an exponent; NaN prints as the empty marker handled
// by the CSV readers.
std::string format_double(double value);

// --- time-series input -------------------------------------------------------

// Columns: optional "time", observation columns "u" or "u1".."uN", optional
// action column "y". Empty cells are missing values. Errors carry the
// 1-based data row: unknown headers, unparseable numbers, a non-increasing
// time column, actions other than 0/1.
struct TimeSeriesData {
  std::vector<double> time;            // empty when absent
  std::vector<std::vector<double>> u;  // one vector per u column, NaN missing
  std::vector<int> y;                  // empty when absent, -1 missing
  long rows = 0;
};

TimeSeriesData read_timeseries_csv(const std::string& path);

// Pairs the u columns with observation nodes (counts must match; binary
// nodes require 0/1 values, reported with their row).
InputSeries bind_series(const TimeSeriesData& data, const Network& net,
                        const std::vector<int>& observation_nodes);

void write_data_csv(const TimeSeriesData& data, const std::string& path);

// --- artifacts ---------------------------------------------------------------
// All writers emit UTF-8 with LF endings and shortest round-trip floats, so
// identical runs produce byte-identical files. JSON objects keep their keys
// sorted.

// One row per step per node: step, time, dt, node, kind, mean, precision,
// expected_mean, expected_precision, observation, surprise.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

// Long format: chain, draw, then one column per parameter.
void write_samples_csv(const PosteriorSamples& samples, const std::string& path);

void write_summary_json(const SummaryTable& table, const PosteriorSamples& samples,
                        const SamplerConfig& sampler, const std::string& path);

void write_comparison_json(const ComparisonReport& report, const std::string& path);

void write_recovery_csv(const RecoveryReport& report, const std::string& path);
void write_recovery_json(const RecoveryReport& report, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace hgf
