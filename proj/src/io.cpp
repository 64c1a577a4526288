#include "hgf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hgf {

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == std::floor(value) && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

namespace {

[[noreturn]] void row_fail(long row, const std::string& message) {
  throw IngestionError("row " + std::to_string(row) + ": " + message);
}

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) ++begin;
  while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t')) --end;
  return s.substr(begin, end - begin);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_cell(const std::string& cell, long row, const std::string& column) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    row_fail(row, "cannot parse '" + cell + "' in column '" + column + "'");
  }
  return value;
}

}  // namespace

TimeSeriesData read_timeseries_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw IngestionError("'" + path + "' is empty");

  const std::vector<std::string> header = split_line(lines[0]);
  int time_col = -1;
  int y_col = -1;
  std::vector<std::pair<int, int>> u_cols;  // (column, 1-based u index or 0)
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& name = header[c];
    if (name == "time") {
      if (time_col >= 0) throw IngestionError("header: duplicate column 'time'");
      time_col = c;
    } else if (name == "y") {
      if (y_col >= 0) throw IngestionError("header: duplicate column 'y'");
      y_col = c;
    } else if (name == "u") {
      u_cols.emplace_back(c, 0);
    } else if (name.size() > 1 && name[0] == 'u') {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1,
                                       name.data() + name.size(), index);
      if (ec != std::errc() || ptr != name.data() + name.size() || index < 1) {
        throw IngestionError("header: unknown column '" + name + "'");
      }
      u_cols.emplace_back(c, index);
    } else {
      throw IngestionError("header: unknown column '" + name + "'");
    }
  }
  if (u_cols.empty()) {
    throw IngestionError("header: need at least one observation column 'u'");
  }
  if (u_cols.size() == 1) {
    if (u_cols[0].second > 1) {
      throw IngestionError("header: a single observation column is 'u' or 'u1'");
    }
  } else {
    for (int i = 0; i < static_cast<int>(u_cols.size()); ++i) {
      if (u_cols[i].second != i + 1) {
        throw IngestionError(
            "header: observation columns must be named u1..uN in order");
      }
    }
  }

  TimeSeriesData data;
  data.u.resize(u_cols.size());
  data.rows = static_cast<long>(lines.size()) - 1;
  if (data.rows == 0) throw IngestionError("'" + path + "' has no data rows");

  for (long r = 1; r <= data.rows; ++r) {
    const std::vector<std::string> cells = split_line(lines[r]);
    if (cells.size() != header.size()) {
      row_fail(r, "expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    if (time_col >= 0) {
      const std::string& cell = cells[time_col];
      if (cell.empty()) row_fail(r, "missing time");
      const double t = parse_cell(cell, r, "time");
      if (data.time.empty()) {
        if (!(t > 0.0)) row_fail(r, "time must be positive");
      } else if (!(t > data.time.back())) {
        row_fail(r, "time must increase");
      }
      data.time.push_back(t);
    }
    for (std::size_t k = 0; k < u_cols.size(); ++k) {
      const std::string& cell = cells[u_cols[k].first];
      data.u[k].push_back(cell.empty()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : parse_cell(cell, r, header[u_cols[k].first]));
    }
    if (y_col >= 0) {
      const std::string& cell = cells[y_col];
      if (cell.empty()) {
        data.y.push_back(-1);
      } else {
        const double y = parse_cell(cell, r, "y");
        if (y != 0.0 && y != 1.0) row_fail(r, "actions must be 0 or 1");
        data.y.push_back(static_cast<int>(y));
      }
    }
  }
  return data;
}

InputSeries bind_series(const TimeSeriesData& data, const Network& net,
                        const std::vector<int>& observation_nodes) {
  if (data.u.size() != observation_nodes.size()) {
    throw AlignmentError(
        "data has " + std::to_string(data.u.size()) +
        " observation columns but " + std::to_string(observation_nodes.size()) +
        " observation nodes are declared");
  }
  std::set<int> seen;
  for (int node : observation_nodes) {
    if (node < 0 || node >= net.size()) {
      throw IndexError("observation node " + std::to_string(node) +
                       " does not exist");
    }
    if (!seen.insert(node).second) {
      throw ValidationError("observation node " + std::to_string(node) +
                            " is declared twice");
    }
  }
  InputSeries series;
  series.time = data.time;
  series.actions = data.y;
  for (std::size_t k = 0; k < data.u.size(); ++k) {
    const int node = observation_nodes[k];
    if (net.kinds[static_cast<std::size_t>(node)] == NodeKind::Binary) {
      for (std::size_t r = 0; r < data.u[k].size(); ++r) {
        const double v = data.u[k][r];
        if (!std::isnan(v) && v != 0.0 && v != 1.0) {
          row_fail(static_cast<long>(r) + 1,
                   "node " + std::to_string(node) +
                       " is binary; observations must be 0 or 1");
        }
      }
    }
    series.observations.emplace_back(node, data.u[k]);
  }
  return series;
}

void write_data_csv(const TimeSeriesData& data, const std::string& path) {
  std::string out;
  bool first = true;
  auto column = [&](const std::string& name) {
    if (!first) out += ',';
    out += name;
    first = false;
  };
  if (!data.time.empty()) column("time");
  if (data.u.size() == 1) {
    column("u");
  } else {
    for (std::size_t k = 0; k < data.u.size(); ++k) {
      column("u" + std::to_string(k + 1));
    }
  }
  if (!data.y.empty()) column("y");
  out += '\n';
  for (long r = 0; r < data.rows; ++r) {
    first = true;
    auto cell = [&](const std::string& text) {
      if (!first) out += ',';
      out += text;
      first = false;
    };
    if (!data.time.empty()) cell(format_double(data.time[r]));
    for (const std::vector<double>& u : data.u) cell(format_double(u[r]));
    if (!data.y.empty()) {
      cell(data.y[r] < 0 ? std::string() : std::to_string(data.y[r]));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

// --- trajectory --------------------------------------------------------------

namespace {
constexpr const char* kTrajectoryHeader =
    "step,time,dt,node,kind,mean,precision,expected_mean,expected_precision,"
    "observation,surprise";
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (long s = 0; s < traj.steps(); ++s) {
    for (int k = 0; k < traj.node_count(); ++k) {
      const NodeTrace& trace = traj.nodes[static_cast<std::size_t>(k)];
      out += std::to_string(s + 1);
      out += ',';
      out += format_double(traj.time[static_cast<std::size_t>(s)]);
      out += ',';
      out += format_double(traj.dt[static_cast<std::size_t>(s)]);
      out += ',';
      out += std::to_string(k);
      out += ',';
      out += to_string(traj.kinds[static_cast<std::size_t>(k)]);
      const double cells[] = {trace.mean[s],          trace.precision[s],
                              trace.expected_mean[s], trace.expected_precision[s],
                              trace.observation[s],   trace.surprise[s]};
      for (double value : cells) {
        out += ',';
        out += format_double(value);
      }
      out += '\n';
    }
  }
  write_text_file(path, out);
}

Trajectory read_trajectory_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != kTrajectoryHeader) {
    throw IngestionError("'" + path + "' is not a trajectory file");
  }
  Trajectory traj;
  long expected_step = 1;
  int expected_node = 0;
  int node_count = -1;  // frozen when the second step begins
  for (long r = 1; r < static_cast<long>(lines.size()); ++r) {
    const std::vector<std::string> cells = split_line(lines[r]);
    if (cells.size() != 11) row_fail(r, "expected 11 fields");
    const long step = static_cast<long>(parse_cell(cells[0], r, "step"));
    const int node = static_cast<int>(parse_cell(cells[3], r, "node"));
    if (node_count < 0 && step != 1) {
      node_count = expected_node;
      if (node_count == 0) row_fail(r, "the first step is missing");
      expected_step = 2;
      expected_node = 0;
    } else if (node_count >= 0 && expected_node == node_count) {
      ++expected_step;
      expected_node = 0;
    }
    if (step != expected_step || node != expected_node) {
      row_fail(r, "rows must advance node-major within each step");
    }
    if (node_count < 0) {
      NodeKind kind;
      if (cells[4] == "binary") {
        kind = NodeKind::Binary;
      } else if (cells[4] == "continuous") {
        kind = NodeKind::Continuous;
      } else {
        row_fail(r, "unknown kind '" + cells[4] + "'");
      }
      traj.kinds.push_back(kind);
      traj.nodes.emplace_back();
    } else if (cells[4] != to_string(traj.kinds[static_cast<std::size_t>(node)])) {
      row_fail(r, "node kind changed between steps");
    }
    if (node == 0) {
      traj.time.push_back(parse_cell(cells[1], r, "time"));
      traj.dt.push_back(parse_cell(cells[2], r, "dt"));
    }
    auto numeric = [&](int c, const char* name) {
      return cells[c].empty() ? std::numeric_limits<double>::quiet_NaN()
                              : parse_cell(cells[c], r, name);
    };
    NodeTrace& trace = traj.nodes[static_cast<std::size_t>(node)];
    trace.mean.push_back(numeric(5, "mean"));
    trace.precision.push_back(numeric(6, "precision"));
    trace.expected_mean.push_back(numeric(7, "expected_mean"));
    trace.expected_precision.push_back(numeric(8, "expected_precision"));
    trace.observation.push_back(numeric(9, "observation"));
    trace.surprise.push_back(numeric(10, "surprise"));
    ++expected_node;
  }
  if (node_count < 0) node_count = expected_node;  // single-step file
  if (node_count <= 0 || expected_node != node_count) {
    throw IngestionError("'" + path + "' ends mid-step");
  }
  return traj;
}

// --- samples and reports -----------------------------------------------------

void write_samples_csv(const PosteriorSamples& samples, const std::string& path) {
  std::string out = "chain,draw";
  for (const std::string& name : samples.names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (int c = 0; c < samples.chains(); ++c) {
    for (int d = 0; d < samples.iterations(); ++d) {
      out += std::to_string(c);
      out += ',';
      out += std::to_string(d);
      for (double value : samples.draws[c][d]) {
        out += ',';
        out += format_double(value);
      }
      out += '\n';
    }
  }
  write_text_file(path, out);
}

void write_summary_json(const SummaryTable& table, const PosteriorSamples& samples,
                        const SamplerConfig& sampler, const std::string& path) {
  nlohmann::json doc;
  doc["hdi_mass"] = table.hdi_mass;
  nlohmann::json params = nlohmann::json::object();
  for (const ParameterSummary& row : table.rows) {
    nlohmann::json entry;
    entry["mean"] = row.mean;
    entry["sd"] = row.sd;
    entry["hdi_low"] = row.hdi_low;
    entry["hdi_high"] = row.hdi_high;
    entry["ess_bulk"] = row.ess_bulk;
    entry["rhat"] = row.rhat;
    entry["mcse_mean"] = row.mcse_mean;
    params[row.name] = std::move(entry);
  }
  doc["parameters"] = std::move(params);
  nlohmann::json meta;
  meta["chains"] = sampler.chains;
  meta["draws"] = sampler.draws;
  meta["warmup"] = sampler.warmup;
  meta["seed"] = sampler.seed;
  meta["acceptance"] = samples.acceptance;
  doc["sampler"] = std::move(meta);
  write_text_file(path, doc.dump(2) + "\n");
}

void write_comparison_json(const ComparisonReport& report, const std::string& path) {
  nlohmann::json doc;
  doc["estimator"] = report.estimator;
  doc["trials"] = report.trials;
  nlohmann::json models = nlohmann::json::array();
  for (const ModelScore& score : report.models) {
    nlohmann::json entry;
    entry["name"] = score.name;
    entry["rank"] = score.rank;
    entry["elpd"] = score.elpd;
    entry["penalty"] = score.penalty;
    entry["elpd_se"] = score.elpd_se;
    entry["se_diff_best"] = score.se_diff_best;
    entry["pointwise_lppd"] = score.pointwise_lppd;
    entry["pointwise_penalty"] = score.pointwise_penalty;
    models.push_back(std::move(entry));
  }
  doc["models"] = std::move(models);
  write_text_file(path, doc.dump(2) + "\n");
}

namespace {

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

void write_recovery_csv(const RecoveryReport& report, const std::string& path) {
  std::string out =
      "subject,true_omega,fit_omega,true_temperature,fit_temperature,"
      "at_bound,excluded,note\n";
  for (std::size_t i = 0; i < report.subjects.size(); ++i) {
    const RecoverySubject& s = report.subjects[i];
    out += std::to_string(i);
    out += ',';
    out += format_double(s.true_omega);
    out += ',';
    out += format_double(s.fit_omega);
    out += ',';
    out += format_double(s.true_temperature);
    out += ',';
    out += format_double(s.fit_temperature);
    out += ',';
    out += s.at_bound ? '1' : '0';
    out += ',';
    out += s.excluded ? '1' : '0';
    out += ',';
    out += csv_quote(s.note);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_recovery_json(const RecoveryReport& report, const std::string& path) {
  nlohmann::json doc;
  doc["subjects"] = report.subjects.size();
  doc["r_omega"] = report.r_omega;
  doc["r_log_temperature"] = report.r_log_temperature;
  nlohmann::json excluded = nlohmann::json::array();
  nlohmann::json at_bound = nlohmann::json::array();
  for (std::size_t i = 0; i < report.subjects.size(); ++i) {
    if (report.subjects[i].excluded) excluded.push_back(i);
    if (report.subjects[i].at_bound) at_bound.push_back(i);
  }
  doc["excluded"] = std::move(excluded);
  doc["at_bound"] = std::move(at_bound);
  write_text_file(path, doc.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace hgf
