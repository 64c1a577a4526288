#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hgf/config.hpp"
#include "hgf/inference.hpp"
#include "hgf/io.hpp"
#include "hgf/plot.hpp"
#include "hgf/presets.hpp"
#include "hgf/response.hpp"
#include "hgf/rng.hpp"
#include "hgf/task.hpp"

namespace fs = std::filesystem;

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
  fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw hgf::IoError("cannot create directory '" + dir + "'");
  return (root / name).string();
}

hgf::SubjectData load_subject(const hgf::ModelConfig& config,
                              const hgf::Model& model,
                              const std::string& data_path,
                              bool need_actions) {
  const hgf::TimeSeriesData data = hgf::read_timeseries_csv(data_path);
  hgf::SubjectData subject;
  subject.inputs = hgf::bind_series(data, model.network, config.observation_nodes);
  subject.actions = subject.inputs.actions;
  if (need_actions && subject.actions.empty()) {
    throw hgf::ValidationError("'" + data_path +
                               "' has no action column 'y'; fitting needs one");
  }
  return subject;
}

void print_summary(const hgf::SummaryTable& table) {
  std::printf("%-20s %10s %10s %10s %10s %10s %8s\n", "parameter", "mean", "sd",
              "hdi_low", "hdi_high", "ess_bulk", "rhat");
  for (const hgf::ParameterSummary& row : table.rows) {
    std::printf("%-20s %10.4f %10.4f %10.4f %10.4f %10.1f %8.4f\n",
                row.name.c_str(), row.mean, row.sd, row.hdi_low, row.hdi_high,
                row.ess_bulk, row.rhat);
  }
}

struct SamplerFlags {
  int chains = 0;
  int draws = 0;
  int warmup = 0;
  long seed = -1;
  int workers = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--chains", chains, "Number of chains");
    cmd->add_option("--draws", draws, "Post-warmup draws per chain");
    cmd->add_option("--warmup", warmup, "Warmup iterations per chain");
    cmd->add_option("--seed", seed, "Sampler seed");
    cmd->add_option("--workers", workers, "Chain worker threads (0 = one per chain)");
  }

  hgf::SamplerOptions resolve(const hgf::SamplerConfig& base) const {
    hgf::SamplerOptions options;
    options.chains = chains > 0 ? chains : base.chains;
    options.draws = draws > 0 ? draws : base.draws;
    options.warmup = warmup > 0 ? warmup : base.warmup;
    options.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : base.seed;
    options.workers = workers;
    return options;
  }
};

std::vector<double> posterior_means(const hgf::PosteriorSamples& samples) {
  std::vector<double> means(static_cast<std::size_t>(samples.parameters()), 0.0);
  for (int p = 0; p < samples.parameters(); ++p) {
    const std::vector<double> pooled = samples.pooled(p);
    double sum = 0.0;
    for (double v : pooled) sum += v;
    means[static_cast<std::size_t>(p)] = sum / static_cast<double>(pooled.size());
  }
  return means;
}

int run_simulate(const std::string& config_path, long trials, long seed,
                 const std::string& out, bool plot) {
  const hgf::ModelConfig config = hgf::load_model_config(config_path);
  const hgf::Model model = hgf::build_model(config);
  if (config.observation_nodes.size() != 1) {
    throw hgf::ValidationError("simulate drives a single observation node");
  }
  const int node = config.observation_nodes[0];
  if (model.network.kinds[static_cast<std::size_t>(node)] != hgf::NodeKind::Binary) {
    throw hgf::ValidationError("simulate needs a binary observation node");
  }

  const std::vector<double> u =
      hgf::switching_task(trials, static_cast<std::uint64_t>(seed));
  const hgf::InputSeries series = hgf::series_from_column(u, node);
  const hgf::RunResult result = hgf::run(model.network, series);
  const std::vector<int> actions = hgf::simulate_actions(
      result.trajectory, model.response,
      hgf::Rng::derive(static_cast<std::uint64_t>(seed), 1));

  hgf::TimeSeriesData data;
  data.u.push_back(u);
  data.y = actions;
  data.rows = trials;
  hgf::write_data_csv(data, out_path(out, "data.csv"));
  hgf::write_trajectory_csv(result.trajectory, out_path(out, "trajectory.csv"));
  if (plot) {
    hgf::write_trajectory_svg(result.trajectory, out_path(out, "trajectory.svg"));
  }
  std::printf("simulated %ld trials of '%s' into %s\n", trials,
              config.name.c_str(), out.c_str());
  return 0;
}

int run_fit(const std::string& config_path, const std::string& data_path,
            const std::string& out, long seed) {
  const hgf::ModelConfig config = hgf::load_model_config(config_path);
  const hgf::Model model = hgf::build_model(config);
  const hgf::ParameterSpace space = hgf::build_space(config);
  const hgf::SubjectData subject = load_subject(config, model, data_path, true);

  hgf::MapOptions options;
  if (seed >= 0) options.seed = static_cast<std::uint64_t>(seed);
  const hgf::MapEstimate estimate = hgf::map_fit(space, subject, model, options);

  nlohmann::json doc;
  doc["log_posterior"] = estimate.log_posterior;
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < estimate.names.size(); ++i) {
    params[estimate.names[i]] = estimate.values[i];
  }
  doc["parameters"] = std::move(params);
  hgf::write_text_file(out_path(out, "map.json"), doc.dump(2) + "\n");

  std::printf("%-20s %12s\n", "parameter", "map");
  for (std::size_t i = 0; i < estimate.names.size(); ++i) {
    std::printf("%-20s %12.5f\n", estimate.names[i].c_str(), estimate.values[i]);
  }
  std::printf("log posterior %.5f\n", estimate.log_posterior);
  return 0;
}

int run_sample(const std::string& config_path, const std::string& data_path,
               const std::string& out, const SamplerFlags& flags, bool plot,
               bool trajectory) {
  const hgf::ModelConfig config = hgf::load_model_config(config_path);
  const hgf::Model model = hgf::build_model(config);
  const hgf::ParameterSpace space = hgf::build_space(config);
  const hgf::SubjectData subject = load_subject(config, model, data_path, true);

  const hgf::SamplerOptions options = flags.resolve(config.sampler);
  const hgf::PosteriorSamples samples = hgf::sample(space, subject, model, options);
  const hgf::SummaryTable table = hgf::summarize(samples, config.sampler.hdi_mass);

  hgf::write_samples_csv(samples, out_path(out, "samples.csv"));
  hgf::SamplerConfig used;
  used.chains = options.chains;
  used.draws = options.draws;
  used.warmup = options.warmup;
  used.seed = options.seed;
  used.hdi_mass = config.sampler.hdi_mass;
  hgf::write_summary_json(table, samples, used, out_path(out, "summary.json"));

  if (trajectory || plot) {
    hgf::Network net = model.network;
    hgf::ResponseModel response = model.response;
    space.apply(posterior_means(samples), net, response);
    const hgf::RunResult result = hgf::run(net, subject.inputs);
    hgf::write_trajectory_csv(result.trajectory, out_path(out, "trajectory.csv"));
    if (plot) {
      hgf::write_trajectory_svg(result.trajectory, out_path(out, "trajectory.svg"));
    }
  }
  print_summary(table);
  return 0;
}

int run_recover(const std::string& config_path, int subjects, long trials,
                long seed, int workers, const std::string& out) {
  const hgf::ModelConfig config = hgf::load_model_config(config_path);
  const hgf::Model model = hgf::build_model(config);
  hgf::ParameterSpace space;
  if (!config.space.empty()) {
    space = hgf::build_space(config);
    if (space.size() != 2) {
      throw hgf::ValidationError(
          "recovery expects two inferred parameters: a volatility, then an "
          "inverse temperature");
    }
  } else {
    space = hgf::default_recovery_space(model.network.size() >= 2 ? 1 : 0);
  }

  hgf::RecoveryOptions options;
  options.subjects = subjects;
  options.trials = trials;
  if (seed >= 0) options.seed = static_cast<std::uint64_t>(seed);
  options.workers = workers > 0 ? workers : 1;
  const hgf::RecoveryReport report = hgf::recover(model, space, options);

  hgf::write_recovery_csv(report, out_path(out, "recovery.csv"));
  hgf::write_recovery_json(report, out_path(out, "recovery.json"));

  int excluded = 0;
  for (const hgf::RecoverySubject& s : report.subjects) excluded += s.excluded;
  std::printf("recovery over %d subjects (%d excluded)\n", subjects, excluded);
  std::printf("r(omega)           %8.4f\n", report.r_omega);
  std::printf("r(log temperature) %8.4f\n", report.r_log_temperature);
  return 0;
}

int run_compare(const std::vector<std::string>& config_paths,
                const std::string& data_path, const std::string& out,
                const SamplerFlags& flags) {
  if (config_paths.size() < 2) {
    throw hgf::ValidationError("compare needs at least two --config files");
  }
  std::vector<hgf::ModelConfig> configs;
  std::vector<hgf::Model> models;
  std::vector<hgf::ParameterSpace> spaces;
  std::vector<std::string> names;
  for (const std::string& path : config_paths) {
    configs.push_back(hgf::load_model_config(path));
    models.push_back(hgf::build_model(configs.back()));
    spaces.push_back(hgf::build_space(configs.back()));
    names.push_back(configs.back().name);
    if (configs.back().observation_nodes != configs.front().observation_nodes) {
      throw hgf::ValidationError(
          "compared models must share their observation nodes");
    }
  }
  const hgf::SubjectData subject =
      load_subject(configs.front(), models.front(), data_path, true);

  std::vector<hgf::PosteriorSamples> samples;
  for (std::size_t m = 0; m < models.size(); ++m) {
    hgf::SamplerOptions options = flags.resolve(configs[m].sampler);
    // Fixed per-model offset keeps reruns reproducible whatever the order.
    options.seed = hgf::Rng::derive(options.seed, 500 + m);
    samples.push_back(hgf::sample(spaces[m], subject, models[m], options));
  }
  const hgf::ComparisonReport report =
      hgf::compare(names, models, spaces, subject, samples);
  hgf::write_comparison_json(report, out_path(out, "comparison.json"));

  std::printf("%-20s %6s %12s %10s %10s %12s\n", "model", "rank", "elpd",
              "penalty", "elpd_se", "se_diff_best");
  for (const hgf::ModelScore& score : report.models) {
    std::printf("%-20s %6d %12.3f %10.3f %10.3f %12.3f\n", score.name.c_str(),
                score.rank, score.elpd, score.penalty, score.elpd_se,
                score.se_diff_best);
  }
  return 0;
}

int run_plot(const std::string& trajectory_path, const std::string& out) {
  const hgf::Trajectory traj = hgf::read_trajectory_csv(trajectory_path);
  fs::path target(out);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) {
      throw hgf::IoError("cannot create directory '" +
                         target.parent_path().string() + "'");
    }
  }
  hgf::write_trajectory_svg(traj, out);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic belief networks: simulate, fit, sample, compare"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> config_paths;
  std::string data_path;
  std::string out = ".";
  std::string trajectory_path;
  long trials = 320;
  long seed = -1;
  int subjects = 50;
  int workers = 1;
  bool plot = false;
  bool trajectory = false;
  SamplerFlags flags;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Simulate task outcomes, beliefs and actions from a model");
  simulate->add_option("--config", config_path, "Model file")->required();
  simulate->add_option("--trials", trials, "Number of trials");
  simulate->add_option("--seed", seed, "Simulation seed");
  simulate->add_option("--out", out, "Output directory");
  simulate->add_flag("--plot", plot, "Also write trajectory.svg");

  CLI::App* fit = app.add_subcommand("fit", "MAP fit of a model to one subject");
  fit->add_option("--config", config_path, "Model file")->required();
  fit->add_option("--data", data_path, "Subject CSV with u and y columns")
      ->required();
  fit->add_option("--out", out, "Output directory");
  fit->add_option("--seed", seed, "Restart seed");

  CLI::App* sample =
      app.add_subcommand("sample", "Posterior sampling for one subject");
  sample->add_option("--config", config_path, "Model file")->required();
  sample->add_option("--data", data_path, "Subject CSV with u and y columns")
      ->required();
  sample->add_option("--out", out, "Output directory");
  flags.add(sample);
  sample->add_flag("--plot", plot, "Write the posterior-mean trajectory SVG");
  sample->add_flag("--trajectory", trajectory,
                   "Write the posterior-mean trajectory CSV");

  CLI::App* recover = app.add_subcommand(
      "recover", "Simulate subjects from known parameters and refit them");
  recover->add_option("--config", config_path, "Model file")->required();
  recover->add_option("--subjects", subjects, "Number of simulated subjects");
  recover->add_option("--trials", trials, "Trials per subject");
  recover->add_option("--seed", seed, "Recovery seed");
  recover->add_option("--workers", workers, "Fit worker threads");
  recover->add_option("--out", out, "Output directory");

  CLI::App* compare = app.add_subcommand(
      "compare", "Sample several models on shared data and rank them");
  compare->add_option("--config", config_paths, "Model files (repeat)")
      ->required();
  compare->add_option("--data", data_path, "Subject CSV with u and y columns")
      ->required();
  compare->add_option("--out", out, "Output directory");
  flags.add(compare);

  CLI::App* plot_cmd =
      app.add_subcommand("plot", "Render a trajectory CSV as an SVG");
  plot_cmd->add_option("--trajectory", trajectory_path, "Trajectory CSV")
      ->required();
  plot_cmd->add_option("--out", out, "Output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return run_simulate(config_path, trials, seed >= 0 ? seed : 1, out, plot);
    }
    if (fit->parsed()) return run_fit(config_path, data_path, out, seed);
    if (sample->parsed()) {
      return run_sample(config_path, data_path, out, flags, plot, trajectory);
    }
    if (recover->parsed()) {
      return run_recover(config_path, subjects, trials, seed, workers, out);
    }
    if (compare->parsed()) {
      return run_compare(config_paths, data_path, out, flags);
    }
    if (plot_cmd->parsed()) return run_plot(trajectory_path, out);
  } catch (const hgf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
