// Release gate: twelve checks, one line each, nonzero exit on any failure.
// Usage: acceptance --cli <path-to-hgf-binary> --workdir <scratch-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hgf/config.hpp"
#include "hgf/inference.hpp"
#include "hgf/io.hpp"
#include "hgf/network.hpp"
#include "hgf/presets.hpp"
#include "hgf/response.hpp"
#include "hgf/rng.hpp"
#include "hgf/task.hpp"
#include "hgf/updates.hpp"

using namespace hgf;

namespace {

std::string g_cli;
std::filesystem::path g_workdir;

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }
  void close(double value, double target, double tolerance,
             const std::string& what) {
    if (std::fabs(value - target) <= tolerance) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: got %.17g, want %.17g", what.c_str(),
                  value, target);
    require(false, buf);
  }
};

Model binary2_model(double omega, double temperature) {
  Model model;
  model.network = preset("binary-2");
  set_attribute(model.network, "node.1.tonic_volatility", omega);
  model.response.family = "temperature-sigmoid";
  model.response.inverse_temperature = temperature;
  return model;
}

SubjectData simulate_subject(const Model& model, long trials,
                             std::uint64_t task_seed,
                             std::uint64_t action_seed) {
  SubjectData data;
  data.inputs = series_from_column(switching_task(trials, task_seed), 0);
  const RunResult result = run(model.network, data.inputs);
  data.actions = simulate_actions(result.trajectory, model.response, action_seed);
  data.inputs.actions = data.actions;
  return data;
}

double mean_of(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

// --- criteria ----------------------------------------------------------------

void one_step_binary(Check& c) {
  Network net = preset("binary-2");
  set_attribute(net, "node.1.tonic_volatility", -2.0);
  net = propagate(std::move(net), {{0, 1.0}}, 1.0);
  c.close(get_attribute(net, "node.1.expected_precision"), 0.8807970779778823,
          1e-9, "expected precision");
  c.close(get_attribute(net, "node.1.precision"), 1.1307970779778822, 1e-9,
          "posterior precision");
  c.close(get_attribute(net, "node.1.mean"), 0.44216598162254866, 1e-9,
          "posterior mean");
  c.close(get_attribute(net, "node.0.expected_mean"), 0.5, 1e-9, "prediction");
  c.close(net.attributes[0].step.surprise, 0.6931471805599453, 1e-9, "surprise");
}

void one_step_continuous(Check& c) {
  Network net = new_network();
  NodeAttributes attrs;
  attrs.mean = 0.0;
  attrs.expected_mean = 0.0;
  attrs.precision = 1.0;
  attrs.expected_precision = 1.0;
  attrs.tonic_volatility = -2.0;
  net = add_node(std::move(net), NodeKind::Continuous, attrs);
  net.sequence = derive_update_sequence(net);
  net = propagate(std::move(net), {{0, 1.0}}, 1.0);
  c.close(get_attribute(net, "node.0.expected_precision"), 0.8807970779778823,
          1e-9, "expected precision");
  c.close(get_attribute(net, "node.0.mean"), 0.5316894691665188, 1e-9,
          "posterior mean");
  c.close(get_attribute(net, "node.0.precision"), 1.8807970779778822, 1e-9,
          "posterior precision");
  c.close(net.attributes[0].step.surprise, 1.5324056364611702, 1e-9, "surprise");
}

void surprise_normalization(Check& c) {
  Rng rng(331);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Network net = preset(t % 2 == 0 ? "binary-2" : "binary-3");
    for (int k = 1; k < net.size(); ++k) {
      set_attribute(net, "node." + std::to_string(k) + ".tonic_volatility",
                    -5.0 + 4.0 * rng.uniform());
    }
    std::vector<double> u(500);
    for (double& v : u) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const Trajectory traj =
        run(std::move(net), series_from_column(u, 0)).trajectory;
    for (long s = 0; s < 500; ++s) {
      const double p = traj.nodes[0].expected_mean[s];
      const double total = std::exp(-binary_surprise(p, 1.0)) +
                           std::exp(-binary_surprise(p, 0.0));
      worst = std::max(worst, std::fabs(total - 1.0));
    }
  }
  c.require(worst <= 1e-12,
            "normalization drifted to " + std::to_string(worst));
}

void cli_determinism(Check& c) {
  const std::filesystem::path dir = g_workdir / "determinism";
  std::filesystem::create_directories(dir);
  const std::string config = (dir / "model.toml").string();
  write_text_file(config,
                  "[network]\n"
                  "preset = \"binary-3\"\n"
                  "[response]\n"
                  "family = \"temperature-sigmoid\"\n"
                  "inverse_temperature = 1.5\n");
  auto shell = [&](const std::string& command) {
    const int status = std::system((command + " > /dev/null 2>&1").c_str());
    c.require(status == 0, "command failed: " + command);
    return status == 0;
  };
  const std::string q = "\"";
  if (!shell(q + g_cli + q + " simulate --config " + q + config +
             q + " --trials 160 --seed 11 --out " + q + (dir / "sim").string() + q)) {
    return;
  }
  const std::string data = (dir / "sim" / "data.csv").string();
  for (const char* sub : {"fit_a", "fit_b"}) {
    if (!shell(q + g_cli + q + " fit --config " + q + config + q + " --data " +
               q + data + q + " --out " + q + (dir / sub).string() + q)) {
      return;
    }
  }
  const std::string a = read_text_file((dir / "fit_a" / "map.json").string());
  const std::string b = read_text_file((dir / "fit_b" / "map.json").string());
  c.require(!a.empty() && a == b, "map.json differs between identical runs");
}

void reduction_equivalence(Check& c) {
  Network three = preset("binary-3");
  set_attribute(three, "node.1.tonic_volatility", -3.0);
  set_attribute(three, "node.1.volatility_coupling.0", 0.0);
  Network two = preset("binary-2");
  set_attribute(two, "node.1.tonic_volatility", -3.0);

  const InputSeries series = series_from_column(switching_task(320, 4), 0);
  const Trajectory a = run(std::move(three), series).trajectory;
  const Trajectory b = run(std::move(two), series).trajectory;
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (long s = 0; s < 320; ++s) {
      worst = std::max(worst, std::fabs(a.nodes[k].mean[s] - b.nodes[k].mean[s]));
      worst = std::max(worst,
                       std::fabs(a.nodes[k].precision[s] - b.nodes[k].precision[s]));
      worst = std::max(worst, std::fabs(a.nodes[k].expected_mean[s] -
                                        b.nodes[k].expected_mean[s]));
      worst = std::max(worst, std::fabs(a.nodes[k].expected_precision[s] -
                                        b.nodes[k].expected_precision[s]));
    }
  }
  c.require(worst <= 1e-12,
            "frozen third level deviates by " + std::to_string(worst));
}

void sequence_order(Check& c) {
  const Network net = preset("binary-3");
  const std::vector<Step> expected = {
      {2, "prediction"},       {1, "prediction"},      {0, "prediction"},
      {0, "prediction_error"}, {1, "posterior_update"}, {1, "prediction_error"},
      {2, "posterior_update"},
  };
  c.require(net.sequence.steps == expected, "derived sequence is misordered");
}

void parameter_recovery(Check& c) {
  const Model model = binary2_model(-3.0, 1.5);
  RecoveryOptions options;
  options.subjects = 50;
  options.trials = 320;
  options.seed = 13;
  options.workers = 8;
  const RecoveryReport report =
      recover(model, default_recovery_space(1), options);
  char buf[120];
  std::snprintf(buf, sizeof(buf), "r_omega %.3f, r_log_temperature %.3f",
                report.r_omega, report.r_log_temperature);
  c.require(report.r_omega >= 0.7 && report.r_log_temperature >= 0.7, buf);
}

void model_comparison(Check& c) {
  int wins = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const Model truth = binary2_model(-3.0, 3.0);
    const SubjectData data =
        simulate_subject(truth, 320, Rng::derive(900, s), Rng::derive(901, s));

    Model temperature = binary2_model(-3.0, 1.0);
    Model unit = binary2_model(-3.0, 1.0);
    unit.response.family = "unit-sigmoid";

    ParameterSpec omega;
    omega.target = "node.1.tonic_volatility";
    omega.prior = Prior::normal(-3.0, 2.0);
    omega.name = "omega";
    const std::vector<ParameterSpace> spaces = {
        default_inference_space(1), ParameterSpace({omega})};
    const std::vector<Model> models = {temperature, unit};

    SamplerOptions sampler;
    sampler.chains = 2;
    sampler.draws = 400;
    sampler.warmup = 400;
    std::vector<PosteriorSamples> posterior;
    for (std::size_t m = 0; m < models.size(); ++m) {
      sampler.seed = Rng::derive(902 + s, m);
      posterior.push_back(sample(spaces[m], data, models[m], sampler));
    }
    const ComparisonReport report =
        compare({"temperature", "unit"}, models, spaces, data, posterior);
    double elpd_temperature = 0.0;
    double elpd_unit = 0.0;
    for (const ModelScore& score : report.models) {
      (score.name == "temperature" ? elpd_temperature : elpd_unit) = score.elpd;
    }
    if (elpd_temperature > elpd_unit) ++wins;
  }
  c.require(wins >= 18,
            "temperature model won only " + std::to_string(wins) + "/20 seeds");
}

void mcmc_convergence(Check& c) {
  const Model truth = binary2_model(-3.0, 1.5);
  const SubjectData data = simulate_subject(truth, 320, 640, 641);
  SamplerOptions options;
  options.chains = 4;
  options.draws = 1000;
  options.warmup = 1000;
  options.seed = 31;
  const PosteriorSamples samples =
      sample(default_inference_space(1), data, truth, options);
  c.require(samples.chains() == 4 && samples.iterations() == 1000,
            "sampler did not produce 4 chains of 1000 draws");
  const SummaryTable table = summarize(samples, 0.94);
  for (const ParameterSummary& row : table.rows) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%s: rhat %.4f, ess %.0f", row.name.c_str(),
                  row.rhat, row.ess_bulk);
    c.require(row.rhat < 1.05 && row.ess_bulk > 100.0, buf);
  }
}

void multilevel_coverage(Check& c) {
  const int subjects = 20;
  Rng rng(71);
  std::vector<SubjectData> dataset;
  std::vector<double> true_omega;
  std::vector<double> true_log_t;
  for (int i = 0; i < subjects; ++i) {
    const double omega = -3.0 + 0.5 * rng.normal();
    const double log_t = std::log(1.5) + 0.3 * rng.normal();
    true_omega.push_back(omega);
    true_log_t.push_back(log_t);
    const Model model = binary2_model(omega, std::exp(log_t));
    dataset.push_back(simulate_subject(model, 160,
                                       Rng::derive(72, static_cast<std::uint64_t>(i)),
                                       Rng::derive(73, static_cast<std::uint64_t>(i))));
  }
  MultilevelOptions options;
  options.chains = 4;
  options.draws = 600;
  options.warmup = 600;
  options.seed = 74;
  options.workers = 4;
  const Model model = binary2_model(-3.0, 1.5);
  const PosteriorSamples samples = multilevel_sample(
      default_inference_space(1), dataset, model, GroupPriors{}, options);
  const SummaryTable table = summarize(samples, 0.94);

  const ParameterSummary& mu_omega = table.row("mu_omega");
  const ParameterSummary& mu_log_t = table.row("mu_log_temperature");
  const double omega_bar = mean_of(true_omega);
  const double log_t_bar = mean_of(true_log_t);
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "omega mean %.3f vs HDI [%.3f, %.3f]; ln t mean %.3f vs "
                "HDI [%.3f, %.3f]",
                omega_bar, mu_omega.hdi_low, mu_omega.hdi_high, log_t_bar,
                mu_log_t.hdi_low, mu_log_t.hdi_high);
  c.require(mu_omega.hdi_low <= omega_bar && omega_bar <= mu_omega.hdi_high &&
                mu_log_t.hdi_low <= log_t_bar && log_t_bar <= mu_log_t.hdi_high,
            buf);
}

void known_target_sampler(Check& c) {
  const auto target = [](const std::vector<double>& x) {
    const double z = (x[0] - 3.0) / 2.0;
    return -0.5 * z * z;
  };
  SamplerOptions options;
  options.chains = 4;
  options.draws = 1500;
  options.warmup = 500;
  options.seed = 5;
  const PosteriorSamples samples =
      sample_density(target, {"x"}, {{3.0}, {2.0}, {4.0}, {3.5}}, {2.0}, options);
  const ParameterSummary row = summarize(samples, 0.94).row("x");
  char buf[120];
  std::snprintf(buf, sizeof(buf), "mean %.4f (mcse %.4f), sd %.4f", row.mean,
                row.mcse_mean, row.sd);
  c.require(std::fabs(row.mean - 3.0) <= 3.0 * row.mcse_mean &&
                std::fabs(row.sd - 2.0) <= 0.2,
            buf);
}

void parallel_invariance(Check& c) {
  Rng rng(55);
  const Model model = binary2_model(-3.0, 1.5);
  std::vector<SubjectData> dataset;
  for (int i = 0; i < 10; ++i) {
    const Model truth = binary2_model(-4.0 + 2.0 * rng.uniform(),
                                      0.8 + 2.0 * rng.uniform());
    dataset.push_back(simulate_subject(truth, 160,
                                       Rng::derive(56, static_cast<std::uint64_t>(i)),
                                       Rng::derive(57, static_cast<std::uint64_t>(i))));
  }
  BatchOptions options;
  options.seed = 58;
  options.workers = 1;
  const std::vector<SubjectFit> serial =
      batch_fit(default_inference_space(1), dataset, model, options);
  options.workers = 8;
  const std::vector<SubjectFit> parallel =
      batch_fit(default_inference_space(1), dataset, model, options);

  c.require(serial.size() == parallel.size(), "result counts differ");
  for (std::size_t i = 0; i < serial.size() && c.ok; ++i) {
    const SubjectFit& a = serial[i];
    const SubjectFit& b = parallel[i];
    const bool same =
        a.ok == b.ok && a.map.values.size() == b.map.values.size() &&
        std::memcmp(a.map.values.data(), b.map.values.data(),
                    a.map.values.size() * sizeof(double)) == 0 &&
        std::memcmp(&a.map.log_posterior, &b.map.log_posterior,
                    sizeof(double)) == 0;
    c.require(same, "subject " + std::to_string(i) + " differs across workers");
  }
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--cli") == 0) g_cli = argv[i + 1];
    if (std::strcmp(argv[i], "--workdir") == 0) g_workdir = argv[i + 1];
  }
  if (g_cli.empty() || g_workdir.empty()) {
    std::fprintf(stderr, "usage: acceptance --cli <hgf> --workdir <dir>\n");
    return 2;
  }
  std::filesystem::create_directories(g_workdir);

  struct Criterion {
    const char* label;
    double budget_seconds;
    std::function<void(Check&)> body;
  };
  const std::vector<Criterion> criteria = {
      {"one-step binary oracle", 1.0, one_step_binary},
      {"one-step continuous oracle", 1.0, one_step_continuous},
      {"surprise normalization", 10.0, surprise_normalization},
      {"fit determinism through the CLI", 5.0, cli_determinism},
      {"frozen third level reduces to two", 5.0, reduction_equivalence},
      {"three-level update sequence order", 1.0, sequence_order},
      {"parameter recovery correlations", 300.0, parameter_recovery},
      {"temperature model wins comparison", 600.0, model_comparison},
      {"mcmc convergence diagnostics", 120.0, mcmc_convergence},
      {"multilevel group-mean coverage", 600.0, multilevel_coverage},
      {"known-target sampler accuracy", 10.0, known_target_sampler},
      {"batch fits invariant to workers", 60.0, parallel_invariance},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].body(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
      check.ok = false;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (seconds > criteria[i].budget_seconds) {
      check.require(false, "over budget");
      check.ok = false;
    }
    std::printf("%s %2zu  %s (%.1fs)\n", check.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].label, seconds);
    if (!check.ok) {
      ++failures;
      std::printf("        %s\n", check.detail.c_str());
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
