#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "hgf/inference.hpp"
#include "hgf/network.hpp"
#include "hgf/presets.hpp"
#include "hgf/response.hpp"
#include "hgf/task.hpp"
#include "hgf/updates.hpp"

namespace py = pybind11;

namespace {

hgf::Coupling coupling_from(const std::string& name) {
  if (name == "value") return hgf::Coupling::Value;
  if (name == "volatility") return hgf::Coupling::Volatility;
  throw hgf::ValidationError("coupling must be 'value' or 'volatility'");
}

hgf::NodeKind kind_from(const std::string& name) {
  if (name == "binary") return hgf::NodeKind::Binary;
  if (name == "continuous") return hgf::NodeKind::Continuous;
  throw hgf::ValidationError("kind must be 'binary' or 'continuous'");
}

hgf::InputSeries make_series(const std::vector<double>& u, int node,
                             const std::optional<std::vector<double>>& time,
                             const std::optional<std::vector<int>>& actions) {
  hgf::InputSeries series;
  series.observations.emplace_back(node, u);
  if (time) series.time = *time;
  if (actions) series.actions = *actions;
  return series;
}

hgf::ParameterSpace space_from(const std::vector<py::dict>& specs) {
  std::vector<hgf::ParameterSpec> parsed;
  for (const py::dict& d : specs) {
    hgf::ParameterSpec spec;
    spec.target = d["target"].cast<std::string>();
    const std::string prior = d["prior"].cast<std::string>();
    const double a = d.contains("a") ? d["a"].cast<double>() : 0.0;
    const double b = d.contains("b") ? d["b"].cast<double>() : 1.0;
    if (prior == "normal") {
      spec.prior = hgf::Prior::normal(a, b);
    } else if (prior == "halfnormal") {
      spec.prior = hgf::Prior::half_normal(b);
    } else if (prior == "uniform") {
      spec.prior = hgf::Prior::uniform(a, b);
    } else {
      throw hgf::ValidationError("prior must be normal, halfnormal or uniform");
    }
    if (d.contains("transform")) {
      const std::string t = d["transform"].cast<std::string>();
      if (t == "log") {
        spec.transform = hgf::Transform::Log;
      } else if (t != "identity") {
        throw hgf::ValidationError("transform must be 'identity' or 'log'");
      }
    }
    if (d.contains("name")) spec.name = d["name"].cast<std::string>();
    parsed.push_back(std::move(spec));
  }
  return hgf::ParameterSpace(std::move(parsed));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Networks of coupled Gaussian beliefs: filtering, simulation and "
            "inference";

  py::register_exception<hgf::Error>(m, "HgfError", PyExc_RuntimeError);

  py::class_<hgf::Network>(m, "Network")
      .def_property_readonly("size", &hgf::Network::size)
      .def_property_readonly("kinds",
                             [](const hgf::Network& net) {
                               std::vector<std::string> out;
                               for (hgf::NodeKind k : net.kinds) {
                                 out.emplace_back(hgf::to_string(k));
                               }
                               return out;
                             })
      .def_property_readonly("sequence",
                             [](const hgf::Network& net) {
                               std::vector<std::pair<int, std::string>> out;
                               for (const hgf::Step& s : net.sequence.steps) {
                                 out.emplace_back(s.node, s.function);
                               }
                               return out;
                             })
      .def("get", &hgf::get_attribute, py::arg("path"))
      .def("set", &hgf::set_attribute, py::arg("path"), py::arg("value"))
      .def("parents",
           [](const hgf::Network& net, int node, const std::string& type) {
             return net.edges.parents(node, coupling_from(type));
           },
           py::arg("node"), py::arg("type"))
      .def("children",
           [](const hgf::Network& net, int node, const std::string& type) {
             return net.edges.children(node, coupling_from(type));
           },
           py::arg("node"), py::arg("type"));

  py::class_<hgf::NodeTrace>(m, "NodeTrace")
      .def_readonly("mean", &hgf::NodeTrace::mean)
      .def_readonly("precision", &hgf::NodeTrace::precision)
      .def_readonly("expected_mean", &hgf::NodeTrace::expected_mean)
      .def_readonly("expected_precision", &hgf::NodeTrace::expected_precision)
      .def_readonly("observation", &hgf::NodeTrace::observation)
      .def_readonly("surprise", &hgf::NodeTrace::surprise);

  py::class_<hgf::Trajectory>(m, "Trajectory")
      .def_property_readonly("kinds",
                             [](const hgf::Trajectory& traj) {
                               std::vector<std::string> out;
                               for (hgf::NodeKind k : traj.kinds) {
                                 out.emplace_back(hgf::to_string(k));
                               }
                               return out;
                             })
      .def_readonly("nodes", &hgf::Trajectory::nodes)
      .def_readonly("time", &hgf::Trajectory::time)
      .def_readonly("dt", &hgf::Trajectory::dt)
      .def_property_readonly("steps", &hgf::Trajectory::steps)
      .def_property_readonly("node_count", &hgf::Trajectory::node_count);

  py::class_<hgf::ResponseModel>(m, "ResponseModel")
      .def(py::init([](const std::string& family, double t) {
             hgf::ResponseModel model;
             model.family = family;
             model.inverse_temperature = t;
             return model;
           }),
           py::arg("family") = "temperature-sigmoid",
           py::arg("inverse_temperature") = 1.0)
      .def_readwrite("family", &hgf::ResponseModel::family)
      .def_readwrite("inverse_temperature",
                     &hgf::ResponseModel::inverse_temperature);

  py::class_<hgf::PosteriorSamples>(m, "PosteriorSamples")
      .def_readonly("names", &hgf::PosteriorSamples::names)
      .def_readonly("draws", &hgf::PosteriorSamples::draws)
      .def_readonly("acceptance", &hgf::PosteriorSamples::acceptance)
      .def("pooled",
           [](const hgf::PosteriorSamples& samples, const std::string& name) {
             const int p = samples.index_of(name);
             if (p < 0) throw hgf::ValidationError("unknown parameter " + name);
             return samples.pooled(p);
           },
           py::arg("name"));

  m.def("preset",
        static_cast<hgf::Network (*)(const std::string&)>(&hgf::preset),
        py::arg("name"));
  m.def("new_network", &hgf::new_network);
  m.def("add_node",
        [](hgf::Network net, const std::string& kind, double mean,
           double precision, double tonic_volatility) {
          hgf::NodeAttributes attrs;
          attrs.mean = mean;
          attrs.expected_mean = mean;
          attrs.precision = precision;
          attrs.expected_precision = precision;
          attrs.tonic_volatility = tonic_volatility;
          return hgf::add_node(std::move(net), kind_from(kind), std::move(attrs));
        },
        py::arg("net"), py::arg("kind"), py::arg("mean") = 0.0,
        py::arg("precision") = 1.0, py::arg("tonic_volatility") = -3.0);
  m.def("add_edge",
        [](hgf::Network net, int child, int parent, const std::string& type,
           double strength) {
          return hgf::add_edge(std::move(net), child, parent,
                               coupling_from(type), strength);
        },
        py::arg("net"), py::arg("child"), py::arg("parent"), py::arg("type"),
        py::arg("strength") = 1.0);
  m.def("remove_node",
        [](hgf::Network net, int idx) {
          return hgf::remove_node(std::move(net), idx);
        },
        py::arg("net"), py::arg("idx"));
  m.def("set_edges",
        [](hgf::Network net, int child, const std::string& type,
           const std::vector<int>& parents, const std::vector<double>& strengths) {
          return hgf::set_edges(std::move(net), child, coupling_from(type),
                                parents, strengths);
        },
        py::arg("net"), py::arg("child"), py::arg("type"), py::arg("parents"),
        py::arg("strengths") = std::vector<double>{});
  m.def("derive_sequence", [](hgf::Network net) {
    net.sequence = hgf::derive_update_sequence(net);
    return net;
  });
  m.def("check_invariants", &hgf::check_invariants);
  m.def("propagate", &hgf::propagate, py::arg("net"), py::arg("observations"),
        py::arg("dt") = 1.0);
  m.def("run",
        [](hgf::Network net, const std::vector<double>& u, int node,
           const std::optional<std::vector<double>>& time,
           const std::optional<std::vector<int>>& actions) {
          hgf::RunResult result =
              hgf::run(std::move(net), make_series(u, node, time, actions));
          return py::make_tuple(std::move(result.network),
                                std::move(result.trajectory));
        },
        py::arg("net"), py::arg("u"), py::arg("node") = 0,
        py::arg("time") = std::nullopt, py::arg("actions") = std::nullopt);

  m.def("binary_surprise", &hgf::binary_surprise, py::arg("expected_mean"),
        py::arg("u"));
  m.def("gaussian_surprise", &hgf::gaussian_surprise, py::arg("expected_mean"),
        py::arg("variance"), py::arg("u"));
  m.def("switching_task", &hgf::switching_task, py::arg("trials"),
        py::arg("seed"), py::arg("p") = 0.8, py::arg("block_length") = 40);

  m.def("action_probability", &hgf::action_probability, py::arg("trajectory"),
        py::arg("model"));
  m.def("log_likelihood",
        [](const hgf::Trajectory& traj, const std::vector<int>& actions,
           const hgf::ResponseModel& model) {
          return hgf::log_likelihood(traj, actions, model);
        },
        py::arg("trajectory"), py::arg("actions"), py::arg("model"));
  m.def("simulate_actions", &hgf::simulate_actions, py::arg("trajectory"),
        py::arg("model"), py::arg("seed"));

  m.def("sample",
        [](hgf::Network net, const hgf::ResponseModel& response,
           const std::vector<double>& u, const std::vector<int>& y, int node,
           const std::vector<py::dict>& specs, int chains, int draws,
           int warmup, std::uint64_t seed, int workers) {
          hgf::Model model{std::move(net), response};
          hgf::SubjectData data;
          data.inputs = make_series(u, node, std::nullopt, std::nullopt);
          data.actions = y;
          hgf::SamplerOptions options;
          options.chains = chains;
          options.draws = draws;
          options.warmup = warmup;
          options.seed = seed;
          options.workers = workers;
          const hgf::ParameterSpace space = space_from(specs);
          py::gil_scoped_release release;
          return hgf::sample(space, data, model, options);
        },
        py::arg("net"), py::arg("response"), py::arg("u"), py::arg("y"),
        py::arg("node") = 0, py::arg("specs") = std::vector<py::dict>{},
        py::arg("chains") = 4, py::arg("draws") = 1000,
        py::arg("warmup") = 1000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def("summarize",
        [](const hgf::PosteriorSamples& samples, double hdi_mass) {
          const hgf::SummaryTable table = hgf::summarize(samples, hdi_mass);
          py::list rows;
          for (const hgf::ParameterSummary& row : table.rows) {
            py::dict d;
            d["name"] = row.name;
            d["mean"] = row.mean;
            d["sd"] = row.sd;
            d["hdi_low"] = row.hdi_low;
            d["hdi_high"] = row.hdi_high;
            d["ess_bulk"] = row.ess_bulk;
            d["rhat"] = row.rhat;
            d["mcse_mean"] = row.mcse_mean;
            rows.append(std::move(d));
          }
          return rows;
        },
        py::arg("samples"), py::arg("hdi_mass") = 0.94);
}
